#include "crashfreq/draws_io.hpp"

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "crashfreq/version.hpp"
#include "json.hpp"

namespace crashfreq {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kMagic[8] = {'C', 'F', 'C', 'H', 'A', 'I', 'N', '1'};

void write_doubles(std::ofstream& out, const std::vector<double>& v) {
  out.write(reinterpret_cast<const char*>(v.data()),
            std::streamsize(v.size() * sizeof(double)));
}

void read_doubles(std::ifstream& in, std::vector<double>& v, std::size_t count) {
  v.resize(count);
  in.read(reinterpret_cast<char*>(v.data()), std::streamsize(count * sizeof(double)));
  if (!in) throw std::runtime_error("chain file truncated");
}

json column_stats_to_json(const FitInfo& info) {
  json cols = json::array();
  for (std::size_t j = 0; j < info.column_names.size(); ++j) {
    cols.push_back({{"name", info.column_names[j]},
                    {"continuous", bool(info.continuous[j])},
                    {"standardized", info.column_stats[j].standardized},
                    {"mean", info.column_stats[j].mean},
                    {"sd", info.column_stats[j].sd}});
  }
  return cols;
}

void column_stats_from_json(const json& cols, FitInfo& info) {
  info.column_names.clear();
  info.continuous.clear();
  info.column_stats.clear();
  for (const auto& c : cols) {
    info.column_names.push_back(c.at("name").get<std::string>());
    info.continuous.push_back(c.at("continuous").get<bool>());
    ColumnStats st;
    st.standardized = c.at("standardized").get<bool>();
    st.mean = c.at("mean").get<double>();
    st.sd = c.at("sd").get<double>();
    info.column_stats.push_back(st);
  }
}

// Atomic write: temp file in the target directory, then rename.
class AtomicFile {
 public:
  AtomicFile(const fs::path& target, std::ios::openmode mode)
      : target_(target), tmp_(target.string() + ".tmp"), out_(tmp_, mode) {
    if (!out_) throw std::runtime_error("cannot write " + target.string());
  }
  std::ofstream& stream() { return out_; }
  void commit() {
    out_.close();
    fs::rename(tmp_, target_);
  }

 private:
  fs::path target_;
  fs::path tmp_;
  std::ofstream out_;
};

}  // namespace

void save_fit(const FitResult& fit, const std::string& dir) {
  fs::create_directories(dir);

  json meta;
  meta["format_version"] = kDrawsFormatVersion;
  meta["tool_version"] = kVersion;
  meta["model"] = json::parse(model_spec_to_json(fit.info.spec));
  meta["columns"] = column_stats_to_json(fit.info);
  meta["random_columns"] = fit.info.random_columns;
  meta["site_ids"] = fit.info.site_ids;
  meta["n_observations"] = fit.info.n_observations;
  meta["n_chains"] = fit.chains.size();
  {
    AtomicFile f(fs::path(dir) / "fit.json", std::ios::out);
    f.stream() << meta.dump(2) << "\n";
    f.commit();
  }

  for (const auto& c : fit.chains) {
    json h;
    h["chain_id"] = c.chain_id;
    h["seed"] = c.seed;
    h["n_iter"] = c.n_iter;
    h["burn_in"] = c.burn_in;
    h["thin"] = c.thin;
    h["latent_thin"] = c.latent_thin;
    h["scalar_names"] = c.scalar_names;
    h["scalar_rows"] = c.scalar_iters.size();
    h["scalar_iters_start"] = c.scalar_iters.empty() ? 0 : c.scalar_iters.front();
    h["n_sites"] = c.n_sites;
    h["latent_rows"] = c.latent_iters.size();
    h["has_z"] = !c.z.empty();
    h["site_coef_names"] = c.site_coef_names;
    h["acceptance"] = c.acceptance;
    const std::string header = h.dump();

    AtomicFile f(fs::path(dir) / ("chain_" + std::to_string(c.chain_id) + ".bin"),
                 std::ios::out | std::ios::binary);
    auto& out = f.stream();
    out.write(kMagic, sizeof(kMagic));
    const std::uint32_t len = std::uint32_t(header.size());
    out.write(reinterpret_cast<const char*>(&len), sizeof(len));
    out.write(header.data(), std::streamsize(header.size()));
    write_doubles(out, c.scalars);
    write_doubles(out, c.lambda);
    write_doubles(out, c.z);
    for (const auto& sc : c.site_coefs) write_doubles(out, sc);
    f.commit();
  }
}

FitResult load_fit(const std::string& dir) {
  std::ifstream meta_in(fs::path(dir) / "fit.json");
  if (!meta_in) throw std::runtime_error("no fit.json in " + dir);
  json meta = json::parse(meta_in);
  if (meta.at("format_version").get<int>() != kDrawsFormatVersion)
    throw std::runtime_error("unsupported draws format version");

  FitResult fit;
  fit.info.spec = model_spec_from_json(meta.at("model").dump());
  column_stats_from_json(meta.at("columns"), fit.info);
  for (const auto& r : meta.at("random_columns"))
    fit.info.random_columns.push_back(r.get<std::string>());
  for (const auto& s : meta.at("site_ids"))
    fit.info.site_ids.push_back(s.get<std::string>());
  fit.info.n_observations = meta.at("n_observations").get<std::size_t>();

  const std::size_t n_chains = meta.at("n_chains").get<std::size_t>();
  for (std::size_t k = 0; k < n_chains; ++k) {
    const fs::path path = fs::path(dir) / ("chain_" + std::to_string(k) + ".bin");
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("missing chain file: " + path.string());
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
      throw std::runtime_error("bad chain file magic: " + path.string());
    std::uint32_t len = 0;
    in.read(reinterpret_cast<char*>(&len), sizeof(len));
    std::string header(len, '\0');
    in.read(header.data(), len);
    if (!in) throw std::runtime_error("chain header truncated: " + path.string());
    json h = json::parse(header);

    ChainDraws c;
    c.chain_id = h.at("chain_id").get<int>();
    c.seed = h.at("seed").get<std::uint64_t>();
    c.n_iter = h.at("n_iter").get<int>();
    c.burn_in = h.at("burn_in").get<int>();
    c.thin = h.at("thin").get<int>();
    c.latent_thin = h.at("latent_thin").get<int>();
    for (const auto& s : h.at("scalar_names"))
      c.scalar_names.push_back(s.get<std::string>());
    c.n_sites = h.at("n_sites").get<std::size_t>();
    for (const auto& [key, value] : h.at("acceptance").items())
      c.acceptance[key] = value.get<double>();

    const std::size_t scalar_rows = h.at("scalar_rows").get<std::size_t>();
    const std::size_t latent_rows = h.at("latent_rows").get<std::size_t>();
    c.scalar_iters.resize(scalar_rows);
    for (std::size_t r = 0; r < scalar_rows; ++r)
      c.scalar_iters[r] = int(r) * c.thin;
    c.latent_iters.resize(latent_rows);
    for (std::size_t r = 0; r < latent_rows; ++r)
      c.latent_iters[r] = c.burn_in + int(r) * c.latent_thin;

    read_doubles(in, c.scalars, scalar_rows * c.scalar_names.size());
    read_doubles(in, c.lambda, latent_rows * c.n_sites);
    if (h.at("has_z").get<bool>()) read_doubles(in, c.z, latent_rows * c.n_sites);
    for (const auto& s : h.at("site_coef_names"))
      c.site_coef_names.push_back(s.get<std::string>());
    c.site_coefs.resize(c.site_coef_names.size());
    for (auto& sc : c.site_coefs) read_doubles(in, sc, latent_rows * c.n_sites);
    fit.chains.push_back(std::move(c));
  }
  return fit;
}

}  // namespace crashfreq
