#include "crashfreq/screening.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace crashfreq {

std::string zone_to_string(Zone z) {
  switch (z) {
    case Zone::Hotspot: return "hotspot";
    case Zone::Normal: return "normal";
    case Zone::Cold: return "cold";
  }
  return "normal";
}

std::vector<PsiResult> compute_psi(const FitResult& fit, const FitData& data) {
  const FitInfo& info = fit.info;
  const std::size_t n = data.design.n_rows;
  const std::size_t p = data.design.n_cols;
  if (n != info.site_ids.size())
    throw std::invalid_argument("compute_psi: data does not match the saved fit");
  const Family family = info.spec.family;

  std::vector<int> rc_col;
  for (const auto& cn : fit.chains.at(0).site_coef_names)
    rc_col.push_back(int(data.design.column_index(cn)));

  std::vector<double> expected(n, 0.0), predicted(n, 0.0);
  std::size_t rows_total = 0;

  std::vector<double> beta(p);
  for (const auto& c : fit.chains) {
    if (c.latent_iters.empty()) continue;
    if (c.thin < 1 || (c.latent_thin % c.thin) != 0)
      throw std::invalid_argument("compute_psi: latent_thin must be a multiple of thin");
    std::vector<std::size_t> idx(p);
    for (std::size_t j = 0; j < p; ++j)
      idx[j] = c.scalar_index(info.column_names[j]);
    const std::size_t k_theta =
        family == Family::RpNbGe ? 0 : c.scalar_index("theta");
    const std::size_t k_a = family == Family::RpNbGe ? c.scalar_index("ge_a") : 0;
    const std::size_t k_b = family == Family::RpNbGe ? c.scalar_index("ge_b") : 0;

    for (std::size_t r = 0; r < c.latent_iters.size(); ++r) {
      const std::size_t scalar_row = std::size_t(c.latent_iters[r] / c.thin);
      for (std::size_t j = 0; j < p; ++j) beta[j] = c.scalar_at(scalar_row, idx[j]);
      const double mix = family == Family::RpNbGe
                             ? mixing_mean(family, 0.0, c.scalar_at(scalar_row, k_a),
                                           c.scalar_at(scalar_row, k_b))
                             : mixing_mean(family, c.scalar_at(scalar_row, k_theta),
                                           0.0, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = &data.design.values[i * p];
        double lp = 0.0;
        for (std::size_t j = 0; j < p; ++j) {
          bool random = false;
          for (std::size_t rc = 0; rc < rc_col.size(); ++rc)
            if (std::size_t(rc_col[rc]) == j) random = true;
          if (!random) lp += beta[j] * row[j];
        }
        for (std::size_t rc = 0; rc < rc_col.size(); ++rc)
          lp += c.site_coefs[rc][r * n + i] * row[rc_col[rc]];
        const double mu = std::exp(clamp_linear_predictor(lp));
        expected[i] += mu * c.lambda[r * n + i];
        predicted[i] += mu * mix;
      }
      ++rows_total;
    }
  }
  if (rows_total == 0)
    throw std::invalid_argument("compute_psi: fit has no stored latent draws");

  std::vector<PsiResult> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i].site_id = info.site_ids[i];
    out[i].expected = expected[i] / double(rows_total);
    out[i].predicted = predicted[i] / double(rows_total);
    out[i].psi = out[i].expected - out[i].predicted;
  }
  classify(out);
  return out;
}

PsiResult psi(const FitResult& fit, const FitData& data, const std::string& site_id) {
  auto results = compute_psi(fit, data);
  for (const auto& r : results)
    if (r.site_id == site_id) return r;
  throw std::invalid_argument("site '" + site_id + "' is absent from the fit");
}

namespace {

double quantile_type7_local(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = (double(v.size()) - 1.0) * p;
  const std::size_t lo = std::size_t(std::floor(h));
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - double(lo)) * (v[lo + 1] - v[lo]);
}

}  // namespace

void classify(std::vector<PsiResult>& results) {
  if (results.empty()) throw std::invalid_argument("classify: empty input");
  std::vector<double> positives;
  for (const auto& r : results)
    if (r.psi > 0.0) positives.push_back(r.psi);

  double cutoff = 0.0;
  if (!positives.empty()) cutoff = quantile_type7_local(positives, 0.9);

  for (auto& r : results) {
    if (r.psi > 0.0) {
      r.zone = (!positives.empty() && r.psi >= cutoff) ? Zone::Hotspot : Zone::Normal;
    } else if (r.psi < 0.0) {
      r.zone = Zone::Cold;
    } else {
      r.zone = Zone::Normal;  // boundary value
    }
  }
}

std::vector<CorridorSummary> corridor_aggregate(
    const std::vector<PsiResult>& results,
    const std::map<std::string, std::string>& site_to_corridor,
    std::vector<std::string>* unassigned) {
  std::map<std::string, CorridorSummary> acc;
  for (const auto& r : results) {
    auto it = site_to_corridor.find(r.site_id);
    if (it == site_to_corridor.end()) {
      if (unassigned) unassigned->push_back(r.site_id);
      continue;
    }
    CorridorSummary& c = acc[it->second];
    c.corridor_id = it->second;
    c.psi_sum += r.psi;
    if (r.psi > 0.0) c.positive_psi_sum += r.psi;
    ++c.n_sites;
  }

  std::vector<CorridorSummary> out;
  out.reserve(acc.size());
  for (auto& [id, c] : acc) out.push_back(c);
  std::sort(out.begin(), out.end(), [](const CorridorSummary& a, const CorridorSummary& b) {
    if (a.positive_psi_sum != b.positive_psi_sum)
      return a.positive_psi_sum > b.positive_psi_sum;
    return a.corridor_id < b.corridor_id;
  });
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = int(i) + 1;
  return out;
}

MhResult mh_odds_ratio(const std::vector<StratumTable>& tables) {
  if (tables.empty()) throw std::invalid_argument("mh_odds_ratio: no strata");
  double num_or = 0.0, den_or = 0.0;
  double num_rr = 0.0, den_rr = 0.0;
  for (const auto& t : tables) {
    if (t.a < 0 || t.b < 0 || t.c < 0 || t.d < 0)
      throw std::invalid_argument("mh_odds_ratio: negative cell count");
    const double n = double(t.n());
    if (n <= 0.0) throw std::invalid_argument("mh_odds_ratio: empty stratum");
    num_or += double(t.a) * double(t.d) / n;
    den_or += double(t.b) * double(t.c) / n;
    num_rr += double(t.a) * double(t.b + t.d) / n;
    den_rr += double(t.b) * double(t.a + t.c) / n;
  }
  MhResult r;
  if (den_or <= 0.0) {
    r.defined = false;
    return r;
  }
  r.defined = true;
  r.odds_ratio = num_or / den_or;
  r.relative_risk = den_rr > 0.0 ? num_rr / den_rr
                                 : std::numeric_limits<double>::quiet_NaN();
  return r;
}

std::vector<StratumTable> load_strata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open strata file: " + path);
  std::vector<StratumTable> out;
  std::string line;
  bool header_checked = false;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string f;
    std::vector<std::string> fields;
    while (std::getline(ss, f, ',')) fields.push_back(f);
    if (!header_checked) {
      header_checked = true;
      if (!fields.empty() && (fields[0] == "a" || fields[0] == "stratum")) continue;
    }
    // Optional leading stratum label.
    std::size_t off = fields.size() == 5 ? 1 : 0;
    if (fields.size() != 4 && fields.size() != 5)
      throw std::invalid_argument("strata file line " + std::to_string(line_no) +
                                  ": expected a,b,c,d cells");
    StratumTable t;
    t.a = std::stol(fields[off + 0]);
    t.b = std::stol(fields[off + 1]);
    t.c = std::stol(fields[off + 2]);
    t.d = std::stol(fields[off + 3]);
    out.push_back(t);
  }
  return out;
}

}  // namespace crashfreq
