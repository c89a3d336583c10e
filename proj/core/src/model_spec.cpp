#include "crashfreq/model_spec.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace crashfreq {

using nlohmann::json;

Family family_from_string(const std::string& s) {
  if (s == "nb-l") return Family::NbL;
  if (s == "rpnb-l") return Family::RpNbL;
  if (s == "rpnb-ge") return Family::RpNbGe;
  throw std::invalid_argument("unknown model family: " + s);
}

std::string family_to_string(Family f) {
  switch (f) {
    case Family::NbL: return "nb-l";
    case Family::RpNbL: return "rpnb-l";
    case Family::RpNbGe: return "rpnb-ge";
  }
  return "nb-l";
}

PriorConfig PriorConfig::for_observations(std::size_t n) {
  PriorConfig p;
  p.lindley_beta_a = static_cast<double>(n) / 3.0;
  p.lindley_beta_b = static_cast<double>(n) / 2.0;
  return p;
}

std::size_t DesignMatrix::column_index(const std::string& name) const {
  auto it = std::find(column_names.begin(), column_names.end(), name);
  if (it == column_names.end())
    throw std::invalid_argument("no design column named '" + name + "'");
  return static_cast<std::size_t>(it - column_names.begin());
}

namespace {

std::string term_column_base(const Term& t) {
  switch (t.transform) {
    case TermTransform::Identity: return t.name;
    case TermTransform::NaturalLog: return "ln_" + t.name;
    case TermTransform::Threshold: {
      std::ostringstream os;
      os << t.name << "_ge";
      if (t.threshold == std::floor(t.threshold))
        os << static_cast<long>(t.threshold);
      else
        os << t.threshold;
      return os.str();
    }
  }
  return t.name;
}

}  // namespace

DesignMatrix build_design(const Dataset& data, const Formula& formula) {
  if (data.empty()) throw std::invalid_argument("build_design: empty dataset");
  if (formula.response != "kabco" && formula.response != "kabc" &&
      formula.response != "kab")
    throw std::invalid_argument("build_design: unknown response '" +
                                formula.response + "'");

  struct Column {
    std::string name;
    bool continuous;
  };
  std::vector<Column> columns;
  columns.push_back({"const", false});

  struct Encoder {
    const Term* term;
    std::vector<std::string> levels;  // indicator levels (categorical)
  };
  std::vector<Encoder> encoders;

  for (const auto& term : formula.terms) {
    Encoder enc{&term, {}};
    if (is_categorical_field(term.name)) {
      if (term.transform != TermTransform::Identity)
        throw std::invalid_argument("build_design: transform on categorical term '" +
                                    term.name + "'");
      const auto& levels = categorical_domains().at(term.name);
      if (term.level) {
        if (std::find(levels.begin(), levels.end(), *term.level) == levels.end())
          throw std::invalid_argument("build_design: unknown level '" + *term.level +
                                      "' for '" + term.name + "'");
        enc.levels = {*term.level};
      } else {
        // Full encoding against the reference (first) level.
        enc.levels.assign(levels.begin() + 1, levels.end());
      }
      for (const auto& lev : enc.levels)
        columns.push_back({term.name + "_" + lev, false});
    } else if (is_continuous_field(term.name)) {
      const bool cont = term.transform != TermTransform::Threshold;
      columns.push_back({term_column_base(term), cont});
    } else {
      throw std::invalid_argument("build_design: unknown covariate '" + term.name + "'");
    }
    encoders.push_back(std::move(enc));
  }

  DesignMatrix m;
  m.n_rows = data.size();
  m.n_cols = columns.size();
  for (const auto& c : columns) {
    m.column_names.push_back(c.name);
    m.continuous.push_back(c.continuous);
  }
  m.column_stats.assign(m.n_cols, ColumnStats{});
  m.values.assign(m.n_rows * m.n_cols, 0.0);
  m.site_ids.reserve(m.n_rows);

  for (std::size_t i = 0; i < data.size(); ++i) {
    const SiteRecord& r = data[i];
    m.site_ids.push_back(r.site_id);
    m.at(i, 0) = 1.0;
    std::size_t col = 1;
    for (const auto& enc : encoders) {
      const Term& term = *enc.term;
      if (!enc.levels.empty()) {
        const std::string& value = categorical_value(r, term.name);
        const auto& domain = categorical_domains().at(term.name);
        if (std::find(domain.begin(), domain.end(), value) == domain.end())
          throw std::invalid_argument("build_design: unknown category label '" +
                                      value + "' in column '" + term.name + "'");
        for (const auto& lev : enc.levels) m.at(i, col++) = value == lev ? 1.0 : 0.0;
      } else {
        const double x = continuous_value(r, term.name);
        switch (term.transform) {
          case TermTransform::Identity:
            m.at(i, col++) = x;
            break;
          case TermTransform::NaturalLog:
            if (!(x > 0.0))
              throw std::invalid_argument(
                  "build_design: log transform needs positive values; '" +
                  term.name + "' = " + std::to_string(x) + " at site " + r.site_id);
            m.at(i, col++) = std::log(x);
            break;
          case TermTransform::Threshold:
            m.at(i, col++) = x >= term.threshold ? 1.0 : 0.0;
            break;
        }
      }
    }
  }
  return m;
}

DesignMatrix standardize(DesignMatrix m) {
  for (std::size_t j = 0; j < m.n_cols; ++j) {
    if (!m.continuous[j]) continue;
    double sum = 0.0;
    for (std::size_t i = 0; i < m.n_rows; ++i) sum += m.at(i, j);
    const double mean = sum / static_cast<double>(m.n_rows);
    double ss = 0.0;
    for (std::size_t i = 0; i < m.n_rows; ++i) {
      const double d = m.at(i, j) - mean;
      ss += d * d;
    }
    const double sd = std::sqrt(ss / static_cast<double>(m.n_rows));
    if (!(sd > 0.0))
      throw std::invalid_argument("standardize: zero-variance column '" +
                                  m.column_names[j] + "'");
    for (std::size_t i = 0; i < m.n_rows; ++i)
      m.at(i, j) = (m.at(i, j) - mean) / sd;
    // Compose with any transform already recorded.
    ColumnStats& st = m.column_stats[j];
    if (st.standardized) {
      st.mean += mean * st.sd;
      st.sd *= sd;
    } else {
      st.mean = mean;
      st.sd = sd;
      st.standardized = true;
    }
  }
  return m;
}

std::vector<double> destandardize_coefficients(const std::vector<double>& b_std,
                                               const DesignMatrix& m) {
  if (b_std.size() != m.n_cols)
    throw std::invalid_argument("destandardize_coefficients: dimension mismatch");
  std::vector<double> b = b_std;
  double intercept_shift = 0.0;
  for (std::size_t j = 1; j < m.n_cols; ++j) {
    const ColumnStats& st = m.column_stats[j];
    if (!st.standardized) continue;
    b[j] = b_std[j] / st.sd;
    intercept_shift += b[j] * st.mean;
  }
  b[0] = b_std[0] - intercept_shift;
  return b;
}

double destandardize_sd(double sd_std, const DesignMatrix& m, std::size_t col) {
  const ColumnStats& st = m.column_stats.at(col);
  return st.standardized ? sd_std / st.sd : sd_std;
}

double clamp_linear_predictor(double lp) {
  if (lp > kLinearPredictorClamp) return kLinearPredictorClamp;
  if (lp < -kLinearPredictorClamp) return -kLinearPredictorClamp;
  return lp;
}

double mean_response(const std::vector<double>& coefficients, const double* row,
                     std::size_t n_cols, double lambda_component) {
  if (coefficients.size() != n_cols)
    throw std::invalid_argument("mean_response: coefficient/column mismatch");
  double lp = 0.0;
  for (std::size_t j = 0; j < n_cols; ++j) lp += coefficients[j] * row[j];
  return std::exp(clamp_linear_predictor(lp)) * lambda_component;
}

std::vector<std::size_t> random_column_indices(const DesignMatrix& m,
                                               const Formula& formula) {
  std::vector<std::size_t> out;
  for (const auto& rt : formula.random_terms) {
    const Term* term = nullptr;
    for (const auto& t : formula.terms) {
      if (t.name == rt) {
        term = &t;
        break;
      }
    }
    if (!term)
      throw std::invalid_argument("random term '" + rt + "' is not a formula term");
    if (is_categorical_field(term->name) ||
        term->transform == TermTransform::Threshold)
      throw std::invalid_argument("random term '" + rt +
                                  "' must be a continuous (identity or log) term");
    out.push_back(m.column_index(term_column_base(*term)));
  }
  return out;
}

std::vector<int> response_vector(const Dataset& data, const Formula& formula) {
  std::vector<int> y(data.size());
  for (std::size_t i = 0; i < data.size(); ++i)
    y[i] = response_value(data[i], formula.response);
  return y;
}

namespace {

Term term_from_json(const json& j) {
  Term t;
  if (j.is_string()) {
    t.name = j.get<std::string>();
    return t;
  }
  t.name = j.at("name").get<std::string>();
  if (j.contains("transform")) {
    const std::string tr = j["transform"].get<std::string>();
    if (tr == "identity") t.transform = TermTransform::Identity;
    else if (tr == "log") t.transform = TermTransform::NaturalLog;
    else if (tr == "threshold") t.transform = TermTransform::Threshold;
    else throw std::invalid_argument("unknown term transform: " + tr);
  }
  if (j.contains("threshold")) {
    t.threshold = j["threshold"].get<double>();
    if (!j.contains("transform")) t.transform = TermTransform::Threshold;
  }
  if (t.transform == TermTransform::Threshold && !j.contains("threshold"))
    throw std::invalid_argument("threshold transform needs a 'threshold' value");
  if (j.contains("level")) t.level = j["level"].get<std::string>();
  return t;
}

json term_to_json(const Term& t) {
  json j;
  j["name"] = t.name;
  switch (t.transform) {
    case TermTransform::Identity: break;
    case TermTransform::NaturalLog: j["transform"] = "log"; break;
    case TermTransform::Threshold:
      j["transform"] = "threshold";
      j["threshold"] = t.threshold;
      break;
  }
  if (t.level) j["level"] = *t.level;
  return j;
}

}  // namespace

ModelSpec model_spec_from_json(const std::string& json_text) {
  json j = json::parse(json_text);
  ModelSpec spec;
  spec.family = family_from_string(j.value("family", "nb-l"));
  spec.formula.response = j.value("response", "kabco");
  if (j.contains("terms"))
    for (const auto& t : j["terms"]) spec.formula.terms.push_back(term_from_json(t));
  if (j.contains("random_terms"))
    for (const auto& r : j["random_terms"])
      spec.formula.random_terms.push_back(r.get<std::string>());
  spec.standardize = j.value("standardize", true);

  if (j.contains("priors")) {
    const auto& p = j["priors"];
    spec.priors.coef_mean = p.value("coef_mean", spec.priors.coef_mean);
    spec.priors.coef_variance = p.value("coef_variance", spec.priors.coef_variance);
    spec.priors.rp_precision_shape =
        p.value("rp_precision_shape", spec.priors.rp_precision_shape);
    spec.priors.rp_precision_rate =
        p.value("rp_precision_rate", spec.priors.rp_precision_rate);
    spec.priors.dispersion_shape =
        p.value("dispersion_shape", spec.priors.dispersion_shape);
    spec.priors.dispersion_rate =
        p.value("dispersion_rate", spec.priors.dispersion_rate);
    spec.priors.ge_shape = p.value("ge_shape", spec.priors.ge_shape);
    spec.priors.ge_rate = p.value("ge_rate", spec.priors.ge_rate);
  }

  if (j.contains("mcmc")) {
    const auto& mc = j["mcmc"];
    spec.mcmc.n_chains = mc.value("chains", spec.mcmc.n_chains);
    spec.mcmc.n_iter = mc.value("iterations", spec.mcmc.n_iter);
    spec.mcmc.burn_in = mc.value("burn_in", spec.mcmc.burn_in);
    spec.mcmc.thin = mc.value("thin", spec.mcmc.thin);
    spec.mcmc.latent_thin = mc.value("latent_thin", spec.mcmc.latent_thin);
    spec.mcmc.seed = mc.value("seed", spec.mcmc.seed);
    spec.mcmc.adapt_window = mc.value("adapt_window", spec.mcmc.adapt_window);
    spec.mcmc.init_theta = mc.value("init_theta", spec.mcmc.init_theta);
    spec.mcmc.init_phi = mc.value("init_phi", spec.mcmc.init_phi);
    spec.mcmc.init_lambda = mc.value("init_lambda", spec.mcmc.init_lambda);
    spec.mcmc.init_ge_a = mc.value("init_ge_a", spec.mcmc.init_ge_a);
    spec.mcmc.init_ge_b = mc.value("init_ge_b", spec.mcmc.init_ge_b);
  }
  return spec;
}

std::string model_spec_to_json(const ModelSpec& spec) {
  json j;
  j["family"] = family_to_string(spec.family);
  j["response"] = spec.formula.response;
  j["terms"] = json::array();
  for (const auto& t : spec.formula.terms) j["terms"].push_back(term_to_json(t));
  j["random_terms"] = spec.formula.random_terms;
  j["standardize"] = spec.standardize;
  j["priors"] = {{"coef_mean", spec.priors.coef_mean},
                 {"coef_variance", spec.priors.coef_variance},
                 {"rp_precision_shape", spec.priors.rp_precision_shape},
                 {"rp_precision_rate", spec.priors.rp_precision_rate},
                 {"dispersion_shape", spec.priors.dispersion_shape},
                 {"dispersion_rate", spec.priors.dispersion_rate},
                 {"ge_shape", spec.priors.ge_shape},
                 {"ge_rate", spec.priors.ge_rate}};
  j["mcmc"] = {{"chains", spec.mcmc.n_chains},
               {"iterations", spec.mcmc.n_iter},
               {"burn_in", spec.mcmc.burn_in},
               {"thin", spec.mcmc.thin},
               {"latent_thin", spec.mcmc.latent_thin},
               {"seed", spec.mcmc.seed},
               {"adapt_window", spec.mcmc.adapt_window},
               {"init_theta", spec.mcmc.init_theta},
               {"init_phi", spec.mcmc.init_phi},
               {"init_lambda", spec.mcmc.init_lambda},
               {"init_ge_a", spec.mcmc.init_ge_a},
               {"init_ge_b", spec.mcmc.init_ge_b}};
  return j.dump(2);
}

ModelSpec load_model_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open model config: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return model_spec_from_json(ss.str());
}

}  // namespace crashfreq
