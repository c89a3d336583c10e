#include "crashfreq/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "crashfreq/diagnostics.hpp"
#include "crashfreq/distributions.hpp"

namespace crashfreq {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

// Scalar parameters reported to users, in storage order minus the
// log-likelihood trace.
std::vector<std::string> reportable_parameters(const FitResult& fit) {
  std::vector<std::string> names;
  for (const auto& n : fit.chains.at(0).scalar_names)
    if (n != "loglik") names.push_back(n);
  return names;
}

}  // namespace

double quantile_type7(std::vector<double> values, double p) {
  if (values.empty()) throw std::invalid_argument("quantile of empty set");
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("quantile: p outside [0,1]");
  std::sort(values.begin(), values.end());
  const double h = (double(values.size()) - 1.0) * p;
  const std::size_t lo = std::size_t(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  const double frac = h - double(lo);
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

double mixing_mean(Family family, double theta, double ge_a, double ge_b) {
  if (family == Family::RpNbGe) return ge_mean(GeParam{ge_a, ge_b});
  return (theta + 2.0) / (theta * (theta + 1.0));
}

// Post-burn-in traces on the original covariate scale, one per chain.
// Coefficients of standardized columns are rescaled per draw; the intercept
// absorbs the mean shifts; RP standard deviations rescale like their
// coefficient.
static std::vector<std::vector<double>> original_scale_chains(
    const FitResult& fit, const std::string& name) {
  const FitInfo& info = fit.info;
  const auto& names = fit.chains.at(0).scalar_names;

  auto col_of = [&](const std::string& n) -> int {
    for (std::size_t j = 0; j < info.column_names.size(); ++j)
      if (info.column_names[j] == n) return int(j);
    return -1;
  };

  std::vector<std::vector<double>> out;
  for (const auto& chain : fit.chains) {
    std::vector<double> trace;
    const std::size_t k = chain.scalar_index(name);
    for (std::size_t r = 0; r < chain.n_stored(); ++r) {
      if (chain.scalar_iters[r] < chain.burn_in) continue;
      double v = chain.scalar_at(r, k);
      if (name == "const") {
        // b0 = b0* - sum_j (b*_j / sd_j) * mean_j
        double shift = 0.0;
        for (std::size_t j = 1; j < info.column_names.size(); ++j) {
          const ColumnStats& st = info.column_stats[j];
          if (!st.standardized) continue;
          const std::size_t kj = chain.scalar_index(info.column_names[j]);
          shift += chain.scalar_at(r, kj) / st.sd * st.mean;
        }
        v -= shift;
      } else {
        int j = col_of(name);
        if (j < 0 && name.rfind("sigma_", 0) == 0) j = col_of(name.substr(6));
        if (j > 0 && info.column_stats[j].standardized)
          v /= info.column_stats[j].sd;
      }
      trace.push_back(v);
    }
    out.push_back(std::move(trace));
  }
  return out;
}

ParameterSummary summarize_draws(const std::string& name,
                                 const std::vector<std::vector<double>>& chains) {
  ParameterSummary s;
  s.name = name;
  std::vector<double> pooled;
  for (const auto& c : chains) pooled.insert(pooled.end(), c.begin(), c.end());
  if (pooled.empty()) throw std::invalid_argument("summarize: empty draw set");

  s.mean = mean_of(pooled);
  double ss = 0.0;
  for (double x : pooled) ss += (x - s.mean) * (x - s.mean);
  s.sd = pooled.size() > 1 ? std::sqrt(ss / double(pooled.size() - 1)) : 0.0;
  s.ci_lower = quantile_type7(pooled, 0.025);
  s.ci_upper = quantile_type7(pooled, 0.975);
  s.significant = (s.ci_lower > 0.0 && s.ci_upper > 0.0) ||
                  (s.ci_lower < 0.0 && s.ci_upper < 0.0);

  if (chains.size() >= 2 && chains[0].size() >= 2) {
    s.bgr = bgr(chains);
  } else {
    s.bgr = std::numeric_limits<double>::quiet_NaN();
  }
  s.bgr_pass = s.bgr < kBgrThreshold;

  double mcse_sq = 0.0;
  bool mcse_ok = true;
  for (const auto& c : chains) {
    try {
      const double m = mc_error(c).mcse;
      mcse_sq += m * m;
    } catch (const std::invalid_argument&) {
      mcse_ok = false;
    }
  }
  if (mcse_ok && !chains.empty()) {
    s.mc_error = std::sqrt(mcse_sq) / double(chains.size());
    s.mc_error_pass = s.sd > 0.0 ? s.mc_error < kMcErrorFraction * s.sd : true;
  } else {
    s.mc_error = std::numeric_limits<double>::quiet_NaN();
    s.mc_error_pass = false;
  }
  return s;
}

PosteriorSummary summarize(const FitResult& fit) {
  if (fit.chains.empty()) throw std::invalid_argument("summarize: no chains");
  PosteriorSummary out;
  out.converged = true;
  for (const auto& name : reportable_parameters(fit)) {
    ParameterSummary s = summarize_draws(name, original_scale_chains(fit, name));
    if (std::isnan(s.bgr) || s.bgr >= kBgrThreshold) {
      s.bgr_pass = false;
      out.converged = false;
    } else {
      s.bgr_pass = true;
    }
    if (!s.mc_error_pass) out.converged = false;
    out.parameters.push_back(std::move(s));
  }
  return out;
}

const ParameterSummary& PosteriorSummary::find(const std::string& name) const {
  for (const auto& p : parameters)
    if (p.name == name) return p;
  throw std::invalid_argument("no parameter named '" + name + "' in summary");
}

DicReport make_dic_report(double dbar, double d_at_mean) {
  DicReport r;
  r.dbar = dbar;
  r.d_at_mean = d_at_mean;
  r.pd = dbar - d_at_mean;
  r.dic = r.dbar + r.pd;
  return r;
}

DicReport dic(const FitResult& fit, const FitData& data) {
  const FitInfo& info = fit.info;
  const std::size_t n = data.design.n_rows;
  const std::size_t p = data.design.n_cols;
  if (fit.chains.empty()) throw std::invalid_argument("dic: no chains");
  for (const auto& c : fit.chains)
    if (std::find(c.scalar_names.begin(), c.scalar_names.end(), "loglik") ==
        c.scalar_names.end())
      throw std::invalid_argument("dic: log-likelihood trace missing from draws");

  // Posterior mean deviance from the stored log-likelihood trace.
  double dbar = 0.0;
  std::size_t count = 0;
  for (const auto& c : fit.chains) {
    for (double ll : c.post_burn_in("loglik")) {
      dbar += -2.0 * ll;
      ++count;
    }
  }
  dbar /= double(count);

  // Plug-in deviance at the posterior means of coefficients, latents, phi.
  std::vector<double> beta_mean(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    double s = 0.0;
    std::size_t m = 0;
    for (const auto& c : fit.chains) {
      for (double v : c.post_burn_in(info.column_names[j])) {
        s += v;
        ++m;
      }
    }
    beta_mean[j] = s / double(m);
  }
  double phi_mean = 0.0;
  {
    double s = 0.0;
    std::size_t m = 0;
    for (const auto& c : fit.chains)
      for (double v : c.post_burn_in("phi")) {
        s += v;
        ++m;
      }
    phi_mean = s / double(m);
  }

  std::vector<double> lambda_mean(n, 0.0);
  std::vector<std::vector<double>> site_coef_mean;
  std::size_t latent_rows_total = 0;
  for (const auto& c : fit.chains) latent_rows_total += c.latent_iters.size();
  if (latent_rows_total == 0) throw std::invalid_argument("dic: no latent draws stored");
  for (const auto& c : fit.chains) {
    const std::size_t rows = c.latent_iters.size();
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t i = 0; i < n; ++i) lambda_mean[i] += c.lambda[r * n + i];
  }
  for (auto& v : lambda_mean) v /= double(latent_rows_total);

  const auto& coef_names = fit.chains[0].site_coef_names;
  site_coef_mean.assign(coef_names.size(), std::vector<double>(n, 0.0));
  for (std::size_t rc = 0; rc < coef_names.size(); ++rc) {
    for (const auto& c : fit.chains) {
      const std::size_t rows = c.latent_iters.size();
      for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t i = 0; i < n; ++i)
          site_coef_mean[rc][i] += c.site_coefs[rc][r * n + i];
    }
    for (auto& v : site_coef_mean[rc]) v /= double(latent_rows_total);
  }

  std::vector<int> rc_col;
  for (const auto& cn : coef_names)
    rc_col.push_back(int(data.design.column_index(cn)));

  double d_at_mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &data.design.values[i * p];
    double lp = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      bool random = false;
      for (int rc : rc_col)
        if (std::size_t(rc) == j) random = true;
      if (!random) lp += beta_mean[j] * row[j];
    }
    for (std::size_t rc = 0; rc < coef_names.size(); ++rc)
      lp += site_coef_mean[rc][i] * row[rc_col[rc]];
    const double mu = std::exp(clamp_linear_predictor(lp));
    d_at_mean += -2.0 * nb_log_pmf(data.response[i],
                                   NbParam{lambda_mean[i] * mu, phi_mean});
  }
  return make_dic_report(dbar, d_at_mean);
}

DesignMatrix design_for(const FitResult& fit, const Dataset& data) {
  DesignMatrix m = build_design(data, fit.info.spec.formula);
  if (m.column_names != fit.info.column_names)
    throw std::invalid_argument("dataset columns do not match the saved fit");
  // Apply the training-time standardization to the new covariates.
  for (std::size_t j = 0; j < m.n_cols; ++j) {
    const ColumnStats& st = fit.info.column_stats[j];
    if (!st.standardized) continue;
    for (std::size_t i = 0; i < m.n_rows; ++i)
      m.at(i, j) = (m.at(i, j) - st.mean) / st.sd;
    m.column_stats[j] = st;
  }
  return m;
}

std::vector<double> posterior_predicted_means(const FitResult& fit,
                                              const DesignMatrix& design) {
  const std::size_t n = design.n_rows;
  const std::size_t p = design.n_cols;
  if (p != fit.info.column_names.size())
    throw std::invalid_argument("posterior_predicted_means: design mismatch");
  const Family family = fit.info.spec.family;

  std::vector<double> out(n, 0.0);
  std::size_t draws = 0;
  std::vector<double> beta(p);
  for (const auto& c : fit.chains) {
    std::vector<std::size_t> idx(p);
    for (std::size_t j = 0; j < p; ++j)
      idx[j] = c.scalar_index(fit.info.column_names[j]);
    const std::size_t k_theta =
        family == Family::RpNbGe ? 0 : c.scalar_index("theta");
    const std::size_t k_a = family == Family::RpNbGe ? c.scalar_index("ge_a") : 0;
    const std::size_t k_b = family == Family::RpNbGe ? c.scalar_index("ge_b") : 0;

    for (std::size_t r = 0; r < c.n_stored(); ++r) {
      if (c.scalar_iters[r] < c.burn_in) continue;
      for (std::size_t j = 0; j < p; ++j) beta[j] = c.scalar_at(r, idx[j]);
      const double mix =
          family == Family::RpNbGe
              ? mixing_mean(family, 0.0, c.scalar_at(r, k_a), c.scalar_at(r, k_b))
              : mixing_mean(family, c.scalar_at(r, k_theta), 0.0, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        const double* row = &design.values[i * p];
        double lp = 0.0;
        for (std::size_t j = 0; j < p; ++j) lp += beta[j] * row[j];
        out[i] += std::exp(clamp_linear_predictor(lp)) * mix;
      }
      ++draws;
    }
  }
  if (draws == 0) throw std::invalid_argument("posterior_predicted_means: no draws");
  for (auto& v : out) v /= double(draws);
  return out;
}

std::vector<MarginalEffect> marginal_effects(const FitResult& fit,
                                             const FitData& data) {
  const std::size_t n = data.design.n_rows;
  const std::size_t p = data.design.n_cols;
  const Family family = fit.info.spec.family;

  std::vector<MarginalEffect> effects;
  for (std::size_t col = 1; col < p; ++col) {
    MarginalEffect me;
    me.column = fit.info.column_names[col];
    me.discrete = !fit.info.continuous[col];
    effects.push_back(me);
  }

  std::vector<double> beta(p);
  std::vector<double> acc(effects.size(), 0.0);
  std::size_t draws = 0;
  for (const auto& c : fit.chains) {
    std::vector<std::size_t> idx(p);
    for (std::size_t j = 0; j < p; ++j)
      idx[j] = c.scalar_index(fit.info.column_names[j]);
    const std::size_t k_theta =
        family == Family::RpNbGe ? 0 : c.scalar_index("theta");
    const std::size_t k_a = family == Family::RpNbGe ? c.scalar_index("ge_a") : 0;
    const std::size_t k_b = family == Family::RpNbGe ? c.scalar_index("ge_b") : 0;

    for (std::size_t r = 0; r < c.n_stored(); ++r) {
      if (c.scalar_iters[r] < c.burn_in) continue;
      for (std::size_t j = 0; j < p; ++j) beta[j] = c.scalar_at(r, idx[j]);
      const double mix =
          family == Family::RpNbGe
              ? mixing_mean(family, 0.0, c.scalar_at(r, k_a), c.scalar_at(r, k_b))
              : mixing_mean(family, c.scalar_at(r, k_theta), 0.0, 0.0);

      for (std::size_t i = 0; i < n; ++i) {
        const double* row = &data.design.values[i * p];
        double lp = 0.0;
        for (std::size_t j = 0; j < p; ++j) lp += beta[j] * row[j];
        for (std::size_t e = 0; e < effects.size(); ++e) {
          const std::size_t col = e + 1;
          if (effects[e].discrete) {
            // Difference of fitted means at indicator levels 1 and 0.
            const double lp0 = lp - beta[col] * row[col];
            const double m1 = std::exp(clamp_linear_predictor(lp0 + beta[col])) * mix;
            const double m0 = std::exp(clamp_linear_predictor(lp0)) * mix;
            acc[e] += m1 - m0;
          } else {
            // Derivative on the original covariate scale.
            const ColumnStats& st = fit.info.column_stats[col];
            const double b_orig = st.standardized ? beta[col] / st.sd : beta[col];
            acc[e] += b_orig * std::exp(clamp_linear_predictor(lp)) * mix;
          }
        }
      }
      ++draws;
    }
  }
  if (draws == 0) throw std::invalid_argument("marginal_effects: no draws");
  for (std::size_t e = 0; e < effects.size(); ++e)
    effects[e].effect = acc[e] / double(draws * n);
  return effects;
}

}  // namespace crashfreq
