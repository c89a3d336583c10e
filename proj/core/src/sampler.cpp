#include "crashfreq/sampler.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "crashfreq/distributions.hpp"

namespace crashfreq {

namespace {

constexpr double kTargetAcceptance = 0.35;
constexpr double kMinLogScale = -20.0;
constexpr double kMaxLogScale = 8.0;

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

double logit(double w) { return std::log(w) - std::log1p(-w); }

// Rank check via Cholesky of X'X; pivots near zero mean collinear columns.
void require_full_rank(const DesignMatrix& m) {
  const std::size_t p = m.n_cols;
  std::vector<double> gram(p * p, 0.0);
  for (std::size_t i = 0; i < m.n_rows; ++i) {
    const double* row = &m.values[i * p];
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a; b < p; ++b) gram[a * p + b] += row[a] * row[b];
  }
  double max_diag = 0.0;
  for (std::size_t a = 0; a < p; ++a) max_diag = std::max(max_diag, gram[a * p + a]);
  std::vector<double> chol(p * p, 0.0);
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = a; b < p; ++b) {
      double s = gram[a * p + b];
      for (std::size_t k = 0; k < a; ++k) s -= chol[k * p + a] * chol[k * p + b];
      if (a == b) {
        if (s <= 1e-10 * max_diag)
          throw std::invalid_argument(
              "design matrix is rank deficient (column '" + m.column_names[a] + "')");
        chol[a * p + b] = std::sqrt(s);
      } else {
        chol[a * p + b] = s / chol[a * p + a];
      }
    }
  }
}

ModelSpec with_default_lindley_prior(ModelSpec s, std::size_t n) {
  if (s.priors.lindley_beta_a <= 0.0 || s.priors.lindley_beta_b <= 0.0) {
    s.priors.lindley_beta_a = double(n) / 3.0;
    s.priors.lindley_beta_b = double(n) / 2.0;
  }
  return s;
}

}  // namespace

FitData prepare_fit_data(const Dataset& data, const ModelSpec& spec) {
  FitData fd;
  fd.design = build_design(data, spec.formula);
  if (spec.standardize) fd.design = standardize(std::move(fd.design));
  fd.response = response_vector(data, spec.formula);
  return fd;
}

std::size_t ChainDraws::scalar_index(const std::string& name) const {
  auto it = std::find(scalar_names.begin(), scalar_names.end(), name);
  if (it == scalar_names.end())
    throw std::invalid_argument("no stored parameter named '" + name + "'");
  return static_cast<std::size_t>(it - scalar_names.begin());
}

std::vector<double> ChainDraws::post_burn_in(const std::string& name) const {
  const std::size_t k = scalar_index(name);
  std::vector<double> out;
  out.reserve(n_stored());
  for (std::size_t r = 0; r < n_stored(); ++r)
    if (scalar_iters[r] >= burn_in) out.push_back(scalar_at(r, k));
  return out;
}

McmcChain::McmcChain(const ModelSpec& spec, const FitData& data, int chain_id)
    : spec_(with_default_lindley_prior(spec, data.design.n_rows)),
      data_(data),
      n_(data.design.n_rows),
      p_(data.design.n_cols),
      chain_id_(chain_id),
      rng_(spec.mcmc.seed + static_cast<std::uint64_t>(chain_id)) {
  if (data.response.size() != n_)
    throw std::invalid_argument("response length does not match design rows");
  for (int y : data.response)
    if (y < 0) throw std::invalid_argument("response must be nonnegative counts");
  require_full_rank(data.design);

  random_cols_ = random_column_indices(data.design, spec.formula);
  is_random_col_.assign(p_, false);
  for (auto rc : random_cols_) is_random_col_[rc] = true;

  const std::size_t q = random_cols_.size();
  state_.beta.assign(p_, 0.0);
  state_.site_coef.assign(q, std::vector<double>(n_, 0.0));
  state_.sigma_rp.assign(q, 0.1);
  state_.theta = spec.mcmc.init_theta;
  state_.phi = spec.mcmc.init_phi;
  state_.ge_a = spec.mcmc.init_ge_a;
  state_.ge_b = spec.mcmc.init_ge_b;
  state_.lambda.assign(n_, spec.mcmc.init_lambda);
  state_.z.assign(n_, 0);

  scale_beta_.assign(p_, AdaptiveScale{std::log(0.2)});
  scale_site_.assign(q * n_, AdaptiveScale{std::log(0.3)});
  scale_lambda_.assign(n_, AdaptiveScale{std::log(0.6)});
  scale_theta_.log_s = std::log(0.3);
  scale_phi_.log_s = std::log(0.4);
  scale_ge_a_.log_s = std::log(0.4);
  scale_ge_b_.log_s = std::log(0.4);

  adapt_end_ = spec.mcmc.adapt_window > 0
                   ? std::min<long>(spec.mcmc.adapt_window, spec.mcmc.burn_in)
                   : spec.mcmc.burn_in;

  y_max_ = 0;
  for (int y : data.response) y_max_ = std::max(y_max_, y);
  log_y_factorial_.assign(y_max_ + 1, 0.0);
  for (int y = 1; y <= y_max_; ++y)
    log_y_factorial_[y] = log_y_factorial_[y - 1] + std::log(double(y));

  refresh_caches();
}

void McmcChain::rebuild_nb_caches() {
  lgamma_phi_ = std::lgamma(state_.phi);
  lgamma_y_phi_.assign(y_max_ + 1, 0.0);
  for (int y = 0; y <= y_max_; ++y)
    lgamma_y_phi_[y] = std::lgamma(double(y) + state_.phi);
}

double McmcChain::nb_loglik_term(int y, double mean) const {
  const double phi = state_.phi;
  const double m = std::max(mean, 1e-300);
  const double log_phi_m = std::log(phi + m);
  return lgamma_y_phi_[y] - lgamma_phi_ - log_y_factorial_[y] +
         phi * (std::log(phi) - log_phi_m) +
         double(y) * (std::log(m) - log_phi_m);
}

double McmcChain::site_loglik(std::size_t i, double mu, double lambda) const {
  if (spec_.mcmc.disable_likelihood) return 0.0;
  return nb_loglik_term(data_.response[i], lambda * mu);
}

void McmcChain::refresh_caches() {
  rebuild_nb_caches();
  state_.lp.assign(n_, 0.0);
  state_.mu.assign(n_, 0.0);
  state_.loglik_i.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = &data_.design.values[i * p_];
    double lp = 0.0;
    for (std::size_t j = 0; j < p_; ++j) {
      if (is_random_col_[j]) continue;
      lp += state_.beta[j] * row[j];
    }
    for (std::size_t q = 0; q < random_cols_.size(); ++q)
      lp += state_.site_coef[q][i] * row[random_cols_[q]];
    state_.lp[i] = lp;
    state_.mu[i] = std::exp(clamp_linear_predictor(lp));
    state_.loglik_i[i] = site_loglik(i, state_.mu[i], state_.lambda[i]);
  }
}

double McmcChain::conditional_loglik() const {
  double s = 0.0;
  if (spec_.mcmc.disable_likelihood) {
    for (std::size_t i = 0; i < n_; ++i)
      s += nb_loglik_term(data_.response[i], state_.lambda[i] * state_.mu[i]);
    return s;
  }
  for (double v : state_.loglik_i) s += v;
  return s;
}

void McmcChain::adapt(AdaptiveScale& s, double accept_prob) {
  ++s.attempts;
  if (adapting()) {
    const double gamma = 1.0 / std::pow(double(s.attempts), 0.6);
    s.log_s += gamma * (accept_prob - kTargetAcceptance);
    s.log_s = std::clamp(s.log_s, kMinLogScale, kMaxLogScale);
  } else {
    ++s.post_adapt_attempts;
  }
}

void McmcChain::update_fixed_coefficient(std::size_t j) {
  AdaptiveScale& sc = scale_beta_[j];
  const double step = std::exp(sc.log_s) * rng_.normal();
  const double b_old = state_.beta[j];
  const double b_new = b_old + step;

  double delta_ll = 0.0;
  static thread_local std::vector<double> lp_new, mu_new, ll_new;
  lp_new.resize(n_);
  mu_new.resize(n_);
  ll_new.resize(n_);
  if (!spec_.mcmc.disable_likelihood) {
    for (std::size_t i = 0; i < n_; ++i) {
      const double x = data_.design.values[i * p_ + j];
      lp_new[i] = state_.lp[i] + step * x;
      mu_new[i] = std::exp(clamp_linear_predictor(lp_new[i]));
      ll_new[i] = site_loglik(i, mu_new[i], state_.lambda[i]);
      delta_ll += ll_new[i] - state_.loglik_i[i];
    }
  }
  const double prior_sd = std::sqrt(spec_.priors.coef_variance);
  const double log_r = delta_ll +
                       normal_log_pdf(b_new, spec_.priors.coef_mean, prior_sd) -
                       normal_log_pdf(b_old, spec_.priors.coef_mean, prior_sd);
  const double accept_prob = std::min(1.0, std::exp(std::min(0.0, log_r)));
  const bool accept = std::log(rng_.uniform()) < log_r;
  if (accept) {
    state_.beta[j] = b_new;
    if (!spec_.mcmc.disable_likelihood) {
      std::swap(state_.lp, lp_new);
      std::swap(state_.mu, mu_new);
      std::swap(state_.loglik_i, ll_new);
    } else {
      for (std::size_t i = 0; i < n_; ++i) {
        const double x = data_.design.values[i * p_ + j];
        state_.lp[i] += step * x;
        state_.mu[i] = std::exp(clamp_linear_predictor(state_.lp[i]));
      }
    }
    if (!adapting()) ++sc.post_adapt_accepts;
    ++sc.accepts;
  }
  adapt(sc, accept_prob);
}

void McmcChain::update_site_coefficients(std::size_t rc) {
  const std::size_t col = random_cols_[rc];
  const double sigma = state_.sigma_rp[rc];
  const double hyper = state_.beta[col];
  for (std::size_t i = 0; i < n_; ++i) {
    AdaptiveScale& sc = scale_site_[rc * n_ + i];
    const double step = std::exp(sc.log_s) * rng_.normal();
    const double c_old = state_.site_coef[rc][i];
    const double c_new = c_old + step;
    const double x = data_.design.values[i * p_ + col];
    const double lp_new = state_.lp[i] + step * x;
    const double mu_new = std::exp(clamp_linear_predictor(lp_new));
    const double ll_new = site_loglik(i, mu_new, state_.lambda[i]);
    const double log_r = (ll_new - state_.loglik_i[i]) +
                         normal_log_pdf(c_new, hyper, sigma) -
                         normal_log_pdf(c_old, hyper, sigma);
    const double accept_prob = std::min(1.0, std::exp(std::min(0.0, log_r)));
    if (std::log(rng_.uniform()) < log_r) {
      state_.site_coef[rc][i] = c_new;
      state_.lp[i] = lp_new;
      state_.mu[i] = mu_new;
      state_.loglik_i[i] = ll_new;
      ++sc.accepts;
      if (!adapting()) ++sc.post_adapt_accepts;
    }
    adapt(sc, accept_prob);
  }
}

void McmcChain::update_rp_hyperparameters(std::size_t rc) {
  const std::size_t col = random_cols_[rc];
  const double nn = double(n_);
  // Conjugate normal draw for the hypermean given the site coefficients.
  double sum_c = 0.0;
  for (double c : state_.site_coef[rc]) sum_c += c;
  const double prec_like = nn / (state_.sigma_rp[rc] * state_.sigma_rp[rc]);
  const double prec_prior = 1.0 / spec_.priors.coef_variance;
  const double post_var = 1.0 / (prec_like + prec_prior);
  const double post_mean =
      post_var * (sum_c / (state_.sigma_rp[rc] * state_.sigma_rp[rc]) +
                  spec_.priors.coef_mean * prec_prior);
  state_.beta[col] = rng_.normal(post_mean, std::sqrt(post_var));

  // Conjugate gamma draw for the random-parameter precision.
  double ss = 0.0;
  for (double c : state_.site_coef[rc]) {
    const double d = c - state_.beta[col];
    ss += d * d;
  }
  const double shape = spec_.priors.rp_precision_shape + 0.5 * nn;
  const double rate = spec_.priors.rp_precision_rate + 0.5 * ss;
  const double precision = rng_.gamma(shape, rate);
  state_.sigma_rp[rc] = 1.0 / std::sqrt(precision);
}

void McmcChain::update_coefficients() {
  for (std::size_t j = 0; j < p_; ++j) {
    if (is_random_col_[j]) continue;
    update_fixed_coefficient(j);
  }
  for (std::size_t rc = 0; rc < random_cols_.size(); ++rc) {
    update_site_coefficients(rc);
    update_rp_hyperparameters(rc);
  }
}

void McmcChain::update_latents() {
  const bool ge = spec_.family == Family::RpNbGe;
  const double theta = state_.theta;
  for (std::size_t i = 0; i < n_; ++i) {
    AdaptiveScale& sc = scale_lambda_[i];
    const double step = std::exp(sc.log_s) * rng_.normal();
    const double lam_old = state_.lambda[i];
    const double lam_new = lam_old * std::exp(step);
    double log_prior_old, log_prior_new;
    if (ge) {
      const GeParam gp{state_.ge_a, state_.ge_b};
      log_prior_old = ge_log_pdf(lam_old, gp);
      log_prior_new = ge_log_pdf(lam_new, gp);
    } else {
      // Gamma(1 + z, theta); lgamma(1+z) = 0 for z in {0, 1}.
      const double shape = 1.0 + state_.z[i];
      log_prior_old = shape * std::log(theta) + (shape - 1.0) * std::log(lam_old) -
                      theta * lam_old;
      log_prior_new = shape * std::log(theta) + (shape - 1.0) * std::log(lam_new) -
                      theta * lam_new;
    }
    const double ll_new = site_loglik(i, state_.mu[i], lam_new);
    const double log_r = (ll_new - state_.loglik_i[i]) +
                         (log_prior_new - log_prior_old) +
                         (std::log(lam_new) - std::log(lam_old));
    const double accept_prob = std::min(1.0, std::exp(std::min(0.0, log_r)));
    if (std::log(rng_.uniform()) < log_r) {
      state_.lambda[i] = lam_new;
      state_.loglik_i[i] = ll_new;
      ++sc.accepts;
      if (!adapting()) ++sc.post_adapt_accepts;
    }
    adapt(sc, accept_prob);

    if (!ge) draw_z(i);
  }
}

void McmcChain::draw_z(std::size_t i) {
  // Exact full conditional from the two-gamma mixture responsibilities;
  // the theta factors cancel, leaving lambda/(1+lambda).
  const double lam = state_.lambda[i];
  state_.z[i] = rng_.bernoulli(lam / (1.0 + lam)) ? 1 : 0;
}

double McmcChain::theta_log_target(double v) const {
  const double w = sigmoid(v);
  const double theta = (1.0 - w) / w;
  double sum_lambda = 0.0;
  long sum_z = 0;
  for (std::size_t i = 0; i < n_; ++i) {
    sum_lambda += state_.lambda[i];
    sum_z += state_.z[i];
  }
  const double nn = double(n_);
  double lt = (nn + double(sum_z)) * std::log(theta) - theta * sum_lambda;
  lt += double(sum_z) * std::log(w) + (nn - double(sum_z)) * std::log1p(-w);
  lt += beta_log_pdf(w, spec_.priors.lindley_beta_a, spec_.priors.lindley_beta_b);
  lt += std::log(w) + std::log1p(-w);  // Jacobian of the logit transform
  return lt;
}

void McmcChain::update_theta() {
  if (spec_.family == Family::RpNbGe) return;
  const double v_old = logit(1.0 / (1.0 + state_.theta));
  const double v_new = v_old + std::exp(scale_theta_.log_s) * rng_.normal();
  const double log_r = theta_log_target(v_new) - theta_log_target(v_old);
  const double accept_prob = std::min(1.0, std::exp(std::min(0.0, log_r)));
  if (std::log(rng_.uniform()) < log_r) {
    state_.theta = (1.0 - sigmoid(v_new)) / sigmoid(v_new);
    ++scale_theta_.accepts;
    if (!adapting()) ++scale_theta_.post_adapt_accepts;
  }
  adapt(scale_theta_, accept_prob);
}

double McmcChain::phi_log_target(double log_phi) const {
  const double phi = std::exp(log_phi);
  double lt = gamma_log_pdf(phi, spec_.priors.dispersion_shape,
                            spec_.priors.dispersion_rate) +
              log_phi;
  if (spec_.mcmc.disable_likelihood) return lt;
  const double lgamma_phi = std::lgamma(phi);
  std::vector<double> lg(y_max_ + 1);
  for (int y = 0; y <= y_max_; ++y) lg[y] = std::lgamma(double(y) + phi);
  const double log_phi_only = std::log(phi);
  for (std::size_t i = 0; i < n_; ++i) {
    const int y = data_.response[i];
    const double m = std::max(state_.lambda[i] * state_.mu[i], 1e-300);
    const double log_phi_m = std::log(phi + m);
    lt += lg[y] - lgamma_phi - log_y_factorial_[y] +
          phi * (log_phi_only - log_phi_m) + double(y) * (std::log(m) - log_phi_m);
  }
  return lt;
}

void McmcChain::update_phi() {
  const double l_old = std::log(state_.phi);
  const double l_new = l_old + std::exp(scale_phi_.log_s) * rng_.normal();
  const double log_r = phi_log_target(l_new) - phi_log_target(l_old);
  const double accept_prob = std::min(1.0, std::exp(std::min(0.0, log_r)));
  if (std::log(rng_.uniform()) < log_r) {
    state_.phi = std::exp(l_new);
    rebuild_nb_caches();
    if (!spec_.mcmc.disable_likelihood) {
      for (std::size_t i = 0; i < n_; ++i)
        state_.loglik_i[i] = site_loglik(i, state_.mu[i], state_.lambda[i]);
    }
    ++scale_phi_.accepts;
    if (!adapting()) ++scale_phi_.post_adapt_accepts;
  }
  adapt(scale_phi_, accept_prob);
}

void McmcChain::update_ge_params() {
  if (spec_.family != Family::RpNbGe) return;
  double sum_delta = 0.0;
  for (double d : state_.lambda) sum_delta += d;

  auto sum_log1m = [&](double b) {
    double s = 0.0;
    for (double d : state_.lambda) s += std::log1p(-std::exp(-b * d));
    return s;
  };

  const double nn = double(n_);
  double s1 = sum_log1m(state_.ge_b);

  {
    // a | b, delta
    const double l_old = std::log(state_.ge_a);
    const double l_new = l_old + std::exp(scale_ge_a_.log_s) * rng_.normal();
    const double a_old = state_.ge_a;
    const double a_new = std::exp(l_new);
    auto target = [&](double a, double la) {
      return nn * std::log(a) + (a - 1.0) * s1 +
             gamma_log_pdf(a, spec_.priors.ge_shape, spec_.priors.ge_rate) + la;
    };
    const double log_r = target(a_new, l_new) - target(a_old, l_old);
    const double accept_prob = std::min(1.0, std::exp(std::min(0.0, log_r)));
    if (std::log(rng_.uniform()) < log_r) {
      state_.ge_a = a_new;
      ++scale_ge_a_.accepts;
      if (!adapting()) ++scale_ge_a_.post_adapt_accepts;
    }
    adapt(scale_ge_a_, accept_prob);
  }
  {
    // b | a, delta
    const double l_old = std::log(state_.ge_b);
    const double l_new = l_old + std::exp(scale_ge_b_.log_s) * rng_.normal();
    const double b_old = state_.ge_b;
    const double b_new = std::exp(l_new);
    auto target = [&](double b, double lb, double s1b) {
      return nn * std::log(b) + (state_.ge_a - 1.0) * s1b - b * sum_delta +
             gamma_log_pdf(b, spec_.priors.ge_shape, spec_.priors.ge_rate) + lb;
    };
    const double s1_new = sum_log1m(b_new);
    const double log_r = target(b_new, l_new, s1_new) - target(b_old, l_old, s1);
    const double accept_prob = std::min(1.0, std::exp(std::min(0.0, log_r)));
    if (std::log(rng_.uniform()) < log_r) {
      state_.ge_b = b_new;
      ++scale_ge_b_.accepts;
      if (!adapting()) ++scale_ge_b_.post_adapt_accepts;
    }
    adapt(scale_ge_b_, accept_prob);
  }
}

void McmcChain::sweep() {
  update_coefficients();
  update_latents();
  if (spec_.family == Family::RpNbGe) {
    update_ge_params();
  } else {
    update_theta();
  }
  update_phi();
  ++iteration_;
}

const std::map<std::string, double>& McmcChain::acceptance_rates() {
  auto rate = [](const AdaptiveScale& s) {
    return s.post_adapt_attempts > 0
               ? double(s.post_adapt_accepts) / double(s.post_adapt_attempts)
               : 0.0;
  };
  acceptance_.clear();
  double beta_att = 0, beta_acc = 0;
  for (std::size_t j = 0; j < p_; ++j) {
    if (is_random_col_[j]) continue;
    beta_att += scale_beta_[j].post_adapt_attempts;
    beta_acc += scale_beta_[j].post_adapt_accepts;
  }
  if (beta_att > 0) acceptance_["coefficients"] = beta_acc / beta_att;
  double site_att = 0, site_acc = 0;
  for (const auto& s : scale_site_) {
    site_att += s.post_adapt_attempts;
    site_acc += s.post_adapt_accepts;
  }
  if (site_att > 0) acceptance_["site_coefficients"] = site_acc / site_att;
  double lam_att = 0, lam_acc = 0;
  for (const auto& s : scale_lambda_) {
    lam_att += s.post_adapt_attempts;
    lam_acc += s.post_adapt_accepts;
  }
  if (lam_att > 0) acceptance_["latents"] = lam_acc / lam_att;
  if (scale_theta_.post_adapt_attempts > 0) acceptance_["theta"] = rate(scale_theta_);
  if (scale_phi_.post_adapt_attempts > 0) acceptance_["phi"] = rate(scale_phi_);
  if (scale_ge_a_.post_adapt_attempts > 0) acceptance_["ge_a"] = rate(scale_ge_a_);
  if (scale_ge_b_.post_adapt_attempts > 0) acceptance_["ge_b"] = rate(scale_ge_b_);
  return acceptance_;
}

ChainDraws McmcChain::run() {
  const McmcConfig& cfg = spec_.mcmc;
  if (cfg.burn_in >= cfg.n_iter)
    throw std::invalid_argument("burn_in must be smaller than n_iter");
  if (cfg.thin < 1 || cfg.latent_thin < 1)
    throw std::invalid_argument("thin values must be >= 1");

  ChainDraws d;
  d.chain_id = chain_id_;
  d.seed = cfg.seed + static_cast<std::uint64_t>(chain_id_);
  d.n_iter = cfg.n_iter;
  d.burn_in = cfg.burn_in;
  d.thin = cfg.thin;
  d.latent_thin = cfg.latent_thin;
  d.n_sites = n_;

  d.scalar_names.clear();
  for (std::size_t j = 0; j < p_; ++j)
    d.scalar_names.push_back(data_.design.column_names[j]);
  for (std::size_t rc = 0; rc < random_cols_.size(); ++rc)
    d.scalar_names.push_back("sigma_" +
                             data_.design.column_names[random_cols_[rc]]);
  if (spec_.family == Family::RpNbGe) {
    d.scalar_names.push_back("ge_a");
    d.scalar_names.push_back("ge_b");
  } else {
    d.scalar_names.push_back("theta");
  }
  d.scalar_names.push_back("phi");
  d.scalar_names.push_back("loglik");

  for (auto rc : random_cols_)
    d.site_coef_names.push_back(data_.design.column_names[rc]);
  d.site_coefs.assign(random_cols_.size(), {});

  const std::size_t n_rows = (cfg.n_iter + cfg.thin - 1) / cfg.thin;
  d.scalars.reserve(n_rows * d.n_scalars());
  d.scalar_iters.reserve(n_rows);

  for (long it = 0; it < cfg.n_iter; ++it) {
    sweep();
    if (it % cfg.thin == 0) {
      d.scalar_iters.push_back(int(it));
      for (std::size_t j = 0; j < p_; ++j) d.scalars.push_back(state_.beta[j]);
      for (std::size_t rc = 0; rc < random_cols_.size(); ++rc)
        d.scalars.push_back(state_.sigma_rp[rc]);
      if (spec_.family == Family::RpNbGe) {
        d.scalars.push_back(state_.ge_a);
        d.scalars.push_back(state_.ge_b);
      } else {
        d.scalars.push_back(state_.theta);
      }
      d.scalars.push_back(state_.phi);
      d.scalars.push_back(conditional_loglik());
    }
    if (it >= cfg.burn_in && (it - cfg.burn_in) % cfg.latent_thin == 0) {
      d.latent_iters.push_back(int(it));
      d.lambda.insert(d.lambda.end(), state_.lambda.begin(), state_.lambda.end());
      if (spec_.family != Family::RpNbGe)
        d.z.insert(d.z.end(), state_.z.begin(), state_.z.end());
      for (std::size_t rc = 0; rc < random_cols_.size(); ++rc)
        d.site_coefs[rc].insert(d.site_coefs[rc].end(),
                                state_.site_coef[rc].begin(),
                                state_.site_coef[rc].end());
    }
  }
  d.acceptance = acceptance_rates();
  return d;
}

FitResult run_mcmc(const ModelSpec& spec, const FitData& data, int n_threads) {
  if (spec.mcmc.n_chains < 2)
    throw std::invalid_argument("at least 2 chains are required (BGR diagnostics)");

  ModelSpec effective = spec;
  if (effective.priors.lindley_beta_a <= 0.0 ||
      effective.priors.lindley_beta_b <= 0.0) {
    effective.priors.lindley_beta_a = double(data.design.n_rows) / 3.0;
    effective.priors.lindley_beta_b = double(data.design.n_rows) / 2.0;
  }

  const int n_chains = effective.mcmc.n_chains;
  std::vector<ChainDraws> draws(n_chains);
  std::vector<std::unique_ptr<McmcChain>> chains;
  chains.reserve(n_chains);
  for (int k = 0; k < n_chains; ++k)
    chains.push_back(std::make_unique<McmcChain>(effective, data, k));

  int hw = int(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  const int threads = n_threads > 0 ? std::min(n_threads, n_chains)
                                    : std::min(hw, n_chains);
  if (threads <= 1) {
    for (int k = 0; k < n_chains; ++k) draws[k] = chains[k]->run();
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (;;) {
          const int k = next.fetch_add(1);
          if (k >= n_chains) return;
          draws[k] = chains[k]->run();
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  FitResult fit;
  fit.info.spec = effective;
  fit.info.column_names = data.design.column_names;
  fit.info.continuous = data.design.continuous;
  fit.info.column_stats = data.design.column_stats;
  for (auto rc : random_column_indices(data.design, effective.formula))
    fit.info.random_columns.push_back(data.design.column_names[rc]);
  fit.info.site_ids = data.design.site_ids;
  fit.info.n_observations = data.design.n_rows;
  fit.chains = std::move(draws);
  return fit;
}

}  // namespace crashfreq
