#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crashfreq/model_spec.hpp"
#include "crashfreq/rng.hpp"

namespace crashfreq {

// Design matrix plus response, as handed to the sampler. The design is
// expected to be on the sampling (standardized) scale already when
// spec.standardize is set.
struct FitData {
  DesignMatrix design;
  std::vector<int> response;
};

FitData prepare_fit_data(const Dataset& data, const ModelSpec& spec);

// Stored draws for one chain. Scalar parameters are stored for every
// iteration (stride thin), burn-in included; per-site latents are stored
// post burn-in at stride latent_thin.
struct ChainDraws {
  int chain_id = 0;
  std::uint64_t seed = 0;
  int n_iter = 0;
  int burn_in = 0;
  int thin = 1;
  int latent_thin = 1;

  std::vector<std::string> scalar_names;
  std::vector<int> scalar_iters;   // absolute iteration indices
  std::vector<double> scalars;     // iteration-major, rows x scalar_names

  std::size_t n_sites = 0;
  std::vector<int> latent_iters;
  std::vector<double> lambda;      // rows x n_sites; GE family stores delta
  std::vector<double> z;           // rows x n_sites; empty for GE
  std::vector<std::string> site_coef_names;
  std::vector<std::vector<double>> site_coefs;  // per random column

  std::map<std::string, double> acceptance;  // block -> post-adaptation rate

  std::size_t n_scalars() const { return scalar_names.size(); }
  std::size_t n_stored() const {
    return scalar_names.empty() ? 0 : scalars.size() / scalar_names.size();
  }
  std::size_t scalar_index(const std::string& name) const;
  double scalar_at(std::size_t row, std::size_t param) const {
    return scalars[row * n_scalars() + param];
  }
  // Post-burn-in trace of one scalar parameter.
  std::vector<double> post_burn_in(const std::string& name) const;
};

// Everything needed to interpret saved draws without the original spec
// object: the model, the design-column metadata, and the site ids.
struct FitInfo {
  ModelSpec spec;
  std::vector<std::string> column_names;
  std::vector<bool> continuous;
  std::vector<ColumnStats> column_stats;
  std::vector<std::string> random_columns;
  std::vector<std::string> site_ids;
  std::size_t n_observations = 0;
};

struct FitResult {
  FitInfo info;
  std::vector<ChainDraws> chains;
};

// Mutable chain state, exposed so tests can drive individual kernels
// against frozen configurations.
struct ChainState {
  std::vector<double> beta;                    // one per design column
  std::vector<std::vector<double>> site_coef;  // per random column, size n
  std::vector<double> sigma_rp;                // per random column
  double theta = 1.5;
  double phi = 1.0;
  double ge_a = 1.0;
  double ge_b = 1.0;
  std::vector<double> lambda;  // per site; the GE family's delta
  std::vector<int> z;          // per site (NB-L families)

  // Caches; rebuild with McmcChain::refresh_caches() after direct edits.
  std::vector<double> lp;        // unclamped linear predictor
  std::vector<double> mu;        // exp(clamped lp)
  std::vector<double> loglik_i;  // conditional NB log-likelihood terms
};

// One MCMC chain running Metropolis-within-Gibbs with Robbins-Monro
// proposal adaptation (target acceptance 0.35, frozen at burn-in end).
class McmcChain {
 public:
  McmcChain(const ModelSpec& spec, const FitData& data, int chain_id);

  void update_coefficients();
  void update_latents();
  void update_theta();
  void update_phi();
  void update_ge_params();

  // Exact Bernoulli full conditional of z_i given the current lambda_i
  // (NB-L families): P(z = 1 | lambda) = lambda / (1 + lambda).
  void draw_z(std::size_t i);

  // One full sweep in the order: coefficients, latents, mixing parameters.
  void sweep();

  ChainDraws run();

  ChainState& state() { return state_; }
  const ChainState& state() const { return state_; }
  void refresh_caches();

  double conditional_loglik() const;  // sum of loglik_i
  double deviance() const { return -2.0 * conditional_loglik(); }

  const std::map<std::string, double>& acceptance_rates();
  Rng& rng() { return rng_; }

 private:
  struct AdaptiveScale {
    double log_s = 0.0;
    long attempts = 0;
    long accepts = 0;
    long post_adapt_attempts = 0;
    long post_adapt_accepts = 0;
  };

  double nb_loglik_term(int y, double mean) const;
  void rebuild_nb_caches();
  double site_loglik(std::size_t i, double mu, double lambda) const;
  void mh_step(AdaptiveScale& s, double current, double log_target_current,
               bool& accepted, double& proposal, double& log_target_proposal);
  void adapt(AdaptiveScale& s, double accept_prob);
  bool adapting() const { return iteration_ < adapt_end_; }

  void update_fixed_coefficient(std::size_t j);
  void update_site_coefficients(std::size_t rc);
  void update_rp_hyperparameters(std::size_t rc);
  double theta_log_target(double w) const;
  double phi_log_target(double log_phi) const;

  const ModelSpec spec_;
  const FitData& data_;
  std::size_t n_;
  std::size_t p_;
  std::vector<std::size_t> random_cols_;  // design column index per random term
  std::vector<bool> is_random_col_;
  int chain_id_ = 0;
  Rng rng_;
  ChainState state_;
  long iteration_ = 0;
  long adapt_end_ = 0;

  // Proposal scales.
  std::vector<AdaptiveScale> scale_beta_;
  std::vector<AdaptiveScale> scale_site_;   // flattened rc * n + i
  std::vector<AdaptiveScale> scale_lambda_;
  AdaptiveScale scale_theta_;
  AdaptiveScale scale_phi_;
  AdaptiveScale scale_ge_a_;
  AdaptiveScale scale_ge_b_;

  // NB likelihood caches for the current phi.
  std::vector<double> lgamma_y_phi_;  // lgamma(y + phi) for y = 0..ymax
  double lgamma_phi_ = 0.0;
  std::vector<double> log_y_factorial_;
  int y_max_ = 0;

  std::map<std::string, double> acceptance_;
};

// Runs spec.mcmc.n_chains chains (chain k seeded spec.mcmc.seed + k),
// optionally in parallel. Chains are deterministic regardless of threading.
FitResult run_mcmc(const ModelSpec& spec, const FitData& data, int n_threads = 0);

}  // namespace crashfreq
