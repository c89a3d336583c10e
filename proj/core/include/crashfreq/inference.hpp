#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crashfreq/sampler.hpp"

namespace crashfreq {

struct ParameterSummary {
  std::string name;
  double mean = 0.0;
  double sd = 0.0;
  double ci_lower = 0.0;   // 2.5% quantile
  double ci_upper = 0.0;   // 97.5% quantile
  double bgr = 0.0;
  double mc_error = 0.0;
  bool significant = false;  // 95% CI excludes 0
  bool bgr_pass = false;
  bool mc_error_pass = false;
};

struct PosteriorSummary {
  std::vector<ParameterSummary> parameters;
  bool converged = false;  // all BGR and MC-error gates pass

  const ParameterSummary& find(const std::string& name) const;
};

// Pools post-burn-in draws across chains; coefficient parameters are mapped
// to the original covariate scale per draw before summarizing.
PosteriorSummary summarize(const FitResult& fit);

// Summary of arbitrary pooled draws (used for single traces).
ParameterSummary summarize_draws(const std::string& name,
                                 const std::vector<std::vector<double>>& chains);

// Empirical quantile, type-7 interpolation.
double quantile_type7(std::vector<double> values, double p);

struct DicReport {
  double dbar = 0.0;       // posterior mean deviance
  double d_at_mean = 0.0;  // deviance at posterior parameter means
  double pd = 0.0;         // dbar - d_at_mean
  double dic = 0.0;        // dbar + pd
};

// Reporting arithmetic used when deviance components are already known.
DicReport make_dic_report(double dbar, double d_at_mean);

// Conditional-likelihood DIC: the deviance is -2 log NB(y | phi, lambda*mu)
// with the latent effects treated as parameters; the plug-in point uses
// posterior means of coefficients, latents, and phi.
DicReport dic(const FitResult& fit, const FitData& data);

struct MarginalEffect {
  std::string column;
  double effect = 0.0;
  bool discrete = false;  // binary indicator column: difference of means
};

// Average marginal effects: continuous columns use the per-site derivative
// b_j * fitted mean (chain-averaged, then site-averaged); indicator columns
// use the discrete difference of fitted means at levels 1 and 0.
std::vector<MarginalEffect> marginal_effects(const FitResult& fit,
                                             const FitData& data);

// Builds the design for new data with the fit's formula and applies the
// training-time standardization recorded in the fit.
DesignMatrix design_for(const FitResult& fit, const Dataset& data);

// Covariates-only posterior-mean prediction for each design row:
// mean over draws of exp(x'b) * E(lambda-effect | mixing draw).
std::vector<double> posterior_predicted_means(const FitResult& fit,
                                              const DesignMatrix& design);

// Per-draw population mean of the mixing effect for the fit's family.
double mixing_mean(Family family, double theta, double ge_a, double ge_b);

}  // namespace crashfreq
