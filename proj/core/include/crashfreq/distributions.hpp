#pragma once

#include "crashfreq/rng.hpp"

namespace crashfreq {

// Lindley rate parameter.
struct LindleyParam {
  double theta;
};

// Negative binomial in mean / inverse-dispersion form:
// Var(y) = mean + mean^2 / inverse_dispersion.
struct NbParam {
  double mean;
  double inverse_dispersion;
};

// Generalized exponential shape a, rate b.
struct GeParam {
  double a;
  double b;
};

// f(x) = theta^2/(theta+1) * (1+x) * exp(-theta x)
double lindley_pdf(double x, LindleyParam p);

// k-th raw moment, k >= 1: k! * (theta + k + 1) / (theta^k * (theta + 1)).
// k = 1 reduces to (theta+2)/(theta*(theta+1)).
double lindley_moment(LindleyParam p, int k);
double lindley_mean(LindleyParam p);

// Draw via the latent-indicator construction:
// z ~ Bernoulli(1/(1+theta)), x ~ Gamma(1+z, theta).
double lindley_sample(LindleyParam p, Rng& rng);

double nb_pmf(long y, NbParam p);
double nb_log_pmf(long y, NbParam p);
long nb_sample(NbParam p, Rng& rng);

double ge_pdf(double x, GeParam p);
double ge_log_pdf(double x, GeParam p);
// Inverse CDF: x = -ln(1 - u^(1/a)) / b.
double ge_sample(GeParam p, Rng& rng);
// E(X) = (psi(a+1) - psi(1)) / b.
double ge_mean(GeParam p);

// Log densities used in the sampler's Metropolis targets.
double gamma_log_pdf(double x, double shape, double rate);
double normal_log_pdf(double x, double mean, double sd);
double beta_log_pdf(double x, double a, double b);

double digamma(double x);

}  // namespace crashfreq
