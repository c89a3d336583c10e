#pragma once

// Independent numeric oracles used by the test suites. These deliberately
// avoid the library implementations they check.

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

namespace oracles {

// Adaptive Simpson quadrature on [a, b].
double integrate(const std::function<double(double)>& f, double a, double b,
                 double tol = 1e-12, int max_depth = 40);

// Quadrature over [0, inf) with an exponential tail cutoff chosen so the
// integrand is below `tail_eps` beyond the cutoff.
double integrate_halfline(const std::function<double(double)>& f,
                          double x_hi, double tol = 1e-12);

// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::vector<double> a, std::vector<double> b);

// One-sample KS statistic against a continuous CDF.
double ks_one_sample(std::vector<double> x, const std::function<double(double)>& cdf);

// Critical value D* at significance alpha (asymptotic): reject if D > D*.
double ks_two_sample_critical(std::size_t n, std::size_t m, double alpha);
double ks_one_sample_critical(std::size_t n, double alpha);

// Type-7 quantile, implemented independently of the library.
double quantile7(std::vector<double> v, double p);

// AR(1) series with given lag-1 correlation, unit marginal variance.
std::vector<double> ar1_series(std::size_t n, double rho, std::uint64_t seed);

// Mixture-form Lindley sampler (two-gamma route): component k in {1, 2}
// chosen with P(shape 2) = 1/(1+theta); gamma variates built from sums of
// inverse-CDF exponentials, independent of the library's gamma algorithm.
double lindley_sample_mixture(double theta, std::mt19937_64& rng);

double mean(const std::vector<double>& v);
double variance(const std::vector<double>& v);  // n-1 convention

}  // namespace oracles
