#include "crashfreq/distributions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace crashfreq {

namespace {

void check_lindley(LindleyParam p) {
  if (!(p.theta > 0.0)) throw std::domain_error("lindley: theta must be > 0");
}

void check_nb(NbParam p) {
  if (!(p.mean > 0.0) || !(p.inverse_dispersion > 0.0))
    throw std::domain_error("nb: mean and inverse dispersion must be > 0");
}

void check_ge(GeParam p) {
  if (!(p.a > 0.0) || !(p.b > 0.0))
    throw std::domain_error("ge: a and b must be > 0");
}

}  // namespace

double lindley_pdf(double x, LindleyParam p) {
  check_lindley(p);
  if (x < 0.0) throw std::domain_error("lindley_pdf: x must be >= 0");
  const double t = p.theta;
  return t * t / (t + 1.0) * (1.0 + x) * std::exp(-t * x);
}

double lindley_moment(LindleyParam p, int k) {
  check_lindley(p);
  if (k < 1) throw std::domain_error("lindley_moment: k must be >= 1");
  const double t = p.theta;
  double kfact = 1.0;
  for (int i = 2; i <= k; ++i) kfact *= i;
  return kfact * (t + k + 1.0) / (std::pow(t, k) * (t + 1.0));
}

double lindley_mean(LindleyParam p) { return lindley_moment(p, 1); }

double lindley_sample(LindleyParam p, Rng& rng) {
  check_lindley(p);
  const int z = rng.bernoulli(1.0 / (1.0 + p.theta)) ? 1 : 0;
  return rng.gamma(1.0 + z, p.theta);
}

double nb_log_pmf(long y, NbParam p) {
  check_nb(p);
  if (y < 0) throw std::domain_error("nb: y must be >= 0");
  const double phi = p.inverse_dispersion;
  const double m = p.mean;
  const double yy = static_cast<double>(y);
  return std::lgamma(yy + phi) - std::lgamma(phi) - std::lgamma(yy + 1.0) +
         phi * (std::log(phi) - std::log(phi + m)) +
         yy * (std::log(m) - std::log(phi + m));
}

double nb_pmf(long y, NbParam p) { return std::exp(nb_log_pmf(y, p)); }

long nb_sample(NbParam p, Rng& rng) {
  check_nb(p);
  // Gamma-Poisson mixture: g ~ Gamma(phi, phi/mean), y ~ Poisson(g).
  const double g = rng.gamma(p.inverse_dispersion, p.inverse_dispersion / p.mean);
  return rng.poisson(g);
}

double ge_log_pdf(double x, GeParam p) {
  check_ge(p);
  if (x < 0.0) throw std::domain_error("ge: x must be >= 0");
  const double ebx = std::exp(-p.b * x);
  // log1p(-ebx) handles the x -> 0 limit; for a = 1 the factor vanishes.
  if (ebx >= 1.0) {
    return p.a > 1.0 ? -std::numeric_limits<double>::infinity()
                     : std::log(p.a) + std::log(p.b);
  }
  return std::log(p.a) + std::log(p.b) + (p.a - 1.0) * std::log1p(-ebx) -
         p.b * x;
}

double ge_pdf(double x, GeParam p) {
  check_ge(p);
  if (x < 0.0) throw std::domain_error("ge: x must be >= 0");
  const double ebx = std::exp(-p.b * x);
  const double base = 1.0 - ebx;
  if (base <= 0.0) return p.a > 1.0 ? 0.0 : (p.a < 1.0 ? std::numeric_limits<double>::infinity() : p.a * p.b);
  return p.a * p.b * std::pow(base, p.a - 1.0) * ebx;
}

double ge_sample(GeParam p, Rng& rng) {
  check_ge(p);
  const double u = rng.uniform();
  return -std::log1p(-std::pow(u, 1.0 / p.a)) / p.b;
}

double ge_mean(GeParam p) {
  check_ge(p);
  return (digamma(p.a + 1.0) - digamma(1.0)) / p.b;
}

double gamma_log_pdf(double x, double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::domain_error("gamma_log_pdf: shape and rate must be > 0");
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  return shape * std::log(rate) - std::lgamma(shape) +
         (shape - 1.0) * std::log(x) - rate * x;
}

double normal_log_pdf(double x, double mean, double sd) {
  if (!(sd > 0.0)) throw std::domain_error("normal_log_pdf: sd must be > 0");
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - 0.5 * std::log(2.0 * M_PI);
}

double beta_log_pdf(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0))
    throw std::domain_error("beta_log_pdf: a and b must be > 0");
  if (x <= 0.0 || x >= 1.0) return -std::numeric_limits<double>::infinity();
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) +
         std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

double digamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("digamma: x must be > 0");
  // Recurrence up to x >= 6, then the asymptotic series.
  double result = 0.0;
  while (x < 6.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12.0 - inv2 * (1.0 / 120.0 - inv2 * (1.0 / 252.0 -
                    inv2 * (1.0 / 240.0 - inv2 / 132.0))));
  return result;
}

}  // namespace crashfreq
