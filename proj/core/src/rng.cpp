#include "crashfreq/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace crashfreq {

double Rng::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  cached_normal_ = r * std::sin(a);
  have_cached_normal_ = true;
  return r * std::cos(a);
}

double Rng::exponential(double rate) {
  if (rate <= 0.0) throw std::domain_error("exponential: rate must be > 0");
  return -std::log(uniform()) / rate;
}

double Rng::gamma(double shape, double rate) {
  if (shape <= 0.0 || rate <= 0.0)
    throw std::domain_error("gamma: shape and rate must be > 0");
  if (shape < 1.0) {
    // Boost: X ~ Gamma(shape+1), X * U^(1/shape) ~ Gamma(shape).
    const double g = gamma(shape + 1.0, 1.0);
    const double u = uniform();
    return g * std::pow(u, 1.0 / shape) / rate;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

double Rng::beta(double a, double b) {
  if (a <= 0.0 || b <= 0.0) throw std::domain_error("beta: a, b must be > 0");
  const double ga = gamma(a, 1.0);
  const double gb = gamma(b, 1.0);
  return ga / (ga + gb);
}

namespace {

// PTRD acceptance helper: log(k!) via Stirling-De Moivre for large k.
double log_factorial(long k) {
  static const double table[] = {0.0,
                                 0.0,
                                 0.6931471805599453,
                                 1.791759469228055,
                                 3.1780538303479458,
                                 4.787491742782046,
                                 6.579251212010101,
                                 8.525161361065415,
                                 10.60460290274525,
                                 12.801827480081469};
  if (k < 10) return table[k];
  const double kk = static_cast<double>(k);
  return 0.5 * std::log(2.0 * M_PI * kk) + kk * (std::log(kk) - 1.0) +
         1.0 / (12.0 * kk) - 1.0 / (360.0 * kk * kk * kk);
}

}  // namespace

long Rng::poisson(double mean) {
  if (mean < 0.0 || !std::isfinite(mean))
    throw std::domain_error("poisson: mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  if (mean < 30.0) {
    // Sequential inversion.
    const double p0 = std::exp(-mean);
    double p = p0;
    double cdf = p;
    const double u = uniform();
    long k = 0;
    while (u > cdf) {
      ++k;
      p *= mean / static_cast<double>(k);
      cdf += p;
      if (k > 2000) break;  // u in the far tail rounding; cdf has saturated
    }
    return k;
  }
  // Hormann's PTRS transformed rejection, valid for mean >= 10.
  const double slam = std::sqrt(mean);
  const double loglam = std::log(mean);
  const double b = 0.931 + 2.53 * slam;
  const double a = -0.059 + 0.02483 * b;
  const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
  const double v_r = 0.9277 - 3.6224 / (b - 2.0);
  for (;;) {
    const double u = uniform() - 0.5;
    const double v = uniform();
    const double us = 0.5 - std::fabs(u);
    const double k = std::floor((2.0 * a / us + b) * u + mean + 0.43);
    if (us >= 0.07 && v <= v_r) return static_cast<long>(k);
    if (k < 0.0 || (us < 0.013 && v > us)) continue;
    if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
        -mean + k * loglam - log_factorial(static_cast<long>(k))) {
      return static_cast<long>(k);
    }
  }
}

}  // namespace crashfreq
