#pragma once

#include <cstdint>
#include <random>

namespace crashfreq {

// Seeded random source. All variate algorithms are implemented locally on
// top of the raw mt19937_64 stream so that a given seed produces the same
// draw sequence on every platform and standard library.
//
// Not safe for concurrent use; each MCMC chain owns its own instance.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; the second variate of each pair is
  // cached, so draws come in deterministic pairs.
  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }

  double exponential(double rate);

  // Gamma(shape, rate) by Marsaglia-Tsang squeeze, boosted for shape < 1.
  double gamma(double shape, double rate);

  double beta(double a, double b);

  bool bernoulli(double p) { return uniform() < p; }

  // Exact Poisson: sequential inversion for small means, Hormann's PTRD
  // transformed rejection for large ones.
  long poisson(double mean);

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool have_cached_normal_ = false;
};

}  // namespace crashfreq
