#pragma once

#include <vector>

namespace crashfreq {

// Brooks-Gelman-Rubin potential scale reduction factor over >= 2 chains of
// equal length (post-burn-in segments). Values below 1.1 indicate
// convergence.
double bgr(const std::vector<std::vector<double>>& chains);

inline constexpr double kBgrThreshold = 1.1;

struct McError {
  double mcse = 0.0;
  double sd = 0.0;
  // mcse below 3% of the posterior SD (vacuously true for constant chains).
  bool pass_3pct = true;
};

// Batch-means Monte Carlo standard error of the mean; batch size ~ sqrt(n).
// Throws when fewer than 20 batches are available.
McError mc_error(const std::vector<double>& draws);

inline constexpr double kMcErrorFraction = 0.03;

}  // namespace crashfreq
