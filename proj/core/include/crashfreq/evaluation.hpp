#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "crashfreq/data_io.hpp"

namespace crashfreq {

double mae(const std::vector<double>& observed, const std::vector<double>& predicted);
double rmse(const std::vector<double>& observed, const std::vector<double>& predicted);

// Deterministic seeded partition; train size = n - floor((1-fraction)*n).
std::pair<Dataset, Dataset> train_test_split(const Dataset& data,
                                             double fraction,
                                             std::uint64_t seed);

struct CurePoint {
  double covariate = 0.0;
  double cumulative = 0.0;
  double upper = 0.0;
  double lower = 0.0;
};

struct CureCurve {
  std::string covariate_name;
  std::vector<CurePoint> points;
  bool zero_variance = false;  // bands degenerate to zero width
};

// Cumulative residuals ordered by the covariate (stable tie-break by site
// id), with 95% bands from the end-corrected cumulative residual variance:
// +/- 1.96 * sqrt(S_k * (1 - S_k / S_n)), S_k = sum of squared residuals.
CureCurve cure(const std::vector<double>& observed,
               const std::vector<double>& predicted,
               const std::vector<double>& covariate,
               const std::vector<std::string>& site_ids,
               const std::string& covariate_name = "");

void write_cure_csv(const CureCurve& curve, const std::string& path);
void write_cure_svg(const CureCurve& curve, const std::string& path);

}  // namespace crashfreq
