#pragma once

#include <map>
#include <string>
#include <vector>

#include "crashfreq/inference.hpp"
#include "crashfreq/sampler.hpp"

namespace crashfreq {

enum class Zone { Hotspot, Normal, Cold };

std::string zone_to_string(Zone z);

struct PsiResult {
  std::string site_id;
  double expected = 0.0;   // posterior mean of mu_i * lambda_i
  double predicted = 0.0;  // posterior mean of mu_i * E(lambda | mixing draw)
  double psi = 0.0;        // expected - predicted
  Zone zone = Zone::Normal;
};

// Full-Bayes PSI for every site in the fit. Site expectations pair each
// stored latent draw with the coefficient draws of the same iteration.
std::vector<PsiResult> compute_psi(const FitResult& fit, const FitData& data);

// Single-site lookup; throws when the site is absent from the fit.
PsiResult psi(const FitResult& fit, const FitData& data, const std::string& site_id);

// Hotspot: psi > 0 and psi >= the 90th percentile (type-7) of the positive
// psi values. Remaining positives are normal, negatives cold, zeros normal.
void classify(std::vector<PsiResult>& results);

struct CorridorSummary {
  std::string corridor_id;
  double psi_sum = 0.0;
  double positive_psi_sum = 0.0;
  int n_sites = 0;
  int rank = 0;  // 1 = highest summed positive PSI; ties broken by id
};

std::vector<CorridorSummary> corridor_aggregate(
    const std::vector<PsiResult>& results,
    const std::map<std::string, std::string>& site_to_corridor,
    std::vector<std::string>* unassigned = nullptr);

// One 2x2 stratum: crash/no-crash (rows) by signalized/unsignalized
// (columns): a = crash&signalized, b = crash&unsignalized,
// c = no-crash&signalized, d = no-crash&unsignalized.
struct StratumTable {
  long a = 0;
  long b = 0;
  long c = 0;
  long d = 0;
  long n() const { return a + b + c + d; }
};

struct MhResult {
  bool defined = false;  // false when the pooled denominator is zero
  double odds_ratio = 0.0;
  double relative_risk = 0.0;  // stratum-pooled risk-ratio analog
};

// Pooled Mantel-Haenszel odds ratio:
//   OR = sum_s(a_s d_s / n_s) / sum_s(b_s c_s / n_s)
// and the companion pooled relative risk of crash for signalized sites:
//   RR = sum_s(a_s (b_s+d_s) / n_s) / sum_s(b_s (a_s+c_s) / n_s).
MhResult mh_odds_ratio(const std::vector<StratumTable>& tables);

std::vector<StratumTable> load_strata(const std::string& path);

}  // namespace crashfreq
