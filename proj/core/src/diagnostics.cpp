#include "crashfreq/diagnostics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace crashfreq {

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double sample_variance(const std::vector<double>& v, double mean) {
  if (v.size() < 2) return 0.0;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / double(v.size() - 1);
}

}  // namespace

double bgr(const std::vector<std::vector<double>>& chains) {
  const std::size_t m = chains.size();
  if (m < 2) throw std::invalid_argument("bgr: need at least 2 chains");
  const std::size_t n = chains[0].size();
  if (n < 2) throw std::invalid_argument("bgr: need at least 2 draws per chain");
  for (const auto& c : chains)
    if (c.size() != n)
      throw std::invalid_argument("bgr: chains must have equal length");

  std::vector<double> means(m);
  double w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    means[j] = mean_of(chains[j]);
    w += sample_variance(chains[j], means[j]);
  }
  w /= double(m);

  const double grand = mean_of(means);
  double b_over_n = 0.0;
  for (double mj : means) b_over_n += (mj - grand) * (mj - grand);
  b_over_n /= double(m - 1);  // = B/n

  if (w <= 0.0) return b_over_n <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();

  const double nn = double(n);
  const double var_plus = (nn - 1.0) / nn * w + b_over_n;
  return std::sqrt(var_plus / w);
}

McError mc_error(const std::vector<double>& draws) {
  const std::size_t n = draws.size();
  const std::size_t batch = std::max<std::size_t>(1, std::size_t(std::sqrt(double(n))));
  const std::size_t n_batches = n / batch;
  if (n_batches < 20)
    throw std::invalid_argument("mc_error: need at least 20 batches (" +
                                std::to_string(n_batches) + " available)");

  const std::size_t used = n_batches * batch;
  double grand = 0.0;
  for (std::size_t i = 0; i < used; ++i) grand += draws[i];
  grand /= double(used);

  double bvar = 0.0;
  for (std::size_t k = 0; k < n_batches; ++k) {
    double bm = 0.0;
    for (std::size_t i = k * batch; i < (k + 1) * batch; ++i) bm += draws[i];
    bm /= double(batch);
    bvar += (bm - grand) * (bm - grand);
  }
  bvar *= double(batch) / double(n_batches - 1);

  McError out;
  out.mcse = std::sqrt(bvar / double(used));

  const double full_mean = mean_of(draws);
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = draws[i] - full_mean;
    ss += d * d;
  }
  out.sd = n > 1 ? std::sqrt(ss / double(n - 1)) : 0.0;
  // Constant chains accumulate rounding noise only.
  if (out.sd <= 1e-12 * (1.0 + std::fabs(full_mean))) {
    out.sd = 0.0;
    out.mcse = 0.0;
  }
  out.pass_3pct = out.sd > 0.0 ? out.mcse < kMcErrorFraction * out.sd : true;
  return out;
}

}  // namespace crashfreq
