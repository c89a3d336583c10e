#include "crashfreq/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "crashfreq/rng.hpp"

namespace crashfreq {

namespace {

void check_lengths(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("observed/predicted length mismatch");
  if (a.empty()) throw std::invalid_argument("empty input vectors");
}

}  // namespace

double mae(const std::vector<double>& observed, const std::vector<double>& predicted) {
  check_lengths(observed, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i)
    s += std::fabs(observed[i] - predicted[i]);
  return s / double(observed.size());
}

double rmse(const std::vector<double>& observed, const std::vector<double>& predicted) {
  check_lengths(observed, predicted);
  double s = 0.0;
  for (std::size_t i = 0; i < observed.size(); ++i) {
    const double d = observed[i] - predicted[i];
    s += d * d;
  }
  return std::sqrt(s / double(observed.size()));
}

std::pair<Dataset, Dataset> train_test_split(const Dataset& data, double fraction,
                                             std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    throw std::invalid_argument("train_test_split: fraction must be in (0, 1)");
  const std::size_t n = data.size();
  const std::size_t test_size = std::size_t(std::floor((1.0 - fraction) * double(n)));
  const std::size_t train_size = n - test_size;

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Fisher-Yates with our own draws, so the partition is seed-stable.
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = std::size_t(rng.next_u64() % i);
    std::swap(idx[i - 1], idx[j]);
  }

  std::pair<Dataset, Dataset> out;
  out.first.reserve(train_size);
  out.second.reserve(test_size);
  for (std::size_t i = 0; i < n; ++i)
    (i < train_size ? out.first : out.second).push_back(data[idx[i]]);
  return out;
}

CureCurve cure(const std::vector<double>& observed,
               const std::vector<double>& predicted,
               const std::vector<double>& covariate,
               const std::vector<std::string>& site_ids,
               const std::string& covariate_name) {
  check_lengths(observed, predicted);
  if (covariate.size() != observed.size())
    throw std::invalid_argument("cure: covariate length mismatch");
  for (double c : covariate)
    if (!std::isfinite(c)) throw std::invalid_argument("cure: covariate must be finite");

  const std::size_t n = observed.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (covariate[a] != covariate[b]) return covariate[a] < covariate[b];
    if (!site_ids.empty()) return site_ids[a] < site_ids[b];
    return false;
  });

  double total_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = observed[i] - predicted[i];
    total_sq += r * r;
  }

  CureCurve curve;
  curve.covariate_name = covariate_name;
  curve.zero_variance = total_sq <= 0.0;
  curve.points.reserve(n);
  double cum = 0.0;
  double cum_sq = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    const double r = observed[i] - predicted[i];
    cum += r;
    cum_sq += r * r;
    CurePoint pt;
    pt.covariate = covariate[i];
    pt.cumulative = cum;
    double band = 0.0;
    if (!curve.zero_variance) {
      const double v = cum_sq * (1.0 - cum_sq / total_sq);
      band = 1.96 * std::sqrt(std::max(v, 0.0));
    }
    pt.upper = band;
    pt.lower = -band;
    curve.points.push_back(pt);
  }
  return curve;
}

void write_cure_csv(const CureCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "covariate,cumulative_residual,lower_95,upper_95\n";
  out.precision(12);
  for (const auto& p : curve.points)
    out << p.covariate << ',' << p.cumulative << ',' << p.lower << ',' << p.upper
        << '\n';
}

void write_cure_svg(const CureCurve& curve, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  const double w = 720, h = 420, ml = 60, mr = 20, mt = 20, mb = 40;

  double xmin = 0, xmax = 1, ymin = -1, ymax = 1;
  if (!curve.points.empty()) {
    xmin = xmax = curve.points.front().covariate;
    ymin = ymax = 0.0;
    for (const auto& p : curve.points) {
      xmin = std::min(xmin, p.covariate);
      xmax = std::max(xmax, p.covariate);
      ymin = std::min({ymin, p.cumulative, p.lower});
      ymax = std::max({ymax, p.cumulative, p.upper});
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
  }
  auto X = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
  auto Y = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

  out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << w << "' height='" << h
      << "'>\n";
  out << "<rect width='100%' height='100%' fill='white'/>\n";
  out << "<line x1='" << ml << "' y1='" << Y(0) << "' x2='" << w - mr << "' y2='"
      << Y(0) << "' stroke='#888' stroke-dasharray='4 3'/>\n";

  auto polyline = [&](auto getter, const char* color, const char* dash) {
    out << "<polyline fill='none' stroke='" << color << "'";
    if (dash) out << " stroke-dasharray='" << dash << "'";
    out << " points='";
    for (const auto& p : curve.points) out << X(p.covariate) << ',' << Y(getter(p)) << ' ';
    out << "'/>\n";
  };
  polyline([](const CurePoint& p) { return p.upper; }, "#d62728", "6 3");
  polyline([](const CurePoint& p) { return p.lower; }, "#d62728", "6 3");
  polyline([](const CurePoint& p) { return p.cumulative; }, "#1f77b4", nullptr);

  out << "<text x='" << (w / 2) << "' y='" << (h - 8)
      << "' text-anchor='middle' font-size='13'>"
      << (curve.covariate_name.empty() ? "covariate" : curve.covariate_name)
      << "</text>\n";
  out << "<text x='14' y='" << (h / 2)
      << "' transform='rotate(-90 14 " << (h / 2)
      << ")' text-anchor='middle' font-size='13'>cumulative residual</text>\n";
  out << "</svg>\n";
}

}  // namespace crashfreq
