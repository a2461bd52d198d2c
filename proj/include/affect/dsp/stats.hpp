#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace affect {

inline double mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Population variance (divides by n).
inline double variance(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size());
}

inline double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

/// Sample standard deviation (divides by n - 1); 0 for fewer than two values.
inline double sample_stddev(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  return std::sqrt(variance(x) * static_cast<double>(x.size()) / static_cast<double>(x.size() - 1));
}

/// Excess kurtosis (0 for a Gaussian); 0 for constant input.
inline double excess_kurtosis(std::span<const double> x) {
  const double m = mean(x);
  double m2 = 0, m4 = 0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  const double n = static_cast<double>(x.size());
  m2 /= n;
  m4 /= n;
  if (m2 <= 0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

inline double median(std::vector<double> x) {
  if (x.empty()) return 0.0;
  const auto mid = x.begin() + static_cast<std::ptrdiff_t>(x.size() / 2);
  std::nth_element(x.begin(), mid, x.end());
  double hi = *mid;
  if (x.size() % 2 == 1) return hi;
  const double lo = *std::max_element(x.begin(), mid);
  return 0.5 * (lo + hi);
}

/// Median absolute deviation about the median (unscaled).
inline double mad(std::span<const double> x) {
  std::vector<double> v(x.begin(), x.end());
  const double med = median(v);
  for (double& e : v) e = std::abs(e - med);
  return median(std::move(v));
}

/// Single-pass co-moment accumulator for Pearson correlation.
class PearsonAccumulator {
 public:
  void add(double x, double y) {
    ++n_;
    const double dx = x - mean_x_;
    mean_x_ += dx / static_cast<double>(n_);
    const double dy = y - mean_y_;
    mean_y_ += dy / static_cast<double>(n_);
    m2x_ += dx * (x - mean_x_);
    m2y_ += dy * (y - mean_y_);
    cxy_ += dx * (y - mean_y_);
  }
  std::size_t count() const { return n_; }
  /// NaN when either side has zero variance.
  double r() const {
    if (n_ < 2 || m2x_ <= 0 || m2y_ <= 0) return std::nan("");
    return std::clamp(cxy_ / std::sqrt(m2x_ * m2y_), -1.0, 1.0);
  }

 private:
  std::size_t n_ = 0;
  double mean_x_ = 0, mean_y_ = 0, m2x_ = 0, m2y_ = 0, cxy_ = 0;
};

inline double pearson(std::span<const double> x, std::span<const double> y) {
  PearsonAccumulator acc;
  for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) acc.add(x[i], y[i]);
  return acc.r();
}

/// 1-based ranks with ties sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[idx[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace affect
