#pragma once

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include "affect/error.hpp"

namespace affect {

// Daubechies-4 scaling filter (8 taps, four vanishing moments).
inline constexpr std::array<double, 8> kDb4 = {
    0.23037781330885523, 0.7148465705525415,  0.6308807679295904,  -0.02798376941698385,
    -0.18703481171888114, 0.030841381835986965, 0.032883011666982945, -0.010597401784997278};

enum class WaveletPad {
  Zero,       // energy of the padded signal equals the input energy
  Symmetric,  // half-sample mirror; keeps constants constant
};

/// Periodized multi-level decomposition. details[0] is the finest level (D1).
struct WaveletDecomposition {
  std::vector<std::vector<double>> details;
  std::vector<double> approx;
  std::size_t original_length = 0;
};

namespace detail {

inline void dwt_step(const std::vector<double>& x, std::vector<double>& a, std::vector<double>& d) {
  const std::size_t n = x.size();
  const std::size_t half = n / 2;
  constexpr std::size_t L = kDb4.size();
  a.assign(half, 0.0);
  d.assign(half, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    double sa = 0, sd = 0;
    for (std::size_t t = 0; t < L; ++t) {
      const double v = x[(2 * k + t) % n];
      sa += kDb4[t] * v;
      const double g = (t % 2 == 0 ? 1.0 : -1.0) * kDb4[L - 1 - t];
      sd += g * v;
    }
    a[k] = sa;
    d[k] = sd;
  }
}

inline std::vector<double> idwt_step(const std::vector<double>& a, const std::vector<double>& d) {
  const std::size_t half = a.size();
  const std::size_t n = 2 * half;
  constexpr std::size_t L = kDb4.size();
  std::vector<double> x(n, 0.0);
  for (std::size_t k = 0; k < half; ++k) {
    for (std::size_t t = 0; t < L; ++t) {
      const double g = (t % 2 == 0 ? 1.0 : -1.0) * kDb4[L - 1 - t];
      x[(2 * k + t) % n] += kDb4[t] * a[k] + g * d[k];
    }
  }
  return x;
}

}  // namespace detail

inline WaveletDecomposition dwt(std::span<const double> x, int levels, WaveletPad pad) {
  const std::size_t block = std::size_t{1} << levels;
  require(levels >= 1 && x.size() >= block, ErrorCode::TooShort,
          "wavelet transform needs at least " + std::to_string(block) + " samples, got " + std::to_string(x.size()));
  const std::size_t padded = (x.size() + block - 1) / block * block;
  std::vector<double> cur(x.begin(), x.end());
  cur.reserve(padded);
  const std::size_t n = x.size();
  for (std::size_t i = n; i < padded; ++i) {
    if (pad == WaveletPad::Zero) {
      cur.push_back(0.0);
    } else {
      // Mirror about the last sample, folding back again if the pad is long.
      std::size_t k = i - n;
      const std::size_t period = 2 * n;
      k %= period;
      cur.push_back(k < n ? x[n - 1 - k] : x[k - n]);
    }
  }

  WaveletDecomposition out;
  out.original_length = n;
  for (int level = 0; level < levels; ++level) {
    std::vector<double> a, d;
    detail::dwt_step(cur, a, d);
    out.details.push_back(std::move(d));
    cur = std::move(a);
  }
  out.approx = std::move(cur);
  return out;
}

/// Inverse transform, cropped to the original length.
inline std::vector<double> idwt(const WaveletDecomposition& w) {
  std::vector<double> cur = w.approx;
  for (auto it = w.details.rbegin(); it != w.details.rend(); ++it) cur = detail::idwt_step(cur, *it);
  cur.resize(w.original_length);
  return cur;
}

}  // namespace affect
