#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "affect/dsp/spectrum.hpp"
#include "affect/dsp/stats.hpp"
#include "affect/dsp/wavelet.hpp"
#include "affect/error.hpp"

namespace affect {

struct Band {
  std::string_view name;
  double lo_hz;
  double hi_hz;
};

inline constexpr std::array<Band, 5> kEegBands = {{
    {"delta", 1.0, 4.0},
    {"theta", 4.0, 8.0},
    {"alpha", 8.0, 14.0},
    {"beta", 14.0, 31.0},
    {"gamma", 31.0, 50.0},
}};

struct BandPowers {
  std::array<double, 5> absolute{};
  std::array<double, 5> relative{};  // share of the 1-50 Hz total
};

/// Welch (1 s Hann segments, 50% overlap) band powers over [lo, hi).
inline BandPowers eeg_band_powers(std::span<const double> x, double rate_hz) {
  const auto nperseg = static_cast<std::size_t>(std::llround(rate_hz));
  require(x.size() >= nperseg, ErrorCode::TooShort,
          "band powers need at least 1 s of samples (" + std::to_string(nperseg) + "), got " +
              std::to_string(x.size()));
  const Psd psd = welch(x, rate_hz, nperseg, nperseg / 2);
  BandPowers out;
  for (std::size_t b = 0; b < kEegBands.size(); ++b)
    out.absolute[b] = psd.band_power(kEegBands[b].lo_hz, kEegBands[b].hi_hz);
  const double total = psd.band_power(kEegBands.front().lo_hz, kEegBands.back().hi_hz);
  for (std::size_t b = 0; b < kEegBands.size(); ++b) out.relative[b] = total > 0 ? out.absolute[b] / total : 0.0;
  return out;
}

/// Non-stationary index: std of the means of 10 equal segments of the
/// z-normalized signal. Zero-variance input gives 0.
inline double eeg_nsi(std::span<const double> x, int segments = 10) {
  require(x.size() >= static_cast<std::size_t>(segments), ErrorCode::TooShort,
          "NSI needs at least " + std::to_string(segments) + " samples");
  const double m = mean(x);
  const double sd = stddev(x);
  if (sd <= 0) return 0.0;
  const std::size_t n = x.size();
  std::vector<double> seg_means;
  for (int s = 0; s < segments; ++s) {
    const std::size_t b = n * static_cast<std::size_t>(s) / static_cast<std::size_t>(segments);
    const std::size_t e = n * static_cast<std::size_t>(s + 1) / static_cast<std::size_t>(segments);
    double acc = 0;
    for (std::size_t i = b; i < e; ++i) acc += (x[i] - m) / sd;
    seg_means.push_back(acc / static_cast<double>(e - b));
  }
  return stddev(seg_means);
}

/// Higuchi fractal dimension, clamped to [1, 2].
inline double eeg_fractal_dimension(std::span<const double> x, int k_max = 8) {
  require(k_max >= 2 && x.size() >= 2 * static_cast<std::size_t>(k_max), ErrorCode::TooShort,
          "Higuchi FD needs at least 2*k_max samples");
  const std::size_t n = x.size();
  std::vector<double> lx, ly;
  for (int k = 1; k <= k_max; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    double lk = 0;
    int used = 0;
    for (std::size_t m = 0; m < ku; ++m) {
      const std::size_t steps = (n - 1 - m) / ku;
      if (steps == 0) continue;
      double len = 0;
      for (std::size_t i = 1; i <= steps; ++i) len += std::abs(x[m + i * ku] - x[m + (i - 1) * ku]);
      lk += len * static_cast<double>(n - 1) / (static_cast<double>(steps) * k) / k;
      ++used;
    }
    if (used == 0) continue;
    lk /= used;
    if (lk <= 0) return 1.0;  // flat signal
    lx.push_back(std::log(static_cast<double>(k)));
    ly.push_back(std::log(lk));
  }
  const double mx = mean(lx), my = mean(ly);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  return std::clamp(-sxy / sxx, 1.0, 2.0);
}

/// Higher-order crossings: for order k the mean-removed signal is
/// differenced k-1 times and changes of the sign indicator (x >= 0) counted.
inline std::vector<double> eeg_hoc(std::span<const double> x, int max_order = 10) {
  require(max_order >= 1 && x.size() >= static_cast<std::size_t>(max_order) + 2, ErrorCode::TooShort,
          "HOC needs at least max_order + 2 samples");
  const double m = mean(x);
  std::vector<double> cur(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) cur[i] = x[i] - m;
  std::vector<double> counts;
  for (int k = 1; k <= max_order; ++k) {
    if (k > 1) {
      for (std::size_t i = 0; i + 1 < cur.size(); ++i) cur[i] = cur[i + 1] - cur[i];
      cur.pop_back();
    }
    int c = 0;
    for (std::size_t i = 1; i < cur.size(); ++i)
      if ((cur[i] >= 0) != (cur[i - 1] >= 0)) ++c;
    counts.push_back(c);
  }
  return counts;
}

inline constexpr double kLogEnergyFloor = 1e-12;
inline constexpr int kDwtLevels = 5;

/// Sub-band energies in the order A5, D5, D4, D3, D2, D1 (zero padding, so
/// they sum to the signal energy).
inline std::vector<double> dwt_subband_energies(std::span<const double> x, int levels = kDwtLevels) {
  const WaveletDecomposition w = dwt(x, levels, WaveletPad::Zero);
  std::vector<double> e;
  auto energy = [](const std::vector<double>& c) {
    double s = 0;
    for (double v : c) s += v * v;
    return s;
  };
  e.push_back(energy(w.approx));
  for (auto it = w.details.rbegin(); it != w.details.rend(); ++it) e.push_back(energy(*it));
  return e;
}

/// Per sub-band (A5, D5..D1): log energy, mean |c|, std of c.
inline std::vector<double> eeg_dwt_features(std::span<const double> x, int levels = kDwtLevels) {
  const WaveletDecomposition w = dwt(x, levels, WaveletPad::Zero);
  std::vector<const std::vector<double>*> bands{&w.approx};
  for (auto it = w.details.rbegin(); it != w.details.rend(); ++it) bands.push_back(&*it);
  std::vector<double> out;
  for (const auto* b : bands) {
    double e = 0, a = 0;
    for (double v : *b) {
      e += v * v;
      a += std::abs(v);
    }
    out.push_back(std::log(std::max(e, kLogEnergyFloor)));
    out.push_back(a / static_cast<double>(b->size()));
    out.push_back(stddev(*b));
  }
  return out;
}

inline std::vector<std::string> dwt_subband_names(int levels = kDwtLevels) {
  std::vector<std::string> n{"A" + std::to_string(levels)};
  for (int l = levels; l >= 1; --l) n.push_back("D" + std::to_string(l));
  return n;
}

}  // namespace affect
