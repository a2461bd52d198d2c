#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <vector>

#include "affect/dsp/stats.hpp"
#include "affect/error.hpp"

namespace affect {

/// One-sided power spectral density on a uniform frequency grid.
struct Psd {
  std::vector<double> density;  // units^2 / Hz
  double df = 0.0;              // bin spacing, Hz

  double frequency(std::size_t k) const { return static_cast<double>(k) * df; }

  /// Rectangle-rule integral over bins with lo <= f < hi.
  double band_power(double lo_hz, double hi_hz) const {
    double acc = 0.0;
    for (std::size_t k = 0; k < density.size(); ++k) {
      const double f = frequency(k);
      if (f >= lo_hz && f < hi_hz) acc += density[k];
    }
    return acc * df;
  }
};

/// Welch estimate: periodic Hann window, per-segment mean removal,
/// density scaling. Requires at least one full segment.
inline Psd welch(std::span<const double> x, double rate_hz, std::size_t nperseg, std::size_t noverlap) {
  require(nperseg >= 2 && x.size() >= nperseg, ErrorCode::TooShort,
          "Welch needs at least " + std::to_string(nperseg) + " samples, got " + std::to_string(x.size()));
  require(noverlap < nperseg, ErrorCode::OutOfRange, "overlap must be shorter than the segment");
  const std::size_t step = nperseg - noverlap;
  const std::size_t n_bins = nperseg / 2 + 1;

  std::vector<double> window(nperseg);
  double wsum2 = 0.0;
  for (std::size_t i = 0; i < nperseg; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nperseg));
    wsum2 += window[i] * window[i];
  }
  std::vector<double> cos_table(nperseg), sin_table(nperseg);
  for (std::size_t i = 0; i < nperseg; ++i) {
    const double ang = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(nperseg);
    cos_table[i] = std::cos(ang);
    sin_table[i] = std::sin(ang);
  }

  Psd psd;
  psd.df = rate_hz / static_cast<double>(nperseg);
  psd.density.assign(n_bins, 0.0);
  std::vector<double> seg(nperseg);
  std::size_t n_segments = 0;
  for (std::size_t start = 0; start + nperseg <= x.size(); start += step) {
    const double m = mean(x.subspan(start, nperseg));
    for (std::size_t i = 0; i < nperseg; ++i) seg[i] = (x[start + i] - m) * window[i];
    for (std::size_t k = 0; k < n_bins; ++k) {
      double re = 0, im = 0;
      std::size_t phase = 0;
      for (std::size_t i = 0; i < nperseg; ++i) {
        re += seg[i] * cos_table[phase];
        im -= seg[i] * sin_table[phase];
        phase += k;
        if (phase >= nperseg) phase -= nperseg;
      }
      psd.density[k] += re * re + im * im;
    }
    ++n_segments;
  }
  const double scale = 1.0 / (rate_hz * wsum2 * static_cast<double>(n_segments));
  for (std::size_t k = 0; k < n_bins; ++k) {
    psd.density[k] *= scale;
    const bool nyquist = nperseg % 2 == 0 && k == n_bins - 1;
    if (k != 0 && !nyquist) psd.density[k] *= 2.0;
  }
  return psd;
}

/// Autoregressive model x[n] = -sum a[i] x[n-i] + e[n], a[0] = 1.
struct ArModel {
  std::vector<double> a{1.0};
  double noise_variance = 0.0;

  /// One-sided PSD at `f_hz`.
  double density(double f_hz, double rate_hz) const {
    const double w = 2.0 * std::numbers::pi * f_hz / rate_hz;
    std::complex<double> acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * std::polar(1.0, -w * static_cast<double>(i));
    const double mag2 = std::norm(acc);
    if (mag2 <= 0) return 0.0;
    return 2.0 * noise_variance / (rate_hz * mag2);
  }

  /// Trapezoidal integral of the AR spectrum over [lo, hi].
  double band_power(double lo_hz, double hi_hz, double rate_hz, int steps = 400) const {
    if (noise_variance <= 0) return 0.0;
    const double h = (hi_hz - lo_hz) / steps;
    double acc = 0.5 * (density(lo_hz, rate_hz) + density(hi_hz, rate_hz));
    for (int i = 1; i < steps; ++i) acc += density(lo_hz + i * h, rate_hz);
    return acc * h;
  }
};

/// Burg's maximum-entropy estimate on the mean-removed series. Constant
/// input yields a zero-variance model.
inline ArModel burg(std::span<const double> x, int order) {
  require(order >= 1 && x.size() > static_cast<std::size_t>(order), ErrorCode::TooShort,
          "Burg order " + std::to_string(order) + " needs more than that many samples");
  const double m = mean(x);
  std::vector<double> f(x.size()), b(x.size());
  double energy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    f[i] = b[i] = x[i] - m;
    energy += f[i] * f[i];
  }
  ArModel model;
  model.noise_variance = energy / static_cast<double>(x.size());
  if (model.noise_variance <= 1e-24) {
    model.noise_variance = 0.0;
    return model;
  }
  const std::size_t n = x.size();
  for (std::size_t p = 1; p <= static_cast<std::size_t>(order); ++p) {
    double num = 0, den = 0;
    for (std::size_t i = p; i < n; ++i) {
      num += f[i] * b[i - 1];
      den += f[i] * f[i] + b[i - 1] * b[i - 1];
    }
    if (den <= 0) break;
    const double k = -2.0 * num / den;
    const std::vector<double> prev = [&] {
      auto v = model.a;
      v.push_back(0.0);
      return v;
    }();
    model.a = prev;
    for (std::size_t i = 0; i <= p; ++i) model.a[i] = prev[i] + k * prev[p - i];
    for (std::size_t i = n - 1; i >= p; --i) {
      const double fi = f[i];
      f[i] = fi + k * b[i - 1];
      b[i] = b[i - 1] + k * fi;
    }
    model.noise_variance *= (1.0 - k * k);
  }
  return model;
}

}  // namespace affect
