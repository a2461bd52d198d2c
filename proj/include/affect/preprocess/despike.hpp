#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "affect/dsp/stats.hpp"
#include "affect/dsp/wavelet.hpp"

namespace affect {

struct DespikeConfig {
  int levels = 5;
  double mad_multiplier = 4.0;
};

struct DespikeResult {
  std::vector<double> signal;
  int clipped = 0;  // detail coefficients pulled back to the threshold
};

/// Hard-limits wavelet detail coefficients at k * MAD / 0.6745 per level.
inline DespikeResult wavelet_despike(std::span<const double> x, const DespikeConfig& cfg = {}) {
  WaveletDecomposition w = dwt(x, cfg.levels, WaveletPad::Symmetric);
  DespikeResult out;
  for (auto& d : w.details) {
    const double thr = cfg.mad_multiplier * mad(d) / 0.6745;
    for (double& c : d) {
      if (std::abs(c) > thr) {
        c = std::copysign(thr, c);
        ++out.clipped;
      }
    }
  }
  out.signal = idwt(w);
  return out;
}

}  // namespace affect
