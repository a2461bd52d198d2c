#pragma once

#include <cmath>
#include <vector>

#include "affect/core/pupil.hpp"
#include "affect/core/types.hpp"
#include "affect/error.hpp"

namespace affect {

struct PlrConfig {
  int min_trials = 5;
};

struct PlrFit {
  double intercept = 0.0;
  double slope = 0.0;  // mm per luminance unit
  double mean_luminance = 0.0;
  int n_trials = 0;
  bool applied = false;
};

/// Least-squares fit of per-trial mean pupil against luminance. A constant
/// luminance pins the slope to 0.
inline PlrFit fit_light_reflex(const std::vector<Trial>& trials, const PlrConfig& cfg = {}) {
  std::vector<double> lum, pup;
  for (const auto& t : trials) {
    if (!t.event.luminance) continue;
    const Eigen::VectorXd p = pupil_series(t.eye_epoch);
    double s = 0;
    int n = 0;
    for (double v : p)
      if (!std::isnan(v)) s += v, ++n;
    if (n == 0) continue;
    lum.push_back(*t.event.luminance);
    pup.push_back(s / n);
  }
  require(static_cast<int>(lum.size()) >= cfg.min_trials, ErrorCode::InsufficientLuminance,
          "pupil light-reflex fit needs " + std::to_string(cfg.min_trials) + " trials with luminance, got " +
              std::to_string(lum.size()));
  PlrFit fit;
  fit.n_trials = static_cast<int>(lum.size());
  const double n = static_cast<double>(lum.size());
  double ml = 0, mp = 0;
  for (std::size_t i = 0; i < lum.size(); ++i) ml += lum[i], mp += pup[i];
  ml /= n;
  mp /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lum.size(); ++i) {
    sxx += (lum[i] - ml) * (lum[i] - ml);
    sxy += (lum[i] - ml) * (pup[i] - mp);
  }
  fit.slope = sxx > 1e-12 * n ? sxy / sxx : 0.0;
  fit.intercept = mp - fit.slope * ml;
  fit.mean_luminance = ml;
  fit.applied = true;
  return fit;
}

/// Subtracts slope * (luminance - mean luminance) from both pupil channels.
inline void apply_light_reflex(Trial& trial, const PlrFit& fit) {
  if (!fit.applied || !trial.event.luminance) return;
  const double shift = fit.slope * (*trial.event.luminance - fit.mean_luminance);
  trial.eye_epoch.col(eye_col::kPupilLeft).array() -= shift;
  trial.eye_epoch.col(eye_col::kPupilRight).array() -= shift;
}

struct PlrResult {
  PlrFit fit;
  std::vector<Eigen::VectorXd> corrected_pupil;  // per trial
  std::vector<bool> flagged;                     // true where no correction was possible
};

/// Fits the reflex across trials and returns the corrected pupil series.
/// With too few luminance-tagged trials the series are returned unchanged
/// and every trial is flagged.
inline PlrResult pupil_light_reflex_remove(const std::vector<Trial>& trials, const PlrConfig& cfg = {}) {
  PlrResult out;
  try {
    out.fit = fit_light_reflex(trials, cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InsufficientLuminance) throw;
  }
  for (const auto& t : trials) {
    Eigen::VectorXd p = pupil_series(t.eye_epoch);
    const bool ok = out.fit.applied && t.event.luminance.has_value();
    if (ok) p.array() -= out.fit.slope * (*t.event.luminance - out.fit.mean_luminance);
    out.corrected_pupil.push_back(std::move(p));
    out.flagged.push_back(!ok);
  }
  return out;
}

}  // namespace affect
