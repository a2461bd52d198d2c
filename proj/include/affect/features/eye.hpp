#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string_view>
#include <vector>

#include "affect/core/pupil.hpp"
#include "affect/core/types.hpp"
#include "affect/dsp/spectrum.hpp"
#include "affect/dsp/stats.hpp"
#include "affect/error.hpp"

namespace affect {

struct EyeFeatureConfig {
  double fixation_dispersion = 0.04;   // (max x - min x) + (max y - min y)
  double fixation_min_duration_s = 0.1;
  double saccade_velocity = 2.0;       // units / s
  int psd_ar_order = 1;                // 2 s cannot resolve the sub-Hz bands; higher orders invent peaks
  double max_invalid_fraction = 0.5;
};

inline constexpr std::array<std::string_view, 12> kEyeFeatureNames = {
    "pupil_mean",         "pupil_std",          "psd_band1",         "psd_band2",
    "psd_band3",          "psd_band4",          "fixation_freq",     "fixation_mean_duration",
    "fixation_total_duration", "gaze_velocity", "gaze_dispersion",   "saccade_count"};

inline constexpr std::array<std::array<double, 2>, 4> kPupilBands = {{{0.0, 0.2}, {0.2, 0.4}, {0.4, 0.6}, {0.6, 1.0}}};

struct GazePoint {
  double x, y;
  Eigen::Index sample;  // row in the epoch
};

inline bool gaze_valid(const Eigen::MatrixXd& eye, Eigen::Index i) {
  return eye(i, eye_col::kValidLeft) >= 0.5 || eye(i, eye_col::kValidRight) >= 0.5;
}

inline std::vector<GazePoint> valid_gaze(const Eigen::MatrixXd& eye) {
  std::vector<GazePoint> g;
  for (Eigen::Index i = 0; i < eye.rows(); ++i)
    if (gaze_valid(eye, i)) g.push_back({eye(i, eye_col::kGazeX), eye(i, eye_col::kGazeY), i});
  return g;
}

struct Fixation {
  std::size_t first = 0;  // index into the valid-gaze sequence
  std::size_t count = 0;
  double duration_s = 0.0;
};

/// Dispersion-threshold (I-DT) fixation detection over valid gaze samples.
inline std::vector<Fixation> detect_fixations(const std::vector<GazePoint>& g, double rate_hz,
                                              const EyeFeatureConfig& cfg = {}) {
  const auto min_len = static_cast<std::size_t>(std::ceil(cfg.fixation_min_duration_s * rate_hz - 1e-9));
  std::vector<Fixation> out;
  auto dispersion = [&](std::size_t b, std::size_t e) {
    double x0 = g[b].x, x1 = g[b].x, y0 = g[b].y, y1 = g[b].y;
    for (std::size_t i = b + 1; i < e; ++i) {
      x0 = std::min(x0, g[i].x);
      x1 = std::max(x1, g[i].x);
      y0 = std::min(y0, g[i].y);
      y1 = std::max(y1, g[i].y);
    }
    return (x1 - x0) + (y1 - y0);
  };
  std::size_t i = 0;
  while (min_len > 0 && i + min_len <= g.size()) {
    if (dispersion(i, i + min_len) <= cfg.fixation_dispersion) {
      std::size_t e = i + min_len;
      while (e < g.size() && dispersion(i, e + 1) <= cfg.fixation_dispersion) ++e;
      out.push_back({i, e - i, static_cast<double>(e - i) / rate_hz});
      i = e;
    } else {
      ++i;
    }
  }
  return out;
}

/// Inter-sample gaze speeds (units / s); gaps count their elapsed time.
inline std::vector<double> gaze_velocities(const std::vector<GazePoint>& g, double rate_hz) {
  std::vector<double> v;
  for (std::size_t i = 1; i < g.size(); ++i) {
    const double dt = static_cast<double>(g[i].sample - g[i - 1].sample) / rate_hz;
    v.push_back(std::hypot(g[i].x - g[i - 1].x, g[i].y - g[i - 1].y) / dt);
  }
  return v;
}

/// Runs of consecutive speeds above the threshold.
inline int count_saccades(const std::vector<double>& velocity, double threshold) {
  int n = 0;
  bool in = false;
  for (double v : velocity) {
    const bool fast = v > threshold;
    if (fast && !in) ++n;
    in = fast;
  }
  return n;
}

/// 12 eye features in the fixed order of kEyeFeatureNames.
inline std::vector<double> eye_features(const Eigen::MatrixXd& eye, double rate_hz = kEyeRateHz,
                                        const EyeFeatureConfig& cfg = {}) {
  const Eigen::Index n = eye.rows();
  require(static_cast<double>(n) >= rate_hz - 1e-9, ErrorCode::TooShort, "eye features need at least 1 s");
  require(eye.cols() > eye_col::kValidRight, ErrorCode::OutOfRange, "eye epoch lacks pupil/validity channels");

  Eigen::VectorXd pupil = pupil_series(eye);
  std::vector<double> valid_pupil;
  for (double p : pupil)
    if (!std::isnan(p)) valid_pupil.push_back(p);
  require(static_cast<double>(n - static_cast<Eigen::Index>(valid_pupil.size())) <=
              cfg.max_invalid_fraction * static_cast<double>(n),
          ErrorCode::NoValidPupil, "both eyes invalid for more than half of the epoch");

  std::vector<double> f;
  f.push_back(mean(valid_pupil));
  f.push_back(stddev(valid_pupil));

  fill_gaps(pupil);
  const ArModel ar = burg(std::span<const double>(pupil.data(), static_cast<std::size_t>(n)), cfg.psd_ar_order);
  for (const auto& b : kPupilBands) f.push_back(ar.band_power(b[0], b[1], rate_hz));

  const auto g = valid_gaze(eye);
  const double epoch_s = static_cast<double>(n) / rate_hz;
  const auto fix = g.empty() ? std::vector<Fixation>{} : detect_fixations(g, rate_hz, cfg);
  double total = 0;
  for (const auto& x : fix) total += x.duration_s;
  f.push_back(static_cast<double>(fix.size()) / epoch_s);
  f.push_back(fix.empty() ? 0.0 : total / static_cast<double>(fix.size()));
  f.push_back(total);

  const auto vel = gaze_velocities(g, rate_hz);
  f.push_back(vel.empty() ? 0.0 : mean(vel));
  double cx = 0, cy = 0;
  for (const auto& p : g) cx += p.x, cy += p.y;
  double disp = 0;
  if (!g.empty()) {
    cx /= static_cast<double>(g.size());
    cy /= static_cast<double>(g.size());
    for (const auto& p : g) disp += (p.x - cx) * (p.x - cx) + (p.y - cy) * (p.y - cy);
    disp = std::sqrt(disp / static_cast<double>(g.size()));
  }
  f.push_back(disp);
  f.push_back(count_saccades(vel, cfg.saccade_velocity));
  return f;
}

}  // namespace affect
