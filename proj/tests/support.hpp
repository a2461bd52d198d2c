#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include "affect/core/types.hpp"
#include "affect/rng.hpp"

namespace test {

inline std::vector<double> sine(std::size_t n, double rate, double f, double amp = 1.0, double phase = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i)
    x[i] = amp * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / rate + phase);
  return x;
}

inline std::vector<double> white(std::size_t n, std::uint64_t seed, double sd = 1.0) {
  affect::Rng rng(seed);
  std::vector<double> x(n);
  for (auto& v : x) v = affect::gaussian(rng, 0.0, sd);
  return x;
}

inline double rms(const std::vector<double>& x, std::size_t from = 0, std::size_t to = 0) {
  if (to == 0) to = x.size();
  double s = 0;
  for (std::size_t i = from; i < to; ++i) s += x[i] * x[i];
  return std::sqrt(s / static_cast<double>(to - from));
}

/// Eye epoch with constant pupil and gaze, both eyes valid.
inline Eigen::MatrixXd eye_epoch(int n, double pupil = 3.0, double gx = 0.5, double gy = 0.5) {
  Eigen::MatrixXd e(n, 6);
  for (int i = 0; i < n; ++i) e.row(i) << pupil, pupil, gx, gy, 1.0, 1.0;
  return e;
}

/// Minimal well-formed session: EEG 250 Hz and eye 60 Hz over `seconds`,
/// white-noise EEG and constant eye data, one event per `spacing_s`.
inline affect::Session small_session(double seconds = 20.0, double spacing_s = 3.0, std::uint64_t seed = 1) {
  using namespace affect;
  Session s;
  s.session_id = "t01";
  s.subject_id = "S";
  SampleStream eeg;
  eeg.stream_id = "eeg";
  eeg.kind = StreamKind::Eeg;
  eeg.channel_names.assign(kEegChannels.begin(), kEegChannels.end());
  eeg.sample_rate_hz = 250.0;
  eeg.start_timestamp_us = 1'000'000;
  const auto ne = static_cast<Eigen::Index>(seconds * 250.0);
  Rng rng(seed);
  eeg.samples.resize(ne, 6);
  for (Eigen::Index i = 0; i < ne; ++i)
    for (int c = 0; c < 6; ++c) eeg.samples(i, c) = std::round(gaussian(rng, 0.0, 10.0) * 1000.0) / 1000.0;
  SampleStream eye;
  eye.stream_id = "eye";
  eye.kind = StreamKind::Eye;
  eye.channel_names.assign(kEyeChannels.begin(), kEyeChannels.end());
  eye.sample_rate_hz = 60.0;
  eye.start_timestamp_us = 1'000'000;
  eye.samples = eye_epoch(static_cast<int>(seconds * 60.0), 3.5);
  s.streams = {eeg, eye};
  int k = 0;
  for (double t = 1.0; t + 2.0 <= seconds - 0.5; t += spacing_s) {
    StimulusEvent ev;
    ev.event_id = "ev" + std::to_string(++k);
    ev.timestamp_us = 1'000'000 + static_cast<std::int64_t>(std::llround(t * 1e6));
    ev.category = Category::Face;
    ev.rating = 1 + k % 7;
    ev.luminance = 0.5;
    ev.rois = {{"face", {0.25, 0.25, 0.5, 0.5}}};
    ev.metadata = {{"viewer_sex", "male"}};
    s.events.push_back(ev);
  }
  return s;
}

inline std::filesystem::path temp_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("affect_test_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

}  // namespace test
