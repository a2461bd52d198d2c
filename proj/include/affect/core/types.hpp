#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "affect/error.hpp"

namespace affect {

enum class StreamKind { Eeg, Eye };
enum class Category { Face, Cloth, Color, Composite, Other };
enum class Label { Dislike, Like };

inline constexpr std::array<std::string_view, 6> kEegChannels = {
    "Fp1", "Fp2", "AF3", "AF4", "AF7", "AF8"};

inline constexpr std::array<std::string_view, 6> kEyeChannels = {
    "pupil_left_mm", "pupil_right_mm", "gaze_x", "gaze_y", "valid_left", "valid_right"};

// Column positions inside an eye stream / eye epoch.
namespace eye_col {
inline constexpr int kPupilLeft = 0;
inline constexpr int kPupilRight = 1;
inline constexpr int kGazeX = 2;
inline constexpr int kGazeY = 3;
inline constexpr int kValidLeft = 4;
inline constexpr int kValidRight = 5;
}  // namespace eye_col

inline constexpr double kEyeRateHz = 60.0;

inline std::string_view to_string(StreamKind k) { return k == StreamKind::Eeg ? "eeg" : "eye"; }

inline std::string_view to_string(Category c) {
  switch (c) {
    case Category::Face: return "face";
    case Category::Cloth: return "cloth";
    case Category::Color: return "color";
    case Category::Composite: return "composite";
    case Category::Other: return "other";
  }
  return "other";
}

inline Category parse_category(std::string_view s) {
  if (s == "face") return Category::Face;
  if (s == "cloth") return Category::Cloth;
  if (s == "color") return Category::Color;
  if (s == "composite") return Category::Composite;
  if (s == "other") return Category::Other;
  throw Error(ErrorCode::Ingest, "unknown category '" + std::string(s) + "'");
}

inline std::string_view to_string(Label l) { return l == Label::Like ? "like" : "dislike"; }

inline Label parse_label(std::string_view s) {
  if (s == "like") return Label::Like;
  if (s == "dislike") return Label::Dislike;
  throw Error(ErrorCode::Ingest, "unknown label '" + std::string(s) + "'");
}

/// +1 for Like, -1 for Dislike; the sign convention used by the classifier.
inline int label_sign(Label l) { return l == Label::Like ? 1 : -1; }

/// One sensor's uniformly sampled channel data. Sample i is stamped
/// start + round(i * 1e6 / rate) microseconds.
struct SampleStream {
  std::string stream_id;
  StreamKind kind = StreamKind::Eeg;
  std::vector<std::string> channel_names;
  double sample_rate_hz = 0.0;
  std::int64_t start_timestamp_us = 0;
  Eigen::MatrixXd samples;  // [n_samples x n_channels]

  Eigen::Index size() const { return samples.rows(); }

  std::int64_t timestamp_us(Eigen::Index i) const {
    return start_timestamp_us +
           static_cast<std::int64_t>(std::llround(static_cast<double>(i) * 1e6 / sample_rate_hz));
  }

  /// Timestamp of the last sample; the stream covers [start, last].
  std::int64_t last_timestamp_us() const { return size() == 0 ? start_timestamp_us : timestamp_us(size() - 1); }

  std::optional<Eigen::Index> channel(std::string_view name) const {
    for (std::size_t c = 0; c < channel_names.size(); ++c)
      if (channel_names[c] == name) return static_cast<Eigen::Index>(c);
    return std::nullopt;
  }

  friend bool operator==(const SampleStream& a, const SampleStream& b) {
    return a.stream_id == b.stream_id && a.kind == b.kind && a.channel_names == b.channel_names &&
           a.sample_rate_hz == b.sample_rate_hz && a.start_timestamp_us == b.start_timestamp_us &&
           a.samples.rows() == b.samples.rows() && a.samples.cols() == b.samples.cols() &&
           (a.samples.array() == b.samples.array()).all();
  }
};

struct Rect {
  double x = 0, y = 0, w = 0, h = 0;

  // Closed rectangle: boundary points count as inside.
  bool contains(double px, double py) const {
    return px >= x && px <= x + w && py >= y && py <= y + h;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct Roi {
  std::string name;
  Rect rect;
  friend bool operator==(const Roi&, const Roi&) = default;
};

struct StimulusEvent {
  std::string event_id;
  std::int64_t timestamp_us = 0;
  Category category = Category::Other;
  std::optional<int> rating;
  std::optional<Label> binary_label;
  std::optional<double> luminance;
  std::vector<Roi> rois;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const StimulusEvent&, const StimulusEvent&) = default;
};

struct Session {
  std::string session_id;
  std::string subject_id;
  std::vector<SampleStream> streams;
  std::vector<StimulusEvent> events;  // time-ordered
  double epoch_length_s = 2.0;
  std::map<std::string, std::string> metadata;

  const SampleStream* find_stream(StreamKind kind) const {
    for (const auto& s : streams)
      if (s.kind == kind) return &s;
    return nullptr;
  }
  SampleStream* find_stream(StreamKind kind) {
    for (auto& s : streams)
      if (s.kind == kind) return &s;
    return nullptr;
  }

  friend bool operator==(const Session&, const Session&) = default;
};

enum class QualityFlag : unsigned { EegGap = 1u, EyeGap = 2u, Clipped = 4u, OutOfSpan = 8u };

struct QualityFlags {
  unsigned bits = 0;
  void set(QualityFlag f) { bits |= static_cast<unsigned>(f); }
  bool has(QualityFlag f) const { return (bits & static_cast<unsigned>(f)) != 0; }
  bool empty() const { return bits == 0; }
  friend bool operator==(const QualityFlags&, const QualityFlags&) = default;
};

inline std::string to_string(QualityFlags flags) {
  std::string out;
  auto add = [&](QualityFlag f, const char* name) {
    if (!flags.has(f)) return;
    if (!out.empty()) out += '|';
    out += name;
  };
  add(QualityFlag::EegGap, "EegGap");
  add(QualityFlag::EyeGap, "EyeGap");
  add(QualityFlag::Clipped, "Clipped");
  add(QualityFlag::OutOfSpan, "OutOfSpan");
  return out;
}

/// One stimulus's synchronized EEG + eye epoch.
struct Trial {
  std::string event_id;
  StimulusEvent event;
  double eeg_rate_hz = 0.0;
  double eye_rate_hz = kEyeRateHz;
  Eigen::MatrixXd eeg_epoch;  // [n_eeg x 6]
  Eigen::MatrixXd eye_epoch;  // [n_eye x 6], columns per eye_col
  std::optional<Label> label;
  QualityFlags quality_flags;

  friend bool operator==(const Trial& a, const Trial& b) {
    auto same = [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
      return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
    };
    return a.event_id == b.event_id && a.event == b.event && a.eeg_rate_hz == b.eeg_rate_hz &&
           a.eye_rate_hz == b.eye_rate_hz && same(a.eeg_epoch, b.eeg_epoch) &&
           same(a.eye_epoch, b.eye_epoch) && a.label == b.label && a.quality_flags == b.quality_flags;
  }
};

}  // namespace affect
