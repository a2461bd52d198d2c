#pragma once

#include <algorithm>
#include <cmath>

#include "affect/core/types.hpp"

namespace affect {

/// Like iff rating >= threshold.
inline Label binarize_label(int rating, int threshold = 5) {
  require(rating >= 1 && rating <= 7, ErrorCode::OutOfRange,
          "rating " + std::to_string(rating) + " outside 1..7");
  return rating >= threshold ? Label::Like : Label::Dislike;
}

/// Explicit binary answer wins over a 7-point rating.
inline std::optional<Label> event_label(const StimulusEvent& ev, int threshold = 5) {
  if (ev.binary_label) return ev.binary_label;
  if (ev.rating) return binarize_label(*ev.rating, threshold);
  return std::nullopt;
}

struct EpochOptions {
  int label_threshold = 5;
  double clip_level_uv = 3000.0;
  double max_invalid_eye_fraction = 0.5;
};

/// Contiguous window of `stream` covering [t, t + length): starts at the first
/// sample stamped at or after t. `truncated` is set when the stream cannot
/// supply the full round(length * rate) samples.
struct Window {
  Eigen::Index begin = 0;
  Eigen::Index count = 0;
  bool truncated = false;
};

inline Window locate_window(const SampleStream& stream, std::int64_t t_us, double length_s) {
  const auto expected = static_cast<Eigen::Index>(std::llround(length_s * stream.sample_rate_hz));
  const auto n = stream.size();
  // Binary search over the implicit timestamp sequence.
  Eigen::Index lo = 0, hi = n;
  while (lo < hi) {
    const Eigen::Index mid = lo + (hi - lo) / 2;
    if (stream.timestamp_us(mid) < t_us) lo = mid + 1;
    else hi = mid;
  }
  const Eigen::Index begin = lo;
  const std::int64_t t_end = t_us + static_cast<std::int64_t>(std::llround(length_s * 1e6));

  Window w;
  w.begin = begin;
  w.count = std::min(expected, n - begin);
  // Before the first sample the window is also short of samples.
  if (begin == 0 && t_us < stream.start_timestamp_us) {
    Eigen::Index inside = 0;
    while (inside < w.count && stream.timestamp_us(inside) < t_end) ++inside;
    w.count = inside;
  }
  w.truncated = w.count < expected;
  return w;
}

inline Trial epoch_extract(const Session& session, const StimulusEvent& event,
                           const EpochOptions& opts = {}) {
  require(session.epoch_length_s > 0, ErrorCode::OutOfRange, "epoch length must be positive");
  const SampleStream* eeg = session.find_stream(StreamKind::Eeg);
  const SampleStream* eye = session.find_stream(StreamKind::Eye);
  require(eeg != nullptr, ErrorCode::MissingStream, "session " + session.session_id + " has no EEG stream");
  require(eye != nullptr, ErrorCode::MissingStream, "session " + session.session_id + " has no eye stream");

  Trial trial;
  trial.event_id = event.event_id;
  trial.event = event;
  trial.eeg_rate_hz = eeg->sample_rate_hz;
  trial.eye_rate_hz = eye->sample_rate_hz;
  trial.label = event_label(event, opts.label_threshold);

  const Window we = locate_window(*eeg, event.timestamp_us, session.epoch_length_s);
  const Window wy = locate_window(*eye, event.timestamp_us, session.epoch_length_s);
  trial.eeg_epoch = eeg->samples.middleRows(we.begin, we.count);
  trial.eye_epoch = eye->samples.middleRows(wy.begin, wy.count);

  if (we.truncated || wy.truncated) trial.quality_flags.set(QualityFlag::OutOfSpan);

  if (trial.eeg_epoch.rows() > 0) {
    if (trial.eeg_epoch.cwiseAbs().maxCoeff() >= opts.clip_level_uv)
      trial.quality_flags.set(QualityFlag::Clipped);
    // A flat channel means the electrode lost contact.
    for (Eigen::Index c = 0; c < trial.eeg_epoch.cols(); ++c) {
      const auto col = trial.eeg_epoch.col(c);
      if (col.maxCoeff() == col.minCoeff()) trial.quality_flags.set(QualityFlag::EegGap);
    }
  } else {
    trial.quality_flags.set(QualityFlag::EegGap);
  }

  if (trial.eye_epoch.rows() > 0 && trial.eye_epoch.cols() > eye_col::kValidRight) {
    Eigen::Index invalid = 0;
    for (Eigen::Index i = 0; i < trial.eye_epoch.rows(); ++i)
      if (trial.eye_epoch(i, eye_col::kValidLeft) < 0.5 && trial.eye_epoch(i, eye_col::kValidRight) < 0.5)
        ++invalid;
    if (static_cast<double>(invalid) > opts.max_invalid_eye_fraction * static_cast<double>(trial.eye_epoch.rows()))
      trial.quality_flags.set(QualityFlag::EyeGap);
  } else {
    trial.quality_flags.set(QualityFlag::EyeGap);
  }
  return trial;
}

inline std::vector<Trial> epoch_all(const Session& session, const EpochOptions& opts = {}) {
  std::vector<Trial> trials;
  trials.reserve(session.events.size());
  for (const auto& ev : session.events) trials.push_back(epoch_extract(session, ev, opts));
  return trials;
}

}  // namespace affect
