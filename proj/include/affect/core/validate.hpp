#pragma once

#include <limits>
#include <set>
#include <string>
#include <vector>

#include "affect/core/session_io.hpp"
#include "affect/core/types.hpp"

namespace affect {

struct Diagnostic {
  std::string location;  // e.g. "stream eeg", "event img_012"
  std::string message;
};

/// Reports every invariant violation of an in-memory session. Never mutates.
inline std::vector<Diagnostic> validate_session(const Session& session, bool allow_any_rate = false) {
  std::vector<Diagnostic> out;
  auto flag = [&](std::string where, std::string what) { out.push_back({std::move(where), std::move(what)}); };

  if (!(session.epoch_length_s > 0)) flag("session", "epoch_length_s must be positive");
  if (!session.find_stream(StreamKind::Eeg)) flag("session", "missing EEG stream");
  if (!session.find_stream(StreamKind::Eye)) flag("session", "missing eye stream");

  for (const auto& s : session.streams) {
    const std::string where = "stream " + s.stream_id;
    if (!(s.sample_rate_hz > 0)) flag(where, "sample rate must be positive");
    else if (!allow_any_rate && !rate_allowed(s.kind, s.sample_rate_hz))
      flag(where, "sample rate " + format_double(s.sample_rate_hz) + " Hz violates the " +
                      std::string(s.kind == StreamKind::Eeg ? "250/500 Hz EEG" : "60 Hz eye") + " contract");
    const auto expected = s.kind == StreamKind::Eeg
                              ? std::vector<std::string>(kEegChannels.begin(), kEegChannels.end())
                              : std::vector<std::string>(kEyeChannels.begin(), kEyeChannels.end());
    if (s.channel_names != expected) flag(where, "channel names/order differ from the canonical layout");
    if (static_cast<std::size_t>(s.samples.cols()) != s.channel_names.size())
      flag(where, "sample matrix width does not match channel count");
    if (s.size() == 0) flag(where, "stream is empty");
    if (s.samples.size() > 0 && !s.samples.allFinite()) flag(where, "samples contain NaN or infinite values");
  }

  std::set<std::string> ids;
  std::int64_t previous = std::numeric_limits<std::int64_t>::min();
  for (const auto& ev : session.events) {
    const std::string where = "event " + ev.event_id;
    if (!ids.insert(ev.event_id).second) flag(where, "duplicate event id");
    if (ev.timestamp_us < previous) flag(where, "events are not time-ordered");
    previous = ev.timestamp_us;
    if (ev.rating && (*ev.rating < 1 || *ev.rating > 7)) flag(where, "rating outside 1..7");
    if (ev.luminance && (*ev.luminance < 0 || *ev.luminance > 1)) flag(where, "luminance outside [0,1]");
    std::set<std::string> roi_names;
    for (const auto& roi : ev.rois) {
      if (!roi_names.insert(roi.name).second) flag(where, "duplicate ROI name '" + roi.name + "'");
      const auto& r = roi.rect;
      if (r.x < 0 || r.y < 0 || r.w < 0 || r.h < 0 || r.x + r.w > 1 || r.y + r.h > 1)
        flag(where, "ROI '" + roi.name + "' leaves the unit square");
    }
    for (const auto& s : session.streams) {
      if (s.size() == 0) continue;
      if (ev.timestamp_us < s.start_timestamp_us || ev.timestamp_us > s.last_timestamp_us())
        flag(where, "timestamp outside the span of stream " + s.stream_id);
    }
  }
  return out;
}

}  // namespace affect
