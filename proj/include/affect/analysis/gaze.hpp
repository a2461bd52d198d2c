#pragma once

#include <map>
#include <string>
#include <vector>

#include "affect/core/types.hpp"
#include "affect/features/eye.hpp"

namespace affect {

struct RoiGaze {
  std::string name;
  int count = 0;
  double ratio = 0.0;
};

struct GazeStats {
  std::vector<RoiGaze> rois;
  int valid_samples = 0;
  std::string group;  // joined grouping values, e.g. "male|female"
};

/// Joins the metadata values of `keys` with '|'; missing keys read "?".
inline std::string group_key(const StimulusEvent& ev, const std::vector<std::string>& keys) {
  std::string g;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i) g += '|';
    const auto it = ev.metadata.find(keys[i]);
    g += it == ev.metadata.end() ? "?" : it->second;
  }
  return g;
}

/// Count of valid gaze samples inside each (closed) ROI over the number of
/// valid samples.
inline GazeStats gaze_ratio(const Eigen::MatrixXd& eye_epoch, const std::vector<Roi>& rois) {
  GazeStats s;
  const auto g = valid_gaze(eye_epoch);
  require(!g.empty(), ErrorCode::NoValidGaze, "no valid gaze sample in the epoch");
  s.valid_samples = static_cast<int>(g.size());
  for (const auto& roi : rois) {
    RoiGaze r;
    r.name = roi.name;
    for (const auto& p : g)
      if (roi.rect.contains(p.x, p.y)) ++r.count;
    r.ratio = static_cast<double>(r.count) / static_cast<double>(s.valid_samples);
    s.rois.push_back(r);
  }
  return s;
}

inline GazeStats gaze_ratio(const Trial& trial, const std::vector<std::string>& grouping = {}) {
  GazeStats s = gaze_ratio(trial.eye_epoch, trial.event.rois);
  s.group = group_key(trial.event, grouping);
  return s;
}

/// Pooled ROI ratios per group: summed counts over summed valid samples.
struct GroupedGaze {
  std::map<std::string, std::map<std::string, double>> ratio;  // group -> roi -> ratio
  std::map<std::string, int> valid_samples;
};

inline GroupedGaze pool_gaze(const std::vector<GazeStats>& stats) {
  std::map<std::string, std::map<std::string, int>> counts;
  GroupedGaze out;
  for (const auto& s : stats) {
    out.valid_samples[s.group] += s.valid_samples;
    for (const auto& r : s.rois) counts[s.group][r.name] += r.count;
  }
  for (const auto& [g, rc] : counts)
    for (const auto& [name, c] : rc)
      out.ratio[g][name] = static_cast<double>(c) / static_cast<double>(out.valid_samples[g]);
  return out;
}

}  // namespace affect
