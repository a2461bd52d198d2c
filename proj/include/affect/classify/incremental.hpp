#pragma once

#include <algorithm>
#include <numeric>
#include <string>
#include <vector>

#include "affect/classify/model.hpp"

namespace affect {

struct ReplayRecord {
  int trial = 0;  // 1-based arrival index
  std::string event_id;
  Prediction prediction;
  Label truth = Label::Dislike;
  int model_version = 0;
};

struct ReplayResult {
  std::vector<ReplayRecord> records;
  std::vector<TrainedModel> models;  // index = version

  int versions_used() const {
    std::vector<int> v;
    for (const auto& r : records) v.push_back(r.model_version);
    std::sort(v.begin(), v.end());
    return static_cast<int>(std::unique(v.begin(), v.end()) - v.begin());
  }
};

/// Predicts each arriving trial with the current model; after every
/// 1-based trial index in `schedule` the model is retrained from scratch on
/// the initial set plus every labeled arrival so far.
inline ReplayResult incremental_session(const FeatureMatrix& initial, const FeatureMatrix& arrivals,
                                        const std::vector<int>& schedule, const TrainConfig& cfg,
                                        std::uint64_t seed) {
  ReplayResult out;
  out.models.push_back(train(initial, cfg, derive_seed(seed, 0)));
  for (Eigen::Index t = 0; t < arrivals.rows(); ++t) {
    const int index = static_cast<int>(t) + 1;
    const FeatureMatrix one = arrivals.select_rows({static_cast<int>(t)});
    ReplayRecord rec;
    rec.trial = index;
    rec.event_id = t < static_cast<Eigen::Index>(arrivals.event_ids.size()) ? arrivals.event_ids[static_cast<std::size_t>(t)]
                                                                           : std::to_string(index);
    rec.prediction = predict(out.models.back(), one).front();
    rec.truth = arrivals.labels[static_cast<std::size_t>(t)];
    rec.model_version = static_cast<int>(out.models.size()) - 1;
    out.records.push_back(rec);
    const bool retrain = std::find(schedule.begin(), schedule.end(), index) != schedule.end();
    if (retrain && index < arrivals.rows()) {
      std::vector<int> seen(static_cast<std::size_t>(index));
      std::iota(seen.begin(), seen.end(), 0);
      FeatureMatrix pool = initial;
      pool.append(arrivals.select_rows(seen));
      out.models.push_back(train(pool, cfg, derive_seed(seed, out.models.size())));
    }
  }
  return out;
}

}  // namespace affect
