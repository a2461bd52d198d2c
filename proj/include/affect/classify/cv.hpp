#pragma once

#include <cmath>
#include <vector>

#include "affect/classify/folds.hpp"
#include "affect/classify/model.hpp"
#include "affect/dsp/stats.hpp"

namespace affect {

struct CvConfig {
  int n_folds = 10;
  int n_repeats = 10;
  double train_fraction = 1.0;  // < 1 subsamples each training fold
};

struct CvResult {
  double mean_accuracy = 0.0;
  double std_accuracy = 0.0;  // sample std over repeats
  std::vector<double> repeat_accuracy;
  std::vector<double> oof_posterior;  // per row, averaged over repeats
  int n_samples = 0;
  int n_folds = 0;
  int n_repeats = 0;
  std::vector<int> train_sizes;
  std::vector<int> test_sizes;
};

/// Stratified subsample keeping at least two rows per class.
inline std::vector<int> subsample_rows(const std::vector<int>& rows, const std::vector<int>& y, double fraction,
                                       Rng& rng) {
  if (fraction >= 1.0) return rows;
  std::vector<int> pos, neg;
  for (int r : rows) (y[static_cast<std::size_t>(r)] > 0 ? pos : neg).push_back(r);
  auto take = [&](std::vector<int>& v) {
    std::shuffle(v.begin(), v.end(), rng);
    const auto k = std::min(v.size(), std::max<std::size_t>(2, static_cast<std::size_t>(
                                                                  std::llround(fraction * static_cast<double>(v.size())))));
    v.resize(k);
  };
  take(pos);
  take(neg);
  std::vector<int> out = pos;
  out.insert(out.end(), neg.begin(), neg.end());
  std::sort(out.begin(), out.end());
  return out;
}

/// Repeated stratified k-fold CV. Ranking, scaling, SVM and calibration
/// are fitted on the training rows of each fold only.
inline CvResult cross_validate(const FeatureMatrix& m, const TrainConfig& train_cfg, const CvConfig& cv,
                               std::uint64_t seed) {
  require(m.rows() >= cv.n_folds, ErrorCode::TooFewSamples,
          std::to_string(m.rows()) + " samples for " + std::to_string(cv.n_folds) + " folds");
  const std::vector<int> y = m.label_signs();
  CvResult out;
  out.n_samples = static_cast<int>(m.rows());
  out.n_folds = cv.n_folds;
  out.n_repeats = cv.n_repeats;
  out.oof_posterior.assign(static_cast<std::size_t>(m.rows()), 0.0);
  for (int rep = 0; rep < cv.n_repeats; ++rep) {
    const std::uint64_t rep_seed = derive_seed(seed, static_cast<std::uint64_t>(rep));
    Rng rng(rep_seed);
    const auto fold = stratified_folds(y, cv.n_folds, rng);
    double acc_sum = 0;
    for (int f = 0; f < cv.n_folds; ++f) {
      const std::uint64_t fold_seed = derive_seed(rep_seed, static_cast<std::uint64_t>(f));
      Rng sub_rng(derive_seed(fold_seed, 1));
      const auto tr = subsample_rows(rows_where(fold, f, false), y, cv.train_fraction, sub_rng);
      const auto te = rows_where(fold, f, true);
      if (rep == 0) {
        out.train_sizes.push_back(static_cast<int>(tr.size()));
        out.test_sizes.push_back(static_cast<int>(te.size()));
      }
      const TrainedModel model = train(m.select_rows(tr), train_cfg, fold_seed);
      const auto preds = predict(model, m.select_rows(te));
      int correct = 0;
      for (std::size_t i = 0; i < te.size(); ++i) {
        if (label_sign(preds[i].label) == y[static_cast<std::size_t>(te[i])]) ++correct;
        out.oof_posterior[static_cast<std::size_t>(te[i])] += preds[i].posterior / cv.n_repeats;
      }
      acc_sum += static_cast<double>(correct) / static_cast<double>(te.size());
    }
    out.repeat_accuracy.push_back(acc_sum / cv.n_folds);
  }
  out.mean_accuracy = mean(out.repeat_accuracy);
  out.std_accuracy = sample_stddev(out.repeat_accuracy);
  return out;
}

}  // namespace affect
