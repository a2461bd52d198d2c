#pragma once

#include <algorithm>
#include <vector>

#include "affect/error.hpp"
#include "affect/rng.hpp"

namespace affect {

/// Fold index per row. Each class is shuffled and dealt round-robin so
/// fold sizes differ by at most one. Every fold must hold both classes;
/// the deal is retried up to `max_attempts` times.
inline std::vector<int> stratified_folds(const std::vector<int>& y, int n_folds, Rng& rng, int max_attempts = 100) {
  require(n_folds >= 2, ErrorCode::OutOfRange, "need at least 2 folds");
  require(static_cast<int>(y.size()) >= n_folds, ErrorCode::TooFewSamples,
          std::to_string(y.size()) + " samples cannot fill " + std::to_string(n_folds) + " folds");
  std::vector<int> pos, neg;
  for (std::size_t i = 0; i < y.size(); ++i) (y[i] > 0 ? pos : neg).push_back(static_cast<int>(i));
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::shuffle(pos.begin(), pos.end(), rng);
    std::shuffle(neg.begin(), neg.end(), rng);
    std::vector<int> fold(y.size());
    int slot = 0;
    for (int i : pos) fold[static_cast<std::size_t>(i)] = slot++ % n_folds;
    for (int i : neg) fold[static_cast<std::size_t>(i)] = slot++ % n_folds;
    std::vector<int> np(static_cast<std::size_t>(n_folds), 0), nn(static_cast<std::size_t>(n_folds), 0);
    for (std::size_t i = 0; i < y.size(); ++i) ++(y[i] > 0 ? np : nn)[static_cast<std::size_t>(fold[i])];
    bool ok = true;
    for (int f = 0; f < n_folds; ++f) ok = ok && np[static_cast<std::size_t>(f)] > 0 && nn[static_cast<std::size_t>(f)] > 0;
    if (ok) return fold;
  }
  throw Error(ErrorCode::UnstratifiableFolds,
              "cannot place both classes in each of " + std::to_string(n_folds) + " folds (" +
                  std::to_string(pos.size()) + " positive, " + std::to_string(neg.size()) + " negative)");
}

inline std::vector<int> rows_where(const std::vector<int>& fold, int f, bool equal) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < fold.size(); ++i)
    if ((fold[i] == f) == equal) idx.push_back(static_cast<int>(i));
  return idx;
}

}  // namespace affect
