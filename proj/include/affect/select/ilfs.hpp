#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <vector>

#include "affect/dsp/stats.hpp"
#include "affect/error.hpp"

namespace affect {

struct FeatureRanking {
  std::vector<double> scores;  // -inf for zero-variance columns
  std::vector<int> order;      // descending score, ties by ascending index
  double alpha = 0.5;
  double r = 0.0;
  double spectral_radius = 0.0;
};

/// Fisher score (mu1 - mu0)^2 / (var1 + var0 + eps) per column.
inline Eigen::VectorXd fisher_scores(const Eigen::MatrixXd& x, const std::vector<int>& y, double eps = 1e-12) {
  Eigen::VectorXd h(x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    double s1 = 0, s0 = 0, q1 = 0, q0 = 0;
    int n1 = 0, n0 = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double v = x(i, j);
      if (y[static_cast<std::size_t>(i)] > 0) s1 += v, q1 += v * v, ++n1;
      else s0 += v, q0 += v * v, ++n0;
    }
    const double m1 = s1 / n1, m0 = s0 / n0;
    const double v1 = std::max(0.0, q1 / n1 - m1 * m1), v0 = std::max(0.0, q0 / n0 - m0 * m0);
    h[j] = (m1 - m0) * (m1 - m0) / (v1 + v0 + eps);
  }
  return h;
}

/// Spearman correlation matrix of the columns (average ranks for ties).
inline Eigen::MatrixXd spearman_matrix(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd r(n, x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const Eigen::VectorXd col = x.col(j);
    const auto ranks = average_ranks(std::span<const double>(col.data(), static_cast<std::size_t>(n)));
    for (Eigen::Index i = 0; i < n; ++i) r(i, j) = ranks[static_cast<std::size_t>(i)];
  }
  r.rowwise() -= r.colwise().mean();
  const Eigen::VectorXd norms = r.colwise().norm().transpose();
  for (Eigen::Index j = 0; j < r.cols(); ++j)
    if (norms[j] > 0) r.col(j) /= norms[j];
  Eigen::MatrixXd c = r.transpose() * r;
  return c.cwiseMax(-1.0).cwiseMin(1.0);
}

/// A_ij = alpha * max(h_i, h_j) + (1 - alpha) * (1 - |spearman_ij|) with h
/// the min-max normalized Fisher score.
inline Eigen::MatrixXd ilfs_adjacency(const Eigen::MatrixXd& x, const std::vector<int>& y, double alpha) {
  Eigen::VectorXd h = fisher_scores(x, y);
  const double lo = h.minCoeff(), hi = h.maxCoeff();
  if (hi > lo) h = (h.array() - lo) / (hi - lo);
  else h.setZero();
  const Eigen::MatrixXd rho = spearman_matrix(x);
  const Eigen::Index m = x.cols();
  Eigen::MatrixXd a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j)
      a(i, j) = alpha * std::max(h[i], h[j]) + (1.0 - alpha) * (1.0 - std::abs(rho(i, j)));
  return a;
}

struct PathScores {
  Eigen::VectorXd scores;
  double r = 0.0;
  double spectral_radius = 0.0;
};

/// Row sums of (I - rA)^-1 - I with r = damping / rho(A).
inline PathScores infinite_path_scores(const Eigen::MatrixXd& a, double damping = 0.9) {
  const Eigen::Index m = a.rows();
  PathScores out;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a, Eigen::EigenvaluesOnly);
  out.spectral_radius = eig.eigenvalues().cwiseAbs().maxCoeff();
  if (out.spectral_radius <= 0) {
    out.scores = Eigen::VectorXd::Zero(m);
    return out;
  }
  out.r = damping / out.spectral_radius;
  const Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m, m) - out.r * a;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(lhs);
  const Eigen::VectorXd v = lu.solve(Eigen::VectorXd::Ones(m));
  require(v.allFinite() && std::abs(lu.determinant()) > 0, ErrorCode::SingularMatrix,
          "path-sum system is singular");
  out.scores = v.array() - 1.0;
  return out;
}

inline std::vector<int> order_by_score(const std::vector<double>& scores) {
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return scores[static_cast<std::size_t>(a)] > scores[static_cast<std::size_t>(b)];
  });
  return order;
}

/// Infinite-path feature ranking. y holds +1 / -1.
inline FeatureRanking rank_features(const Eigen::MatrixXd& x, const std::vector<int>& y, double alpha = 0.5) {
  require(x.cols() >= 1, ErrorCode::OutOfRange, "ranking needs at least one feature");
  require(static_cast<Eigen::Index>(y.size()) == x.rows(), ErrorCode::OutOfRange, "label count mismatch");
  require(alpha >= 0 && alpha <= 1, ErrorCode::OutOfRange, "alpha must lie in [0, 1]");
  const bool pos = std::any_of(y.begin(), y.end(), [](int v) { return v > 0; });
  const bool neg = std::any_of(y.begin(), y.end(), [](int v) { return v <= 0; });
  require(pos && neg, ErrorCode::DegenerateLabels, "ranking needs both classes");

  std::vector<int> active;
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    if (x.col(j).maxCoeff() > x.col(j).minCoeff()) active.push_back(static_cast<int>(j));

  FeatureRanking out;
  out.alpha = alpha;
  out.scores.assign(static_cast<std::size_t>(x.cols()), -std::numeric_limits<double>::infinity());
  if (!active.empty()) {
    Eigen::MatrixXd sub(x.rows(), static_cast<Eigen::Index>(active.size()));
    for (std::size_t k = 0; k < active.size(); ++k) sub.col(static_cast<Eigen::Index>(k)) = x.col(active[k]);
    const PathScores ps = infinite_path_scores(ilfs_adjacency(sub, y, alpha));
    out.r = ps.r;
    out.spectral_radius = ps.spectral_radius;
    for (std::size_t k = 0; k < active.size(); ++k)
      out.scores[static_cast<std::size_t>(active[k])] = ps.scores[static_cast<Eigen::Index>(k)];
  }
  out.order = order_by_score(out.scores);
  return out;
}

inline std::vector<int> select_top_k(const FeatureRanking& ranking, int k) {
  require(k >= 1 && k <= static_cast<int>(ranking.order.size()), ErrorCode::KOutOfRange,
          "k = " + std::to_string(k) + " outside 1.." + std::to_string(ranking.order.size()));
  return {ranking.order.begin(), ranking.order.begin() + k};
}

}  // namespace affect
