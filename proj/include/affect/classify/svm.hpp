#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "affect/error.hpp"

namespace affect {

struct KernelParams {
  int degree = 4;
  double gamma = 0.0;  // <= 0 means 1 / n_features
  double coef0 = 1.0;
  double c = 1.0;

  double resolved_gamma(Eigen::Index n_features) const {
    return gamma > 0 ? gamma : 1.0 / static_cast<double>(std::max<Eigen::Index>(1, n_features));
  }
};

/// (gamma <x, z> + coef0)^degree
inline double poly_kernel(const Eigen::Ref<const Eigen::VectorXd>& x, const Eigen::Ref<const Eigen::VectorXd>& z,
                          double gamma, double coef0, int degree) {
  return std::pow(gamma * x.dot(z) + coef0, degree);
}

inline Eigen::MatrixXd poly_gram(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b, double gamma, double coef0,
                                 int degree) {
  Eigen::MatrixXd k = (gamma * (a * b.transpose())).array() + coef0;
  return k.array().pow(degree);
}

struct SmoOptions {
  double eps = 1e-3;
  long max_iterations = 100000;
};

/// Dual solution of min 1/2 a'Qa - e'a, y'a = 0, 0 <= a <= C.
struct SvmSolution {
  Eigen::VectorXd alpha;
  double rho = 0.0;  // f(x) = sum a_i y_i K(x_i, x) - rho
  double objective = 0.0;
  long iterations = 0;
};

/// Sequential minimal optimization with second-order working-set selection
/// on a precomputed Gram matrix.
inline SvmSolution smo_solve(const Eigen::MatrixXd& gram, const std::vector<int>& y, double c,
                             const SmoOptions& opts = {}) {
  const Eigen::Index n = gram.rows();
  require(static_cast<Eigen::Index>(y.size()) == n, ErrorCode::OutOfRange, "label count mismatch");
  require(c > 0, ErrorCode::OutOfRange, "C must be positive");
  constexpr double kTau = 1e-12;
  const double inf = std::numeric_limits<double>::infinity();

  Eigen::VectorXd yd(n);
  for (Eigen::Index i = 0; i < n; ++i) yd[i] = y[static_cast<std::size_t>(i)] > 0 ? 1.0 : -1.0;
  const Eigen::MatrixXd q = yd.asDiagonal() * gram * yd.asDiagonal();
  const Eigen::VectorXd qd = q.diagonal();

  SvmSolution s;
  s.alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd g = Eigen::VectorXd::Constant(n, -1.0);
  auto& a = s.alpha;
  auto upper = [&](Eigen::Index t) { return a[t] >= c; };
  auto lower = [&](Eigen::Index t) { return a[t] <= 0; };

  bool done = false;
  while (s.iterations < opts.max_iterations) {
    double gmax = -inf, gmax2 = -inf;
    Eigen::Index i = -1, j = -1;
    for (Eigen::Index t = 0; t < n; ++t) {
      if (yd[t] > 0) {
        if (!upper(t) && -g[t] >= gmax) gmax = -g[t], i = t;
      } else {
        if (!lower(t) && g[t] >= gmax) gmax = g[t], i = t;
      }
    }
    double obj_min = inf;
    if (i >= 0) {
      for (Eigen::Index t = 0; t < n; ++t) {
        double grad_diff, quad;
        if (yd[t] > 0) {
          if (lower(t)) continue;
          grad_diff = gmax + g[t];
          gmax2 = std::max(gmax2, g[t]);
          quad = qd[i] + qd[t] - 2.0 * yd[i] * q(i, t);
        } else {
          if (upper(t)) continue;
          grad_diff = gmax - g[t];
          gmax2 = std::max(gmax2, -g[t]);
          quad = qd[i] + qd[t] + 2.0 * yd[i] * q(i, t);
        }
        if (grad_diff <= 0) continue;
        const double obj = -(grad_diff * grad_diff) / (quad > 0 ? quad : kTau);
        if (obj <= obj_min) obj_min = obj, j = t;
      }
    }
    if (i < 0 || j < 0 || gmax + gmax2 < opts.eps) {
      done = true;
      break;
    }
    ++s.iterations;

    const double ai = a[i], aj = a[j];
    if (yd[i] != yd[j]) {
      double quad = qd[i] + qd[j] + 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (-g[i] - g[j]) / quad;
      const double diff = a[i] - a[j];
      a[i] += delta;
      a[j] += delta;
      if (diff > 0) {
        if (a[j] < 0) a[j] = 0, a[i] = diff;
      } else {
        if (a[i] < 0) a[i] = 0, a[j] = -diff;
      }
      if (diff > 0) {
        if (a[i] > c) a[i] = c, a[j] = c - diff;
      } else {
        if (a[j] > c) a[j] = c, a[i] = c + diff;
      }
    } else {
      double quad = qd[i] + qd[j] - 2.0 * q(i, j);
      if (quad <= 0) quad = kTau;
      const double delta = (g[i] - g[j]) / quad;
      const double sum = a[i] + a[j];
      a[i] -= delta;
      a[j] += delta;
      if (sum > c) {
        if (a[i] > c) a[i] = c, a[j] = sum - c;
      } else {
        if (a[j] < 0) a[j] = 0, a[i] = sum;
      }
      if (sum > c) {
        if (a[j] > c) a[j] = c, a[i] = sum - c;
      } else {
        if (a[i] < 0) a[i] = 0, a[j] = sum;
      }
    }
    const double dai = a[i] - ai, daj = a[j] - aj;
    g += q.col(i) * dai + q.col(j) * daj;
  }
  require(done, ErrorCode::NotConverged,
          "SMO did not converge within " + std::to_string(opts.max_iterations) + " iterations");

  int n_free = 0;
  double ub = inf, lb = -inf, sum_free = 0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double yg = yd[t] * g[t];
    if (upper(t)) {
      if (yd[t] < 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else if (lower(t)) {
      if (yd[t] > 0) ub = std::min(ub, yg);
      else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  s.rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  s.objective = 0.5 * a.dot(g - Eigen::VectorXd::Ones(n));
  return s;
}

/// Dual objective 1/2 a'Qa - sum(a) for any feasible alpha.
inline double dual_objective(const Eigen::MatrixXd& gram, const std::vector<int>& y, const Eigen::VectorXd& alpha) {
  Eigen::VectorXd ya(alpha.size());
  for (Eigen::Index i = 0; i < alpha.size(); ++i) ya[i] = (y[static_cast<std::size_t>(i)] > 0 ? 1.0 : -1.0) * alpha[i];
  return 0.5 * ya.dot(gram * ya) - alpha.sum();
}

}  // namespace affect
