#pragma once

#include <cmath>
#include <vector>

#include "affect/error.hpp"

namespace affect {

struct Calibration {
  double a = 0.0;
  double b = 0.0;
  int iterations = 0;
};

/// p = 1 / (1 + exp(a f + b)), evaluated without overflow.
inline double sigmoid_posterior(double f, const Calibration& cal) {
  const double z = cal.a * f + cal.b;
  if (z >= 0) {
    const double e = std::exp(-z);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(z));
}

struct CalibrationOptions {
  int max_iterations = 100;
  double min_step = 1e-10;
  double sigma = 1e-12;      // Hessian ridge
  double tolerance = 1e-10;  // gradient norm
};

/// Platt sigmoid fit by Newton's method with backtracking, using the
/// regularized targets (N+ + 1)/(N+ + 2) and 1/(N- + 2). y holds +1 / -1.
inline Calibration calibrate(const std::vector<double>& f, const std::vector<int>& y,
                             const CalibrationOptions& opts = {}) {
  require(f.size() == y.size(), ErrorCode::OutOfRange, "decision/label count mismatch");
  double prior1 = 0, prior0 = 0;
  for (int v : y) (v > 0 ? prior1 : prior0) += 1.0;
  require(prior1 > 0 && prior0 > 0, ErrorCode::DegenerateLabels, "calibration needs both classes");

  const double hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = y[i] > 0 ? hi : lo;

  auto objective = [&](double a, double b) {
    double v = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double z = f[i] * a + b;
      v += z >= 0 ? t[i] * z + std::log1p(std::exp(-z)) : (t[i] - 1.0) * z + std::log1p(std::exp(z));
    }
    return v;
  };

  Calibration cal;
  cal.b = std::log((prior0 + 1.0) / (prior1 + 1.0));
  double fval = objective(cal.a, cal.b);
  for (int it = 0; it < opts.max_iterations; ++it) {
    double h11 = opts.sigma, h22 = opts.sigma, h21 = 0, g1 = 0, g2 = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double z = f[i] * cal.a + cal.b;
      double p, q;
      if (z >= 0) {
        const double e = std::exp(-z);
        p = e / (1.0 + e);
        q = 1.0 / (1.0 + e);
      } else {
        const double e = std::exp(z);
        p = 1.0 / (1.0 + e);
        q = e / (1.0 + e);
      }
      const double d2 = p * q;
      h11 += f[i] * f[i] * d2;
      h22 += d2;
      h21 += f[i] * d2;
      const double d1 = t[i] - p;
      g1 += f[i] * d1;
      g2 += d1;
    }
    if (std::abs(g1) < opts.tolerance && std::abs(g2) < opts.tolerance) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    bool moved = false;
    while (step >= opts.min_step) {
      const double na = cal.a + step * da, nb = cal.b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        cal.a = na;
        cal.b = nb;
        fval = nf;
        moved = true;
        break;
      }
      step /= 2.0;
    }
    cal.iterations = it + 1;
    if (!moved) break;  // line search exhausted: at numerical optimum
  }
  return cal;
}

}  // namespace affect
