#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "affect/core/types.hpp"

namespace affect {

inline bool eye_valid(const Eigen::MatrixXd& eye, Eigen::Index i, int valid_col) {
  return eye(i, valid_col) >= 0.5;
}

/// Per-sample pupil diameter: mean of the valid eyes, NaN where both are invalid.
inline Eigen::VectorXd pupil_series(const Eigen::MatrixXd& eye) {
  Eigen::VectorXd out(eye.rows());
  for (Eigen::Index i = 0; i < eye.rows(); ++i) {
    const bool l = eye_valid(eye, i, eye_col::kValidLeft);
    const bool r = eye_valid(eye, i, eye_col::kValidRight);
    if (l && r) out[i] = 0.5 * (eye(i, eye_col::kPupilLeft) + eye(i, eye_col::kPupilRight));
    else if (l) out[i] = eye(i, eye_col::kPupilLeft);
    else if (r) out[i] = eye(i, eye_col::kPupilRight);
    else out[i] = std::nan("");
  }
  return out;
}

/// Linear fill of NaN runs; leading/trailing runs copy the nearest value.
/// Returns false if every value is NaN.
inline bool fill_gaps(Eigen::VectorXd& x) {
  const Eigen::Index n = x.size();
  Eigen::Index prev = -1;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::isnan(x[i])) continue;
    if (prev < 0) {
      for (Eigen::Index j = 0; j < i; ++j) x[j] = x[i];
    } else if (i - prev > 1) {
      for (Eigen::Index j = prev + 1; j < i; ++j) {
        const double t = static_cast<double>(j - prev) / static_cast<double>(i - prev);
        x[j] = x[prev] + t * (x[i] - x[prev]);
      }
    }
    prev = i;
  }
  if (prev < 0) return false;
  for (Eigen::Index j = prev + 1; j < n; ++j) x[j] = x[prev];
  return true;
}

}  // namespace affect
