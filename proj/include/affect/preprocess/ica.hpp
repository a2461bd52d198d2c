#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "affect/dsp/stats.hpp"
#include "affect/error.hpp"
#include "affect/preprocess/filter.hpp"
#include "affect/rng.hpp"

namespace affect {

struct IcaConfig {
  int max_iterations = 500;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;
  double eog_correlation_threshold = 0.7;
  double kurtosis_threshold = 5.0;
  double eog_lowpass_hz = 4.0;
  double min_duration_s = 10.0;
};

/// sources = (x - mean) * unmixing^T ; x = sources * mixing^T + mean.
struct IcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd unmixing;  // [components x channels]
  Eigen::MatrixXd mixing;    // [channels x components]
  bool converged = false;
  int iterations = 0;

  static IcaModel identity(const Eigen::MatrixXd& x) {
    IcaModel m;
    m.mean = x.colwise().mean().transpose();
    m.unmixing = Eigen::MatrixXd::Identity(x.cols(), x.cols());
    m.mixing = m.unmixing;
    return m;
  }

  Eigen::MatrixXd sources(const Eigen::MatrixXd& x) const {
    return (x.rowwise() - mean.transpose()) * unmixing.transpose();
  }
};

struct ArtifactReport {
  int n_components_removed = 0;
  std::vector<int> removed_indices;
  std::vector<int> despiked_coefficients;  // per channel
  bool ica_applied = false;
  bool ica_converged = false;
  int ica_iterations = 0;
  std::vector<double> component_eog_correlation;
  std::vector<double> component_kurtosis;
};

namespace detail {

// W <- (W W^T)^{-1/2} W
inline Eigen::MatrixXd symmetric_decorrelate(const Eigen::MatrixXd& w) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w * w.transpose());
  const Eigen::VectorXd inv_sqrt = eig.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return eig.eigenvectors() * inv_sqrt.asDiagonal() * eig.eigenvectors().transpose() * w;
}

}  // namespace detail

/// Symmetric fixed-point ICA with the tanh (log-cosh) contrast. On failure
/// to converge the identity transform is returned with converged = false.
inline IcaModel fit_ica(const Eigen::MatrixXd& x, const IcaConfig& cfg = {}) {
  const Eigen::Index n = x.rows();
  const Eigen::Index c = x.cols();
  require(n > c, ErrorCode::TooShort, "ICA needs more samples than channels");

  IcaModel model;
  model.mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centered = x.rowwise() - model.mean.transpose();
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  const Eigen::VectorXd evals = eig.eigenvalues();
  if (evals.minCoeff() <= 1e-12 * std::max(1.0, evals.maxCoeff())) {
    IcaModel fallback = IcaModel::identity(x);
    return fallback;  // rank deficient
  }
  const Eigen::MatrixXd whitening =
      evals.cwiseSqrt().cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();  // [c x c]
  const Eigen::MatrixXd z = centered * whitening.transpose();                          // [n x c]

  Rng rng(cfg.seed);
  Eigen::MatrixXd w(c, c);
  for (Eigen::Index i = 0; i < c; ++i)
    for (Eigen::Index j = 0; j < c; ++j) w(i, j) = gaussian(rng);
  w = detail::symmetric_decorrelate(w);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    const Eigen::MatrixXd y = z * w.transpose();  // [n x c]
    const Eigen::MatrixXd g = y.array().tanh().matrix();
    const Eigen::VectorXd g_prime_mean = (1.0 - g.array().square()).colwise().mean().transpose();
    Eigen::MatrixXd w_new = g.transpose() * z * inv_n - g_prime_mean.asDiagonal() * w;
    w_new = detail::symmetric_decorrelate(w_new);
    const double lim = ((w_new * w.transpose()).diagonal().cwiseAbs().array() - 1.0).abs().maxCoeff();
    w = w_new;
    model.iterations = it;
    if (lim < cfg.tolerance) {
      model.converged = true;
      break;
    }
  }
  if (!model.converged) {
    IcaModel fallback = IcaModel::identity(x);
    fallback.iterations = model.iterations;
    return fallback;
  }
  model.unmixing = w * whitening;
  model.mixing = model.unmixing.inverse();
  return model;
}

/// Zeroes the listed components and remixes.
inline Eigen::MatrixXd apply_ica(const IcaModel& model, const Eigen::MatrixXd& x, const std::vector<int>& removed) {
  Eigen::MatrixXd s = model.sources(x);
  for (int k : removed) s.col(k).setZero();
  return (s * model.mixing.transpose()).rowwise() + model.mean.transpose();
}

/// EOG proxy: mean of Fp1 and Fp2, zero-phase low-passed.
inline Eigen::VectorXd eog_proxy(const Eigen::MatrixXd& x, double rate_hz, const std::vector<std::string>& channels,
                                 double lowpass_hz) {
  auto find = [&](const char* name, Eigen::Index fallback) {
    for (std::size_t i = 0; i < channels.size(); ++i)
      if (channels[i] == name) return static_cast<Eigen::Index>(i);
    return fallback;
  };
  const Eigen::Index fp1 = find("Fp1", 0);
  const Eigen::Index fp2 = find("Fp2", std::min<Eigen::Index>(1, x.cols() - 1));
  const Eigen::VectorXd avg = 0.5 * (x.col(fp1) + x.col(fp2));
  return zero_phase(butterworth_lowpass(4, lowpass_hz, rate_hz), avg);
}

struct IcaRejection {
  Eigen::MatrixXd cleaned;
  IcaModel model;
  ArtifactReport report;
};

/// Fits ICA on continuous data (>= min_duration_s) and removes components
/// that track the EOG proxy or are strongly non-Gaussian.
inline IcaRejection ica_artifact_reject(const Eigen::MatrixXd& x, double rate_hz,
                                        const std::vector<std::string>& channels, const IcaConfig& cfg = {}) {
  require(x.cols() >= 6, ErrorCode::OutOfRange, "ICA artifact rejection needs at least 6 channels");
  require(static_cast<double>(x.rows()) >= cfg.min_duration_s * rate_hz, ErrorCode::TooShort,
          "ICA needs at least " + format_double(cfg.min_duration_s) + " s of data; fit on concatenated session data");

  IcaRejection out;
  out.model = fit_ica(x, cfg);
  out.report.ica_converged = out.model.converged;
  out.report.ica_iterations = out.model.iterations;
  if (!out.model.converged) {
    out.cleaned = x;
    return out;
  }
  out.report.ica_applied = true;

  const Eigen::VectorXd proxy = eog_proxy(x, rate_hz, channels, cfg.eog_lowpass_hz);
  const Eigen::MatrixXd s = out.model.sources(x);
  for (Eigen::Index k = 0; k < s.cols(); ++k) {
    const std::span<const double> comp(s.col(k).data(), static_cast<std::size_t>(s.rows()));
    double r = pearson(comp, std::span<const double>(proxy.data(), static_cast<std::size_t>(proxy.size())));
    if (std::isnan(r)) r = 0.0;
    const double kurt = excess_kurtosis(comp);
    out.report.component_eog_correlation.push_back(r);
    out.report.component_kurtosis.push_back(kurt);
    if (std::abs(r) > cfg.eog_correlation_threshold || std::abs(kurt) > cfg.kurtosis_threshold)
      out.report.removed_indices.push_back(static_cast<int>(k));
  }
  out.report.n_components_removed = static_cast<int>(out.report.removed_indices.size());
  out.cleaned = apply_ica(out.model, x, out.report.removed_indices);
  return out;
}

}  // namespace affect
