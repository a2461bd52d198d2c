#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "affect/core/text.hpp"
#include "affect/error.hpp"

namespace affect {

/// Second-order section in transposed direct form II, a0 normalized to 1.
struct Biquad {
  double b0 = 1, b1 = 0, b2 = 0, a1 = 0, a2 = 0;
};

using SosCascade = std::vector<Biquad>;

struct FilterSpec {
  double band_low_hz = 0.01;
  double band_high_hz = 120.0;
  double notch_hz = 60.0;
  double notch_q = 30.0;
  int filter_order = 4;

  void validate(double rate_hz) const {
    require(band_low_hz > 0 && band_low_hz < band_high_hz, ErrorCode::OutOfRange,
            "band edges must satisfy 0 < low < high");
    require(rate_hz >= 2.0 * band_high_hz, ErrorCode::NyquistViolation,
            "high cut " + format_double(band_high_hz) + " Hz needs a rate of at least twice that, got " +
                format_double(rate_hz) + " Hz");
    require(notch_hz > band_low_hz && notch_hz < band_high_hz, ErrorCode::OutOfRange,
            "notch frequency must lie inside the pass band");
    require(notch_q > 0, ErrorCode::OutOfRange, "notch Q must be positive");
    require(filter_order >= 2 && filter_order % 2 == 0, ErrorCode::OutOfRange,
            "filter order must be a positive even number");
  }
};

namespace detail {

// Q of each conjugate-pole pair of an analog Butterworth prototype.
inline std::vector<double> butterworth_section_q(int order) {
  std::vector<double> q;
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + 1.0) / (2.0 * order);
    q.push_back(1.0 / (2.0 * std::sin(theta)));
  }
  return q;
}

}  // namespace detail

// Bilinear-transform sections (prewarped at the cutoff).
inline SosCascade butterworth_lowpass(int order, double cutoff_hz, double rate_hz) {
  SosCascade sos;
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate_hz;
  const double cw = std::cos(w0), sw = std::sin(w0);
  for (double q : detail::butterworth_section_q(order)) {
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    sos.push_back({(1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0, -2.0 * cw / a0,
                   (1.0 - alpha) / a0});
  }
  return sos;
}

inline SosCascade butterworth_highpass(int order, double cutoff_hz, double rate_hz) {
  SosCascade sos;
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / rate_hz;
  const double cw = std::cos(w0), sw = std::sin(w0);
  for (double q : detail::butterworth_section_q(order)) {
    const double alpha = sw / (2.0 * q);
    const double a0 = 1.0 + alpha;
    sos.push_back({(1.0 + cw) / 2.0 / a0, -(1.0 + cw) / a0, (1.0 + cw) / 2.0 / a0, -2.0 * cw / a0,
                   (1.0 - alpha) / a0});
  }
  return sos;
}

inline Biquad notch(double f0_hz, double q, double rate_hz) {
  const double w0 = 2.0 * std::numbers::pi * f0_hz / rate_hz;
  const double cw = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;
  return {1.0 / a0, -2.0 * cw / a0, 1.0 / a0, -2.0 * cw / a0, (1.0 - alpha) / a0};
}

inline std::complex<double> frequency_response(const SosCascade& sos, double f_hz, double rate_hz) {
  const std::complex<double> z1 = std::polar(1.0, -2.0 * std::numbers::pi * f_hz / rate_hz);
  const std::complex<double> z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& s : sos) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

inline void sosfilt_inplace(const SosCascade& sos, std::vector<double>& x,
                            std::vector<std::array<double, 2>> state) {
  for (std::size_t k = 0; k < sos.size(); ++k) {
    const auto& s = sos[k];
    double z1 = state[k][0], z2 = state[k][1];
    for (double& v : x) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
}

inline std::vector<double> sosfilt(const SosCascade& sos, std::span<const double> x,
                                   const std::vector<std::array<double, 2>>& state) {
  std::vector<double> y(x.begin(), x.end());
  sosfilt_inplace(sos, y, state);
  return y;
}

/// Zero-phase forward-backward filter with Gustafsson's initial conditions:
/// the forward and backward start states are chosen by least squares so that
/// forward-backward and backward-forward filtering agree. Unlike padding plus
/// steady-state starts this leaves no start-up transient from a very low
/// high-pass cut. The operators depend only on the cascade and the length,
/// so one instance serves every channel of a record.
class ZeroPhaseFilter {
 public:
  ZeroPhaseFilter(SosCascade sos, std::size_t n) : sos_(std::move(sos)), n_(n) {
    const auto order = static_cast<Eigen::Index>(2 * sos_.size());
    const auto m = static_cast<Eigen::Index>(n);
    if (m == 0 || order == 0) return;
    obs_.resize(m, order);
    Eigen::MatrixXd s(m, order);
    const std::vector<double> zeros(n, 0.0);
    for (Eigen::Index j = 0; j < order; ++j) {
      std::vector<std::array<double, 2>> state(sos_.size(), {0.0, 0.0});
      state[static_cast<std::size_t>(j / 2)][static_cast<std::size_t>(j % 2)] = 1.0;
      const auto o = sosfilt(sos_, zeros, state);
      obs_.col(j) = Eigen::Map<const Eigen::VectorXd>(o.data(), m);
      std::vector<double> rev(o.rbegin(), o.rend());
      sosfilt_inplace(sos_, rev, zero_state());
      s.col(j) = Eigen::Map<const Eigen::VectorXd>(rev.data(), m);
    }
    sr_ = s.colwise().reverse();
    Eigen::MatrixXd mm(m, 2 * order);
    mm << sr_ - obs_, obs_.colwise().reverse() - s;
    // The states of a very low cut are nearly collinear over short records;
    // drop directions below the usual least-squares rank cutoff.
    svd_.compute(mm, Eigen::ComputeThinU | Eigen::ComputeThinV);
    svd_.setThreshold(std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(m, 2 * order)));
  }

  std::vector<double> operator()(std::span<const double> x) const {
    require(x.size() == n_, ErrorCode::OutOfRange, "zero-phase filter built for a different length");
    if (n_ == 0 || sos_.empty()) return {x.begin(), x.end()};
    const auto m = static_cast<Eigen::Index>(n_);
    auto fb = sosfilt(sos_, x, zero_state());
    std::reverse(fb.begin(), fb.end());
    sosfilt_inplace(sos_, fb, zero_state());
    std::reverse(fb.begin(), fb.end());
    std::vector<double> bf(x.rbegin(), x.rend());
    sosfilt_inplace(sos_, bf, zero_state());
    std::reverse(bf.begin(), bf.end());
    sosfilt_inplace(sos_, bf, zero_state());

    const Eigen::Map<const Eigen::VectorXd> y_fb(fb.data(), m), y_bf(bf.data(), m);
    const Eigen::VectorXd ic = svd_.solve(Eigen::VectorXd(y_bf - y_fb));
    const Eigen::Index order = obs_.cols();
    const Eigen::VectorXd y =
        y_fb + sr_ * ic.head(order) + obs_.colwise().reverse() * ic.tail(order);
    return {y.data(), y.data() + m};
  }

 private:
  std::vector<std::array<double, 2>> zero_state() const { return {sos_.size(), {0.0, 0.0}}; }

  SosCascade sos_;
  std::size_t n_;
  Eigen::MatrixXd obs_;  // zero-input response to each unit start state
  Eigen::MatrixXd sr_;   // that response reversed, filtered, reversed again
  Eigen::BDCSVD<Eigen::MatrixXd> svd_;
};

inline std::vector<double> sosfiltfilt(const SosCascade& sos, std::span<const double> x) {
  return ZeroPhaseFilter(sos, x.size())(x);
}

inline Eigen::VectorXd zero_phase(const SosCascade& sos, const Eigen::VectorXd& x) {
  const auto y = sosfiltfilt(sos, std::span<const double>(x.data(), static_cast<std::size_t>(x.size())));
  return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

inline SosCascade bandpass_cascade(const FilterSpec& spec, double rate_hz) {
  SosCascade sos = butterworth_highpass(spec.filter_order, spec.band_low_hz, rate_hz);
  const SosCascade lp = butterworth_lowpass(spec.filter_order, spec.band_high_hz, rate_hz);
  sos.insert(sos.end(), lp.begin(), lp.end());
  return sos;
}

/// Zero-phase band-pass followed by a zero-phase notch, per channel.
/// Length and channel order are preserved.
inline Eigen::MatrixXd bandpass_notch(const Eigen::MatrixXd& x, double rate_hz, const FilterSpec& spec = {}) {
  spec.validate(rate_hz);
  const auto n = static_cast<std::size_t>(x.rows());
  const ZeroPhaseFilter band_pass(bandpass_cascade(spec, rate_hz), n);
  const ZeroPhaseFilter stop_pass({notch(spec.notch_hz, spec.notch_q, rate_hz)}, n);
  Eigen::MatrixXd y(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const Eigen::VectorXd col = x.col(c);
    const auto banded = band_pass(std::span<const double>(col.data(), n));
    const auto out = stop_pass(banded);
    y.col(c) = Eigen::Map<const Eigen::VectorXd>(out.data(), x.rows());
  }
  return y;
}

}  // namespace affect
