#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "affect/core/epoch.hpp"
#include "affect/features/extract.hpp"
#include "affect/synth/generator.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace affect;

namespace {

std::vector<double> ramp(std::size_t n, double slope = 0.01, double offset = 0.0) {
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = offset + slope * static_cast<double>(i);
  return x;
}

Trial sample_trial() {
  const Session s = test::small_session();
  return epoch_extract(s, s.events.front());
}

}  // namespace

TEST(BandPowers, TenHzToneIsAlpha) {
  const auto bp = eeg_band_powers(test::sine(500, 250.0, 10.0), 250.0);
  EXPECT_GE(bp.relative[2], 0.95);
  for (std::size_t b : {0u, 1u, 3u, 4u}) EXPECT_LE(bp.relative[b], 0.05);
}

TEST(BandPowers, WhiteNoiseFollowsBandwidth) {
  const std::array<double, 5> width = {3, 4, 6, 17, 19};
  std::array<double, 5> acc{};
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto bp = eeg_band_powers(test::white(2500, seed), 250.0);
    for (std::size_t b = 0; b < 5; ++b) acc[b] += bp.relative[b];
  }
  for (std::size_t b = 0; b < 5; ++b) EXPECT_NEAR(acc[b] / 10.0, width[b] / 49.0, 0.2 * width[b] / 49.0) << b;
}

TEST(BandPowers, EqualTonesGiveEqualThetaAndGamma) {
  auto x = test::sine(500, 250.0, 5.0);
  const auto y = test::sine(500, 250.0, 40.0);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] += y[i];
  const auto bp = eeg_band_powers(x, 250.0);
  EXPECT_NEAR(bp.absolute[1] / bp.absolute[4], 1.0, 0.1);
}

TEST(BandPowers, MatchDirectDft) {
  for (double rate : {250.0, 500.0})
    for (double f : {2.0, 6.0, 10.5, 11.0, 22.0, 40.0}) {
      const auto x = test::sine(static_cast<std::size_t>(2 * rate), rate, f, 3.0, 0.7);
      const auto bp = eeg_band_powers(x, rate);
      for (std::size_t b = 0; b < 5; ++b) {
        const auto& band = kEegBands[b];
        if (f < band.lo_hz || f >= band.hi_hz) continue;
        const double expected = oracle::dft_band_power(x, rate, band.lo_hz, band.hi_hz);
        EXPECT_NEAR(bp.absolute[b] / expected, 1.0, 0.15) << f << " Hz at " << rate;
      }
    }
}

TEST(BandPowers, TooShort) { EXPECT_THROW(eeg_band_powers(test::white(249, 1), 250.0), Error); }

TEST(Nsi, ConstantIsZero) { EXPECT_EQ(eeg_nsi(std::vector<double>(200, 4.2)), 0.0); }

TEST(Nsi, StepIsOne) {
  std::vector<double> x(200, -1.0);
  std::fill(x.begin() + 100, x.end(), 1.0);
  // z-scores are -1 and +1; five segment means of each sign, population std 1
  EXPECT_NEAR(eeg_nsi(x), 1.0, 1e-12);
}

TEST(Nsi, DriftExceedsStationary) {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto a = test::white(500, seed);
    auto b = test::white(500, seed + 1000);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] += 2.0 * static_cast<double>(i) / 500.0;
    wins += eeg_nsi(b) > eeg_nsi(a);
  }
  EXPECT_GE(wins, 95);
}

TEST(Nsi, NonNegativeAndTooShort) {
  for (std::uint64_t s = 1; s <= 20; ++s) EXPECT_GE(eeg_nsi(test::white(50, s)), 0.0);
  EXPECT_THROW(eeg_nsi(std::vector<double>(9, 1.0)), Error);
}

TEST(FractalDimension, RampIsOne) {
  EXPECT_NEAR(eeg_fractal_dimension(ramp(500)), 1.0, 0.05);
  EXPECT_NEAR(eeg_fractal_dimension(ramp(500, -3.0, 7.0)), 1.0, 0.05);
}

TEST(FractalDimension, WhiteNoiseIsTwo) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed)
    EXPECT_NEAR(eeg_fractal_dimension(test::white(500, seed)), 2.0, 0.15) << seed;
}

TEST(FractalDimension, SineLiesBetween) {
  const double line = eeg_fractal_dimension(ramp(500));
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const double phase = static_cast<double>(seed) * 0.37;
    const double fd = eeg_fractal_dimension(test::sine(500, 250.0, 10.0, 1.0, phase));
    EXPECT_GT(fd, line) << seed;
    EXPECT_LT(fd, eeg_fractal_dimension(test::white(500, seed))) << seed;
  }
}

TEST(FractalDimension, TooShort) { EXPECT_THROW(eeg_fractal_dimension(test::white(15, 1)), Error); }

TEST(Hoc, AlternatingCrossesEveryStep) {
  std::vector<double> x(101);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? -1.0 : 1.0;
  EXPECT_EQ(eeg_hoc(x)[0], 100.0);
}

TEST(Hoc, PositiveRampCrossesOnce) { EXPECT_EQ(eeg_hoc(ramp(200, 0.5, 10.0))[0], 1.0); }

TEST(Hoc, WhiteNoiseNearHalf) {
  const double n = 500;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) EXPECT_NEAR(eeg_hoc(test::white(500, seed))[0], n / 2, 3 * std::sqrt(n));
}

TEST(Hoc, ShapeAndTooShort) {
  EXPECT_EQ(eeg_hoc(test::white(100, 1)).size(), 10u);
  EXPECT_THROW(eeg_hoc(test::white(11, 1)), Error);
}

TEST(Dwt, ZeroSignalAtLogFloor) {
  const auto f = eeg_dwt_features(std::vector<double>(500, 0.0));
  ASSERT_EQ(f.size(), 18u);
  for (std::size_t b = 0; b < 6; ++b) {
    EXPECT_EQ(f[3 * b], std::log(1e-12));
    EXPECT_EQ(f[3 * b + 1], 0.0);
    EXPECT_EQ(f[3 * b + 2], 0.0);
  }
}

TEST(Dwt, ParsevalHolds) {
  for (std::size_t n : {32u, 100u, 500u, 1000u, 777u}) {
    const auto x = test::white(n, n);
    double e = 0;
    for (double v : x) e += v * v;
    double sum = 0;
    for (double v : dwt_subband_energies(x)) sum += v;
    EXPECT_NEAR(sum / e, 1.0, 1e-6) << n;
  }
}

TEST(Dwt, LowToneInApproximationHighToneInDetail) {
  const auto low = dwt_subband_energies(test::sine(500, 250.0, 1.0));
  EXPECT_EQ(std::max_element(low.begin(), low.end()) - low.begin(), 0);
  const auto high = dwt_subband_energies(test::sine(500, 250.0, 90.0));
  const auto top = std::max_element(high.begin(), high.end()) - high.begin();
  EXPECT_GE(top, 4);  // D2 or D1
}

TEST(Dwt, TooShort) { EXPECT_THROW(eeg_dwt_features(test::white(31, 1)), Error); }

TEST(EyeFeatures, ConstantGaze) {
  const auto f = eye_features(test::eye_epoch(120, 3.0));
  ASSERT_EQ(f.size(), 12u);
  EXPECT_DOUBLE_EQ(f[0], 3.0);
  EXPECT_EQ(f[1], 0.0);
  EXPECT_DOUBLE_EQ(f[6], 0.5);  // one fixation in 2 s
  EXPECT_DOUBLE_EQ(f[7], 2.0);
  EXPECT_DOUBLE_EQ(f[8], 2.0);  // the whole epoch
  EXPECT_EQ(f[9], 0.0);
  EXPECT_EQ(f[10], 0.0);
  EXPECT_EQ(f[11], 0.0);
  EXPECT_EQ(detect_fixations(valid_gaze(test::eye_epoch(120)), 60.0).size(), 1u);
}

TEST(EyeFeatures, JumpsEveryHalfSecond) {
  Eigen::MatrixXd e = test::eye_epoch(120);
  for (Eigen::Index i = 0; i < 120; ++i) {
    const bool far = (i / 30) % 2 == 1;
    e(i, eye_col::kGazeX) = far ? 0.8 : 0.2;
    e(i, eye_col::kGazeY) = far ? 0.9 : 0.1;
  }
  EXPECT_EQ(detect_fixations(valid_gaze(e), 60.0).size(), 4u);
  const auto f = eye_features(e);
  EXPECT_DOUBLE_EQ(f[6], 2.0);  // 4 fixations in 2 s
  EXPECT_EQ(f[11], 3.0);
}

TEST(EyeFeatures, SlowPupilInFirstBand) {
  Eigen::MatrixXd e = test::eye_epoch(120);
  for (Eigen::Index i = 0; i < 120; ++i) {
    const double p = 3.0 + 0.3 * std::sin(2.0 * std::numbers::pi * 0.1 * static_cast<double>(i) / 60.0);
    e(i, eye_col::kPupilLeft) = e(i, eye_col::kPupilRight) = p;
  }
  const auto f = eye_features(e);
  EXPECT_GE(f[2] / (f[2] + f[3] + f[4] + f[5]), 0.9);
}

TEST(EyeFeatures, MostlyInvalidPupilRejected) {
  Eigen::MatrixXd e = test::eye_epoch(120);
  e.col(eye_col::kValidLeft).head(80).setZero();
  e.col(eye_col::kValidRight).head(80).setZero();
  try {
    eye_features(e);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::NoValidPupil);
  }
}

TEST(Extract, LayoutCounts) {
  const FeatureLayout l = feature_layout();
  ASSERT_EQ(l.size(), 252u);
  EXPECT_EQ(std::count(l.modality.begin(), l.modality.end(), Modality::Eeg), 240);
  EXPECT_EQ(std::count(l.modality.begin(), l.modality.end(), Modality::Eye), 12);
  EXPECT_EQ(std::set<std::string>(l.names.begin(), l.names.end()).size(), 252u);
  EXPECT_EQ(l.names.front(), "eeg.Fp1.delta_power");
  EXPECT_EQ(l.names.back(), "eye.saccade_count");
  EXPECT_EQ(extract_all(sample_trial()).size(), 252u);
}

TEST(Extract, Deterministic) { EXPECT_EQ(extract_all(sample_trial()), extract_all(sample_trial())); }

TEST(Extract, EegGapIsAnError) {
  Trial t = sample_trial();
  t.quality_flags.set(QualityFlag::EegGap);
  try {
    extract_all(t);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TrialQuality);
  }
}

TEST(Extract, ScaleAware) {
  Trial t = sample_trial();
  const auto a = extract_all(t);
  t.eeg_epoch.col(0) *= 2.0;
  const auto b = extract_all(t);
  for (int k = 0; k < 5; ++k) EXPECT_NEAR(b[k], 4.0 * a[k], 1e-9 * a[k]);
  for (int k = 5; k < 10; ++k) EXPECT_NEAR(b[k], a[k], 1e-12);
  for (int k = 12; k < 22; ++k) EXPECT_EQ(b[k], a[k]);
  for (std::size_t k = 40; k < a.size(); ++k) EXPECT_EQ(b[k], a[k]);  // other channels and eye
}

TEST(Extract, FiniteOnGeneratorOutput) {
  std::size_t trials = 0;
  for (std::uint64_t seed = 1; trials < 1000; ++seed) {
    SubjectSpec subject;
    subject.seed = seed;
    const auto s = generate_session(GeneratorConfig{}, subject);
    for (const auto& t : epoch_all(s.session)) {
      if (!trial_usable(t)) continue;
      for (double v : extract_all(t)) ASSERT_TRUE(std::isfinite(v));
      ++trials;
    }
  }
  EXPECT_GE(trials, 1000u);
}

TEST(FeatureCsv, RoundTrip) {
  const Session s = test::small_session();
  const auto m = build_feature_matrix(epoch_all(s));
  const auto back = feature_matrix_from_csv(feature_matrix_to_csv(m));
  EXPECT_EQ(back.names, m.names);
  EXPECT_EQ(back.labels, m.labels);
  EXPECT_EQ(back.values, m.values);
}
