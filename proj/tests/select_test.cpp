#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>

#include "affect/classify/model.hpp"
#include "affect/core/epoch.hpp"
#include "affect/select/ilfs.hpp"
#include "affect/synth/generator.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace affect;

namespace {

std::vector<int> balanced_labels(int n, std::uint64_t seed) {
  std::vector<int> y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) y[static_cast<std::size_t>(i)] = i < n / 2 ? 1 : -1;
  Rng rng(seed);
  std::shuffle(y.begin(), y.end(), rng);
  return y;
}

// f0 = label, f1 = copy of f0, f2 = independent noise.
Eigen::MatrixXd label_copy_matrix(const std::vector<int>& y, std::uint64_t seed) {
  const auto noise = test::white(y.size(), seed + 7919);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(y.size()), 3);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    x(r, 0) = x(r, 1) = y[i];
    x(r, 2) = noise[i];
  }
  return x;
}

Eigen::MatrixXd random_matrix(Eigen::Index n, Eigen::Index m, std::uint64_t seed) {
  const auto v = test::white(static_cast<std::size_t>(n * m), seed);
  Eigen::MatrixXd x(n, m);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < m; ++j) x(i, j) = v[static_cast<std::size_t>(i * m + j)];
  return x;
}

}  // namespace

TEST(Ilfs, LabelCopyOutranksNoise) {
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto y = balanced_labels(100, seed);
    const auto r = rank_features(label_copy_matrix(y, seed), y);
    EXPECT_GT(r.scores[0], r.scores[2]) << seed;
    EXPECT_GT(r.scores[1], r.scores[2]) << seed;
    EXPECT_EQ(r.order.back(), 2) << seed;
  }
}

TEST(Ilfs, ClosedFormMatchesLongSeries) {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const auto y = balanced_labels(60, seed);
    const Eigen::MatrixXd a = ilfs_adjacency(random_matrix(60, 2 + static_cast<Eigen::Index>(seed % 9), seed), y, 0.5);
    const PathScores ps = infinite_path_scores(a);
    // (r rho)^400 = 0.9^400, far below double precision
    const Eigen::VectorXd s = oracle::series_scores(a, ps.r, 400);
    EXPECT_LE((s - ps.scores).cwiseAbs().maxCoeff(), 1e-9 * ps.scores.cwiseAbs().maxCoeff()) << seed;
  }
}

// The gap after L terms is exactly (rA)^{L+1} (I - rA)^{-1} 1.
TEST(Ilfs, TruncationGapIsTheTail) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto y = balanced_labels(40, seed);
    const Eigen::MatrixXd a = ilfs_adjacency(random_matrix(40, 6, seed), y, 0.5);
    const PathScores ps = infinite_path_scores(a);
    const Eigen::Index m = a.rows();
    const Eigen::MatrixXd ra = ps.r * a;
    Eigen::MatrixXd p = Eigen::MatrixXd::Identity(m, m);
    for (int l = 0; l < 21; ++l) p = p * ra;
    const Eigen::VectorXd tail =
        p * (Eigen::MatrixXd::Identity(m, m) - ra).partialPivLu().solve(Eigen::VectorXd::Ones(m));
    const Eigen::VectorXd gap = ps.scores - oracle::series_scores(a, ps.r, 20);
    EXPECT_LE((gap - tail).cwiseAbs().maxCoeff(), 1e-9 * ps.scores.cwiseAbs().maxCoeff()) << seed;
  }
}

TEST(Ilfs, DampingFromSpectralRadius) {
  const auto y = balanced_labels(30, 3);
  const Eigen::MatrixXd a = ilfs_adjacency(random_matrix(30, 5, 3), y, 0.5);
  const PathScores ps = infinite_path_scores(a);
  const Eigen::VectorXcd ev = a.eigenvalues();
  EXPECT_NEAR(ps.spectral_radius, ev.cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(ps.r * ps.spectral_radius, 0.9, 1e-12);
}

TEST(Ilfs, IdenticalFeaturesTie) {
  const auto y = balanced_labels(20, 1);
  Eigen::MatrixXd x(20, 2);
  const auto v = test::white(20, 4);
  for (Eigen::Index i = 0; i < 20; ++i) x(i, 0) = x(i, 1) = v[static_cast<std::size_t>(i)];
  const auto r = rank_features(x, y);
  EXPECT_EQ(r.scores[0], r.scores[1]);
  EXPECT_EQ(r.order, (std::vector<int>{0, 1}));
}

// Rank vectors chosen so every pair except the duplicate has Spearman 0:
// the redundancy graph is [[0,0,1,1],[0,0,1,1],[1,1,0,1],[1,1,1,0]].
TEST(Ilfs, RedundancyOnlyPenalizesDuplicates) {
  const std::array<double, 8> a = {1, 2, 3, 4, 5, 6, 7, 8};
  const std::array<double, 8> b = {1, 4, 6, 7, 8, 5, 3, 2};
  const std::array<double, 8> c = {2, 6, 8, 4, 1, 5, 7, 3};
  Eigen::MatrixXd x(8, 4);
  for (Eigen::Index i = 0; i < 8; ++i) x.row(i) << a[i], 10 * a[i], b[i], c[i];
  const std::vector<int> y = {1, -1, 1, -1, 1, -1, 1, -1};
  Eigen::MatrixXd expected(4, 4);
  expected << 0, 0, 1, 1, 0, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1, 0;
  EXPECT_LE((ilfs_adjacency(x, y, 0.0) - expected).cwiseAbs().maxCoeff(), 1e-12);
  const auto r = rank_features(x, y, 0.0);
  EXPECT_NEAR(r.scores[0], r.scores[1], 1e-12);
  EXPECT_NEAR(r.scores[2], r.scores[3], 1e-12);
  EXPECT_LT(r.scores[0], r.scores[2]);
  EXPECT_EQ(r.order, (std::vector<int>{2, 3, 0, 1}));
}

TEST(Ilfs, PermutationEquivariant) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto y = balanced_labels(50, seed);
    Eigen::MatrixXd x = random_matrix(50, 7, seed);
    for (Eigen::Index i = 0; i < 50; ++i) x(i, 1) += 0.8 * y[static_cast<std::size_t>(i)];
    std::vector<int> perm(7);
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    Eigen::MatrixXd xp(50, 7);
    for (int j = 0; j < 7; ++j) xp.col(j) = x.col(perm[static_cast<std::size_t>(j)]);
    const auto r = rank_features(x, y), rp = rank_features(xp, y);
    for (int j = 0; j < 7; ++j)
      EXPECT_NEAR(rp.scores[static_cast<std::size_t>(j)], r.scores[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])],
                  1e-9);
  }
}

TEST(Ilfs, RedundancyInvariantUnderMonotoneTransform) {
  const auto y = balanced_labels(40, 5);
  const Eigen::MatrixXd x = random_matrix(40, 5, 5);
  Eigen::MatrixXd t = x;
  t.col(0) = x.col(0).array().exp();
  t.col(3) = x.col(3).array().cube() * 5.0 - 2.0;
  EXPECT_EQ(spearman_matrix(t), spearman_matrix(x));
  EXPECT_EQ(ilfs_adjacency(t, y, 0.0), ilfs_adjacency(x, y, 0.0));
}

TEST(Ilfs, ZeroVarianceExcluded) {
  const auto y = balanced_labels(30, 2);
  Eigen::MatrixXd x = random_matrix(30, 4, 2);
  x.col(1).setConstant(3.0);
  const auto r = rank_features(x, y);
  EXPECT_EQ(r.scores[1], -std::numeric_limits<double>::infinity());
  EXPECT_EQ(r.order.back(), 1);
  for (int j : {0, 2, 3}) EXPECT_TRUE(std::isfinite(r.scores[static_cast<std::size_t>(j)]));
}

TEST(Ilfs, DegenerateLabels) {
  const std::vector<int> y(10, 1);
  try {
    rank_features(random_matrix(10, 3, 1), y);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateLabels);
  }
}

TEST(Ilfs, Deterministic) {
  const auto y = balanced_labels(40, 9);
  const Eigen::MatrixXd x = random_matrix(40, 6, 9);
  EXPECT_EQ(rank_features(x, y).scores, rank_features(x, y).scores);
}

TEST(TopK, AllAndOneAndRange) {
  const auto y = balanced_labels(100, 1);
  const auto r = rank_features(label_copy_matrix(y, 1), y);
  auto all = select_top_k(r, 3);
  std::sort(all.begin(), all.end());
  EXPECT_EQ(all, (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(select_top_k(r, 1), (std::vector<int>{0}));
  EXPECT_EQ(select_top_k(r, 2), (std::vector<int>{r.order[0], r.order[1]}));
  for (int k : {0, 4}) {
    try {
      select_top_k(r, k);
      FAIL() << k;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::KOutOfRange);
    }
  }
}

TEST(TopK, ForcedRealTimePair) {
  GeneratorConfig g;
  g.n_face = 16;
  g.n_cloth = g.n_color = 0;
  g.composites = false;
  const FeatureMatrix m = build_feature_matrix(epoch_all(generate_session(g).session));
  const std::vector<std::string> forced = {"eeg.AF3.hoc1", "eye.fixation_freq"};
  const auto cols = resolve_columns(m.names, forced);
  ASSERT_EQ(cols.size(), 2u);
  EXPECT_EQ(m.names[static_cast<std::size_t>(cols[0])], forced[0]);
  EXPECT_EQ(m.names[static_cast<std::size_t>(cols[1])], forced[1]);
  EXPECT_EQ(resolve_columns(m.names, {"eeg.*.hoc1"}).size(), 6u);
  EXPECT_THROW(resolve_columns(m.names, {"eeg.Cz.hoc1"}), Error);

  TrainConfig cfg;
  cfg.forced_features = forced;
  const TrainedModel model = train(m, cfg, 1);
  EXPECT_TRUE(model.ranking_scores.empty());
  EXPECT_EQ(model.selected_names, forced);
}
