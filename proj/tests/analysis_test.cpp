#include <gtest/gtest.h>

#include <algorithm>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <numeric>
#include <sstream>

#include "affect/pipeline/run.hpp"
#include "affect/preprocess/filter.hpp"
#include "affect/synth/generator.hpp"
#include "support.hpp"

using namespace affect;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Sorted relative path -> bytes of every regular file under dir.
std::map<std::string, std::string> tree(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

// Amplitude of the f Hz component by projection onto sine and cosine.
double tone_amplitude(const Eigen::VectorXd& x, double rate, double f, Eigen::Index from, Eigen::Index to) {
  std::complex<double> s = 0;
  for (Eigen::Index i = from; i < to; ++i)
    s += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(i) / rate);
  return 2.0 * std::abs(s) / static_cast<double>(to - from);
}

double two_pass_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

const std::vector<Roi> kTwoRois = {{"face", {0.25, 0.1, 0.5, 0.3}}, {"cloth", {0.1, 0.5, 0.8, 0.45}}};

// Small corpus that still supports composites and every analysis.
GeneratorConfig small_generator() {
  GeneratorConfig g;
  g.n_face = g.n_cloth = g.n_color = 8;
  return g;
}

PipelineConfig quick_config() {
  PipelineConfig cfg;
  cfg.cv.n_repeats = 2;
  cfg.sweep_fractions = {0.5, 1.0};
  return cfg;
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(AFFECT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Gaze, AllInsideGivesOne) {
  const auto s = gaze_ratio(test::eye_epoch(120, 3.0, 0.5, 0.2), kTwoRois);
  EXPECT_EQ(s.valid_samples, 120);
  EXPECT_EQ(s.rois[0].count, 120);
  EXPECT_DOUBLE_EQ(s.rois[0].ratio, 1.0);
  EXPECT_DOUBLE_EQ(s.rois[1].ratio, 0.0);
}

// A small ROI receiving every sample still scores 1: counts, not area.
TEST(Gaze, CountBasedNotAreaBased) {
  const std::vector<Roi> rois = {{"tiny", {0.49, 0.49, 0.02, 0.02}}, {"huge", {0.0, 0.0, 1.0, 0.4}}};
  const auto s = gaze_ratio(test::eye_epoch(120, 3.0, 0.5, 0.5), rois);
  EXPECT_DOUBLE_EQ(s.rois[0].ratio, 1.0);
  EXPECT_DOUBLE_EQ(s.rois[1].ratio, 0.0);
}

TEST(Gaze, InvalidSamplesLeaveTheDenominator) {
  Eigen::MatrixXd e = test::eye_epoch(120, 3.0, 0.5, 0.2);
  for (Eigen::Index i = 0; i < 120; i += 2) e(i, eye_col::kValidLeft) = e(i, eye_col::kValidRight) = 0.0;
  for (Eigen::Index i = 1; i < 120; i += 4) e(i, eye_col::kGazeY) = 0.7;  // into cloth
  const auto s = gaze_ratio(e, kTwoRois);
  EXPECT_EQ(s.valid_samples, 60);
  EXPECT_EQ(s.rois[0].count, 30);
  EXPECT_EQ(s.rois[1].count, 30);
  EXPECT_DOUBLE_EQ(s.rois[0].ratio, 0.5);

  e.col(eye_col::kValidRight).setZero();
  e.col(eye_col::kValidLeft).setZero();
  try {
    gaze_ratio(e, kTwoRois);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.code(), ErrorCode::NoValidGaze);
  }
}

TEST(Gaze, OneEyeIsEnough) {
  Eigen::MatrixXd e = test::eye_epoch(60, 3.0, 0.5, 0.2);
  e.col(eye_col::kValidLeft).setZero();
  EXPECT_EQ(gaze_ratio(e, kTwoRois).valid_samples, 60);
}

TEST(Gaze, BoundaryCountsAsInside) {
  Eigen::MatrixXd e = test::eye_epoch(4);
  e.row(0).segment(2, 2) << 0.25, 0.1;  // top-left corner
  e.row(1).segment(2, 2) << 0.75, 0.4;  // bottom-right corner
  e.row(2).segment(2, 2) << 0.5, 0.4;   // bottom edge
  e.row(3).segment(2, 2) << 0.7500001, 0.2;
  const auto s = gaze_ratio(e, kTwoRois);
  EXPECT_EQ(s.rois[0].count, 3);
}

TEST(Gaze, SampleOrderIrrelevant) {
  Eigen::MatrixXd e = test::eye_epoch(120);
  const auto gx = test::white(120, 3, 0.3), gy = test::white(120, 4, 0.3);
  for (Eigen::Index i = 0; i < 120; ++i) {
    e(i, eye_col::kGazeX) = 0.5 + gx[static_cast<std::size_t>(i)];
    e(i, eye_col::kGazeY) = 0.4 + gy[static_cast<std::size_t>(i)];
    if (i % 7 == 0) e(i, eye_col::kValidLeft) = e(i, eye_col::kValidRight) = 0.0;
  }
  std::vector<Eigen::Index> perm(120);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(11);
  std::shuffle(perm.begin(), perm.end(), rng);
  Eigen::MatrixXd p(120, 6);
  for (Eigen::Index i = 0; i < 120; ++i) p.row(i) = e.row(perm[static_cast<std::size_t>(i)]);
  const auto a = gaze_ratio(e, kTwoRois), b = gaze_ratio(p, kTwoRois);
  for (std::size_t r = 0; r < 2; ++r) EXPECT_EQ(a.rois[r].count, b.rois[r].count);
  EXPECT_EQ(a.valid_samples, b.valid_samples);
}

TEST(Gaze, PoolingSumsCounts) {
  GazeStats a{{{"face", 10, 0.0}}, 20, "m"}, b{{{"face", 30, 0.0}}, 40, "m"}, c{{{"face", 5, 0.0}}, 5, "f"};
  const auto g = pool_gaze({a, b, c});
  EXPECT_DOUBLE_EQ(g.ratio.at("m").at("face"), 40.0 / 60.0);
  EXPECT_DOUBLE_EQ(g.ratio.at("f").at("face"), 1.0);
  EXPECT_EQ(g.valid_samples.at("m"), 60);
}

TEST(Gaze, GroupKey) {
  StimulusEvent ev;
  ev.metadata = {{"viewer_sex", "male"}};
  EXPECT_EQ(group_key(ev, {"viewer_sex", "image_sex"}), "male|?");
  EXPECT_EQ(group_key(ev, {}), "");
}

namespace {

// 54 composites over 18 faces, cloths and colors with posteriors drawn per seed.
struct FactorCase {
  std::map<std::string, double> posterior;
  std::map<std::string, Composition> composition;
};

FactorCase factor_case(std::uint64_t seed) {
  FactorCase fc;
  Rng rng(seed);
  for (int i = 0; i < 18; ++i)
    for (const char* f : {"face", "cloth", "color"}) fc.posterior[std::string(f) + std::to_string(i)] = uniform(rng, 0, 1);
  for (int i = 0; i < 54; ++i) {
    const std::string id = "comp" + std::to_string(i);
    fc.composition[id] = {"face" + std::to_string(i % 18), "cloth" + std::to_string((i * 5 + 1) % 18),
                          "color" + std::to_string((i * 7 + 2) % 18), ""};
    fc.posterior[id] = uniform(rng, 0, 1);
  }
  return fc;
}

std::optional<double> r_of(const std::vector<FactorR>& rs, const std::string& factor, const std::string& group = "") {
  for (const auto& f : rs)
    if (f.factor == factor && f.group == group) return f.r;
  return std::nullopt;
}

}  // namespace

TEST(FactorCorrelation, CopiedFacePosteriorGivesOne) {
  FactorCase fc = factor_case(1);
  for (const auto& [id, c] : fc.composition) fc.posterior[id] = fc.posterior[c.face_id];
  const auto rs = factor_correlation(fc.posterior, fc.composition);
  EXPECT_NEAR(*r_of(rs, "face"), 1.0, 1e-12);
  EXPECT_EQ(strongest_factor(rs), "face");
}

TEST(FactorCorrelation, MirroredColorGivesMinusOne) {
  FactorCase fc = factor_case(2);
  for (const auto& [id, c] : fc.composition) fc.posterior[id] = 1.0 - fc.posterior[c.color_id];
  const auto rs = factor_correlation(fc.posterior, fc.composition);
  EXPECT_NEAR(*r_of(rs, "color"), -1.0, 1e-12);
  EXPECT_NE(strongest_factor(rs), "color");
}

TEST(FactorCorrelation, IndependentPosteriorsNearZero) {
  int small = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const FactorCase fc = factor_case(seed);
    const auto rs = factor_correlation(fc.posterior, fc.composition);
    if (std::abs(*r_of(rs, "face")) < 0.35) ++small;
  }
  EXPECT_GE(small, 95);
}

TEST(FactorCorrelation, MatchesTwoPassPearson) {
  const FactorCase fc = factor_case(5);
  std::vector<double> x, y;
  for (const auto& [id, c] : fc.composition) {
    x.push_back(fc.posterior.at(id));
    y.push_back(fc.posterior.at(c.cloth_id));
  }
  EXPECT_NEAR(*r_of(factor_correlation(fc.posterior, fc.composition), "cloth"), two_pass_pearson(x, y), 1e-12);
}

TEST(FactorCorrelation, MissingPairsDroppedAndCounted) {
  FactorCase fc = factor_case(3);
  fc.posterior.erase("comp0");
  fc.posterior.erase("face1");  // used by comp1, comp19, comp37
  const auto rs = factor_correlation(fc.posterior, fc.composition);
  for (const auto& f : rs) {
    EXPECT_EQ(f.dropped + f.n, 54) << f.factor;
    EXPECT_EQ(f.dropped, f.factor == "face" ? 4 : 1) << f.factor;
  }
}

TEST(FactorCorrelation, TooFewPairs) {
  std::map<std::string, double> post = {{"c1", 0.2}, {"c2", 0.8}, {"f1", 0.1}, {"f2", 0.9}, {"k", 0.5}, {"o", 0.5}};
  std::map<std::string, Composition> comp = {{"c1", {"f1", "k", "o", "g"}}, {"c2", {"f2", "k", "o", "g"}}};
  const auto rs = factor_correlation(post, comp);
  for (const auto& f : rs) EXPECT_FALSE(f.r.has_value());
  try {
    factor_correlation_strict(post, comp);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientPairs);
  }
}

TEST(FactorCorrelation, GroupsKeptApart) {
  FactorCase fc = factor_case(4);
  int i = 0;
  for (auto& [id, c] : fc.composition) {
    c.group = i++ % 2 ? "male" : "female";
    if (c.group == "male") fc.posterior[id] = fc.posterior[c.face_id];
  }
  const auto rs = factor_correlation(fc.posterior, fc.composition);
  EXPECT_EQ(rs.size(), 6u);
  EXPECT_NEAR(*r_of(rs, "face", "male"), 1.0, 1e-12);
  EXPECT_LT(*r_of(rs, "face", "female"), 0.9);
}

TEST(Pearson, StreamingMatchesTwoPass) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto x = test::white(500, seed), y = test::white(500, seed + 100);
    for (std::size_t i = 0; i < x.size(); ++i) {
      x[i] = 1e4 + 3.0 * x[i];  // large offset stresses the one-pass update
      y[i] = -2.0 + 0.5 * x[i] + y[i];
    }
    EXPECT_NEAR(pearson(x, y), two_pass_pearson(x, y), 1e-12) << seed;
  }
  const std::vector<double> c(10, 1.0), v = test::white(10, 1);
  EXPECT_TRUE(std::isnan(pearson(c, v)));
}

TEST(Report, ReferenceBanner) {
  Report r;
  const json j = report_json(r);
  EXPECT_EQ(j["reference_accuracy"]["face"], 0.644);
  EXPECT_EQ(j["reference_accuracy"]["cloth"], 0.645);
  EXPECT_EQ(j["reference_accuracy"]["color"], 0.605);
  EXPECT_EQ(j["reference_accuracy"]["composite"], 0.744);
  EXPECT_EQ(j["reference_accuracy"]["all"], 0.692);
  const std::string csv = report_csv(r);
  EXPECT_NE(csv.find("reference,,composite,0.744"), std::string::npos);
  EXPECT_NE(report_svg(r).find("<svg"), std::string::npos);
}

TEST(Synth, DefaultCounts) {
  const SyntheticSession syn = generate_session(GeneratorConfig{});
  std::map<Category, int> n;
  for (const auto& ev : syn.session.events) ++n[ev.category];
  EXPECT_EQ(n[Category::Face], 30);
  EXPECT_EQ(n[Category::Cloth], 30);
  EXPECT_EQ(n[Category::Color], 30);
  EXPECT_EQ(n[Category::Composite], 54);
  EXPECT_EQ(syn.composition.size(), 54u);
  EXPECT_EQ(syn.truth.size(), 144u);
  EXPECT_TRUE(validate_session(syn.session).empty());
  for (const auto& [id, c] : syn.composition) {
    const auto ids = [&](const std::string& e) {
      return std::any_of(syn.session.events.begin(), syn.session.events.end(),
                         [&](const StimulusEvent& ev) { return ev.event_id == e; });
    };
    EXPECT_TRUE(ids(id) && ids(c.face_id) && ids(c.cloth_id) && ids(c.color_id)) << id;
  }
}

TEST(Synth, PlantedPosteriorsFavourFace) {
  int wins = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    SubjectSpec subject;
    subject.seed = seed;
    const SyntheticSession syn = generate_session(GeneratorConfig{}, subject);
    std::map<std::string, double> post;
    std::map<std::string, Label> label;
    for (const auto& t : syn.truth) post[t.event_id] = t.posterior, label[t.event_id] = t.label;
    wins += strongest_factor(factor_correlation(post, syn.composition)) == "face";
    // parts span the scale: each kind holds both a liked and a disliked image
    std::map<std::string, std::set<Label>> seen;
    for (const auto& [id, c] : syn.composition) {
      seen["face"].insert(label[c.face_id]);
      seen["cloth"].insert(label[c.cloth_id]);
      seen["color"].insert(label[c.color_id]);
    }
    for (const auto& [kind, labels] : seen) EXPECT_EQ(labels.size(), 2u) << kind << " " << seed;
  }
  EXPECT_GE(wins, 48);
}

TEST(Synth, ByteIdenticalForSeed) {
  const auto a = test::temp_dir("synth_a"), b = test::temp_dir("synth_b"), c = test::temp_dir("synth_c");
  const GeneratorConfig g = small_generator();
  generate_corpus(g, 7, a, 2, 1);
  generate_corpus(g, 7, b, 2, 1);
  generate_corpus(g, 8, c, 2, 1);
  EXPECT_EQ(tree(a), tree(b));
  EXPECT_NE(tree(a), tree(c));
}

TEST(Synth, CorpusLayout) {
  const auto dir = test::temp_dir("synth_corpus");
  GeneratorConfig g = small_generator();
  const auto dirs = generate_corpus(g, 3, dir, 13, 7);
  ASSERT_EQ(dirs.size(), 13u);
  int male = 0;
  for (const auto& d : dirs) {
    EXPECT_TRUE(fs::exists(d / "truth.json"));
    const Session s = read_session(d);
    EXPECT_TRUE(validate_session(s).empty()) << d;
    if (s.events.front().metadata.at("viewer_sex") == "male") ++male;
  }
  EXPECT_EQ(male, 7);
}

TEST(Synth, LineNoisePresentThenRemoved) {
  const SyntheticSession syn = generate_session(small_generator());
  const SampleStream& eeg = syn.session.streams.at(0);
  ASSERT_EQ(eeg.kind, StreamKind::Eeg);
  const double rate = eeg.sample_rate_hz;
  const Eigen::MatrixXd filtered = bandpass_notch(eeg.samples, rate);
  const Eigen::Index n = eeg.samples.rows(), from = n / 10, to = n - n / 10;
  for (Eigen::Index c = 0; c < 6; ++c) {
    const double before = tone_amplitude(eeg.samples.col(c), rate, 60.0, from, to);
    const double after = tone_amplitude(filtered.col(c), rate, 60.0, from, to);
    EXPECT_GT(before, 0.5 * GeneratorConfig{}.line_amplitude_uv) << c;
    EXPECT_LT(after, 0.01 * before) << c;  // 40 dB
  }
}

TEST(Synth, EffectSizeRange) {
  GeneratorConfig g = small_generator();
  g.effect_size = 1.5;
  EXPECT_THROW(generate_session(g), Error);
}

TEST(Pipeline, WritesContractFilesDeterministically) {
  const auto corpus = test::temp_dir("pipe_corpus");
  GeneratorConfig g = small_generator();
  g.n_face = g.n_cloth = g.n_color = 20;  // enough per category for 10 folds
  const auto dirs = generate_corpus(g, 5, corpus, 1, 1);
  const auto out1 = test::temp_dir("pipe_run1"), out2 = test::temp_dir("pipe_run2");
  PipelineConfig cfg = quick_config();
  cfg.ica_enabled = false;
  ASSERT_EQ(run_pipeline(cfg, {out1, dirs}), 0) << slurp(out1 / "run.log");
  ASSERT_EQ(run_pipeline(cfg, {out2, dirs}), 0);
  for (const char* f : {"model.json", "report.json", "report.csv", "report.svg", "config.txt", "run.log",
                        "sessions/subject_01/features.csv", "sessions/subject_01/artifact_report.json"})
    EXPECT_TRUE(fs::exists(out1 / f)) << f;
  EXPECT_FALSE(fs::exists(out1 / "FAILED.json"));
  EXPECT_EQ(slurp(out1 / "report.json"), slurp(out2 / "report.json"));
  EXPECT_EQ(slurp(out1 / "model.json"), slurp(out2 / "model.json"));

  const json rep = json::parse(slurp(out1 / "report.json"));
  EXPECT_EQ(rep["ablation"]["ica"], true);
  EXPECT_EQ(rep["ablation"]["despike"], false);
  EXPECT_EQ(rep["ablation"]["plr"], false);
  const json& s = rep["sessions"][0];
  EXPECT_EQ(s["n_trials"].get<std::size_t>(), read_session(dirs[0]).events.size());
  std::set<std::string> cats;
  for (const auto& c : s["category"]) cats.insert(c["name"].get<std::string>());
  EXPECT_EQ(cats, (std::set<std::string>{"face", "cloth", "color", "composite", "all"}));
  EXPECT_EQ(s["modality"].size(), 3u);
  EXPECT_EQ(s["sweep"].size(), 2u);
  EXPECT_FALSE(s["factor_correlation"].empty());
  EXPECT_FALSE(s["gaze"].empty());
  const json bundle = json::parse(slurp(out1 / "model.json"));
  EXPECT_EQ(bundle["schema"], "affect.bundle/1");
  EXPECT_TRUE(bundle["models"].contains("subject_01"));
}

TEST(Pipeline, FailureLeavesMarker) {
  const auto corpus = test::temp_dir("pipe_bad");
  const auto dirs = generate_corpus(small_generator(), 5, corpus, 1, 1);
  fs::remove(dirs[0] / "eye.csv");
  const auto out = test::temp_dir("pipe_bad_run");
  EXPECT_EQ(run_pipeline(quick_config(), {out, dirs}), 1);
  ASSERT_TRUE(fs::exists(out / "FAILED.json"));
  const json j = json::parse(slurp(out / "FAILED.json"));
  EXPECT_EQ(j["stage"], "ingest");
}

TEST(Replay, VersionsFollowSchedule) {
  GeneratorConfig g;
  g.effect_size = 1.0;
  const SyntheticSession syn = generate_replay_session(g, corpus_subject(9, 0, 1), 30, 10);
  PipelineConfig cfg;
  const ReplayLog log = session_replay(cfg, syn.session, {3, 6, 9});
  std::istringstream lines(log.csv);
  std::string line;
  int rows = -1;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 10);
  EXPECT_EQ(log.summary["model_versions"], 4);
  EXPECT_GE(log.summary["agreement"].get<double>(), 0.8);
  EXPECT_EQ(session_replay(cfg, syn.session, {}).summary["model_versions"], 1);
}

TEST(Replay, NeedsPhaseMetadata) {
  GeneratorConfig g = small_generator();
  const SyntheticSession syn = generate_session(g);
  EXPECT_THROW(session_replay(PipelineConfig{}, syn.session, {3}), Error);
}

TEST(Cli, ExitCodes) {
  const auto dir = test::temp_dir("cli");
  EXPECT_EQ(run_cli("--help", dir / "help.txt"), 0);
  EXPECT_EQ(run_cli("", dir / "none.txt"), 2);
  EXPECT_EQ(run_cli("frobnicate", dir / "unknown.txt"), 2);
  EXPECT_EQ(run_cli("synth --effect-size 2", dir / "range.txt"), 2);
  EXPECT_EQ(run_cli("validate " + (dir / "missing").string(), dir / "missing.txt"), 1);
  EXPECT_EQ(run_cli("synth --corpus --subjects 1 --seed 3 --out " + (dir / "corpus").string(), dir / "synth.txt"), 0);
  EXPECT_TRUE(fs::exists(dir / "corpus" / "subject_01" / "truth.json"));
  EXPECT_EQ(run_cli("validate " + (dir / "corpus" / "subject_01").string(), dir / "validate.txt"), 0);
  EXPECT_EQ(run_cli("synth --replay --out " + (dir / "replay").string(), dir / "replay.txt"), 0);
  EXPECT_EQ(run_cli("session-replay --out " + (dir / "replayed").string() + " " + (dir / "replay").string(),
                    dir / "session_replay.txt"),
            0);
  EXPECT_TRUE(fs::exists(dir / "replayed" / "replay.csv"));
}
