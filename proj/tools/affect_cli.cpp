// affect: command-line front end for the attraction-recognition pipeline.
//
// Exit status: 0 ok, 1 domain error, 2 usage error.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "affect/affect.hpp"

namespace fs = std::filesystem;
using namespace affect;

namespace {

struct Common {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  bool no_ica = false;
  bool no_despike = false;
  bool no_plr = false;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "key = value config file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "master seed (overrides config)");
  cmd->add_option("--out", c.out, "output file or directory");
  cmd->add_option("--set", c.overrides, "config override key=value (repeatable)");
  cmd->add_flag("--no-ica", c.no_ica, "skip ICA artifact rejection");
  cmd->add_flag("--no-despike", c.no_despike, "skip wavelet despiking");
  cmd->add_flag("--no-plr", c.no_plr, "skip pupillary light reflex removal");
}

PipelineConfig load_config(const Common& c, const CLI::App* cmd) {
  PipelineConfig cfg;
  if (!c.config_path.empty()) cfg = parse_config(read_file(c.config_path));
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos, ErrorCode::InvalidConfig, "--set expects key=value, got '" + kv + "'");
    config_set(cfg, std::string(trim(std::string_view(kv).substr(0, eq))), std::string_view(kv).substr(eq + 1));
  }
  if (cmd->count("--seed") > 0) cfg.seed = c.seed;
  if (c.no_ica) cfg.ica_enabled = false;
  if (c.no_despike) cfg.despike_enabled = false;
  if (c.no_plr) cfg.plr_enabled = false;
  validate_config(cfg);
  return cfg;
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    if (fs::path(out).has_parent_path()) fs::create_directories(fs::path(out).parent_path());
    write_file(out, text);
  }
}

Session load_session(const std::string& dir, const PipelineConfig& cfg) {
  Session s = read_session(dir, ingest_options(cfg));
  const auto diags = validate_session(s, cfg.allow_any_rate);
  if (!diags.empty())
    throw Error(ErrorCode::Ingest, dir + ": " + diags.front().location + ": " + diags.front().message + " (" +
                                       std::to_string(diags.size()) + " problems)");
  return s;
}

FeatureMatrix load_features(const std::string& path) { return feature_matrix_from_csv(read_file(path)); }

std::vector<int> parse_schedule(const std::string& s) {
  std::vector<int> out;
  for (auto p : split(s, ',')) {
    if (trim(p).empty()) continue;
    out.push_back(static_cast<int>(parse_int(trim(p))));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EEG + eye-tracking attraction recognition"};
  app.require_subcommand(1);

  Common common;

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic corpus (or one replay session)");
  add_common(synth, common);
  double effect_size = 1.0;
  int n_subjects = 13, n_male = 7;
  bool replay = false, corpus = false;
  int n_train = 30, n_predict = 10;
  synth->add_option("--effect-size", effect_size, "strength of the planted like signature")->check(CLI::Range(0.0, 1.0));
  synth->add_option("--subjects", n_subjects)->check(CLI::PositiveNumber);
  synth->add_option("--male", n_male)->check(CLI::NonNegativeNumber);
  auto* corpus_flag = synth->add_flag("--corpus", corpus, "write the subject corpus (the default)");
  synth->add_flag("--replay", replay, "write a single train/predict session instead")->excludes(corpus_flag);
  synth->add_option("--train", n_train);
  synth->add_option("--predict", n_predict);

  // validate
  auto* validate = app.add_subcommand("validate", "check session directories");
  add_common(validate, common);
  std::vector<std::string> sessions;
  validate->add_option("sessions", sessions)->required();

  // preprocess
  auto* preprocess = app.add_subcommand("preprocess", "filter, clean and epoch one session");
  add_common(preprocess, common);
  std::string session_dir;
  preprocess->add_option("session", session_dir)->required();

  // features
  auto* features = app.add_subcommand("features", "extract the feature matrix of one session");
  add_common(features, common);
  bool layout_only = false;
  features->add_flag("--layout", layout_only, "print the column names and exit");
  features->add_option("session", session_dir);

  // select
  auto* select = app.add_subcommand("select", "rank features of a feature CSV");
  add_common(select, common);
  std::string features_csv;
  int top_k = -1;
  double alpha = -1;
  std::vector<std::string> forced;
  select->add_option("features_csv", features_csv)->required();
  select->add_option("--top-k", top_k);
  select->add_option("--alpha", alpha);
  select->add_option("--features", forced, "explicit feature names or globs (skip ranking)");

  // train
  auto* train_cmd = app.add_subcommand("train", "train a model on a feature CSV");
  add_common(train_cmd, common);
  train_cmd->add_option("features_csv", features_csv)->required();

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "apply a model to a feature CSV");
  add_common(predict_cmd, common);
  std::string model_path, bundle_session;
  predict_cmd->add_option("model", model_path)->required()->check(CLI::ExistingFile);
  predict_cmd->add_option("features_csv", features_csv)->required();
  predict_cmd->add_option("--session", bundle_session, "session id when the model file is a run bundle");

  // cv
  auto* cv_cmd = app.add_subcommand("cv", "repeated stratified cross-validation on a feature CSV");
  add_common(cv_cmd, common);
  cv_cmd->add_option("features_csv", features_csv)->required();

  // report
  auto* report = app.add_subcommand("report", "full pipeline over session directories");
  add_common(report, common);
  report->add_option("sessions", sessions)->required();

  // session-replay
  auto* replay_cmd = app.add_subcommand("session-replay", "offline replay with incremental retraining");
  add_common(replay_cmd, common);
  std::string schedule_text;
  replay_cmd->add_option("session", session_dir)->required();
  replay_cmd->add_option("--schedule", schedule_text, "comma separated retrain points, \"\" for none");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      const PipelineConfig cfg = load_config(common, synth);
      GeneratorConfig g;
      g.effect_size = effect_size;
      const fs::path out = common.out.empty() ? fs::path("corpus") : fs::path(common.out);
      if (replay) {
        SubjectSpec subject = corpus_subject(cfg.seed, 0, 1);
        const SyntheticSession syn = generate_replay_session(g, subject, n_train, n_predict);
        write_session(syn.session, out);
        write_file((out / "truth.json").string(), syn.truth_json().dump(2) + "\n");
        std::cout << out.string() << "\n";
      } else {
        if (synth->count("--male") == 0) n_male = std::min(n_male, n_subjects);
        for (const auto& d : generate_corpus(g, cfg.seed, out, n_subjects, n_male)) std::cout << d.string() << "\n";
      }
      return 0;
    }

    if (validate->parsed()) {
      const PipelineConfig cfg = load_config(common, validate);
      int bad = 0;
      for (const auto& dir : sessions) {
        const Session s = read_session(dir, ingest_options(cfg));
        const auto diags = validate_session(s, cfg.allow_any_rate);
        for (const auto& d : diags) std::cout << dir << ": " << d.location << ": " << d.message << "\n";
        if (diags.empty()) std::cout << dir << ": ok (" << s.events.size() << " events)\n";
        bad += diags.empty() ? 0 : 1;
      }
      return bad == 0 ? 0 : 1;
    }

    if (preprocess->parsed()) {
      const PipelineConfig cfg = load_config(common, preprocess);
      const Session s = load_session(session_dir, cfg);
      const PreprocessResult pre = preprocess_session(s, cfg);
      json j;
      j["session_id"] = s.session_id;
      j["artifacts"] = to_json(pre.artifacts);
      j["plr"] = pre.plr ? json{{"slope", pre.plr->slope},
                                {"intercept", pre.plr->intercept},
                                {"mean_luminance", pre.plr->mean_luminance},
                                {"n_trials", pre.plr->n_trials}}
                         : json(nullptr);
      json trials = json::array();
      for (const auto& t : pre.trials)
        trials.push_back({{"event_id", t.event_id}, {"quality", to_string(t.quality_flags)}});
      j["trials"] = trials;
      j["warnings"] = pre.warnings;
      emit(common.out, j.dump(2) + "\n");
      return 0;
    }

    if (features->parsed()) {
      const PipelineConfig cfg = load_config(common, features);
      if (layout_only) {
        std::string text;
        for (const auto& n : feature_layout(cfg.features).names) text += n + "\n";
        emit(common.out, text);
        return 0;
      }
      if (session_dir.empty()) throw CLI::RequiredError("session");
      const Session s = load_session(session_dir, cfg);
      const PreprocessResult pre = preprocess_session(s, cfg);
      std::vector<std::string> warnings;
      const FeatureMatrix m = session_features(pre, cfg, s.session_id, warnings);
      for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
      emit(common.out, feature_matrix_to_csv(m));
      return 0;
    }

    if (select->parsed()) {
      PipelineConfig cfg = load_config(common, select);
      if (alpha >= 0) cfg.train.alpha = alpha;
      if (top_k >= 0) cfg.train.top_k = top_k;
      const FeatureMatrix m = load_features(features_csv);
      std::string text = "rank,feature,score\n";
      if (!forced.empty()) {
        const auto cols = resolve_columns(m.names, forced);
        for (std::size_t i = 0; i < cols.size(); ++i)
          text += std::to_string(i + 1) + "," + m.names[static_cast<std::size_t>(cols[i])] + ",\n";
      } else {
        const FeatureRanking r = rank_features(m.values, m.label_signs(), cfg.train.alpha);
        const auto top = select_top_k(r, std::min<int>(cfg.train.top_k, static_cast<int>(m.cols())));
        for (std::size_t i = 0; i < top.size(); ++i) {
          const auto c = static_cast<std::size_t>(top[i]);
          text += std::to_string(i + 1) + "," + m.names[c] + "," + format_double(r.scores[c]) + "\n";
        }
      }
      emit(common.out, text);
      return 0;
    }

    if (train_cmd->parsed()) {
      const PipelineConfig cfg = load_config(common, train_cmd);
      const TrainedModel model = train(load_features(features_csv), cfg.train, cfg.seed);
      emit(common.out.empty() ? "model.json" : common.out, to_json(model).dump(2) + "\n");
      return 0;
    }

    if (predict_cmd->parsed()) {
      load_config(common, predict_cmd);
      json j = json::parse(read_file(model_path));
      if (j.value("schema", "") == "affect.bundle/1") {
        const auto& models = j.at("models");
        if (bundle_session.empty()) {
          require(models.size() == 1, ErrorCode::InvalidConfig, "bundle holds several models; pass --session");
          j = models.begin().value();
        } else {
          require(models.contains(bundle_session), ErrorCode::InvalidConfig,
                  "bundle has no model for session " + bundle_session);
          j = models.at(bundle_session);
        }
      }
      const TrainedModel model = model_from_json(j);
      const FeatureMatrix m = load_features(features_csv);
      const auto preds = predict(model, m);
      std::string text = "row,event_id,decision,posterior,predicted,label\n";
      for (std::size_t i = 0; i < preds.size(); ++i) {
        const std::string ev = i < m.event_ids.size() ? m.event_ids[i] : "";
        const std::string truth = i < m.labels.size() ? std::string(to_string(m.labels[i])) : "";
        text += std::to_string(i) + "," + ev + "," + format_double(preds[i].decision) + "," +
                format_double(preds[i].posterior) + "," + std::string(to_string(preds[i].label)) + "," + truth + "\n";
      }
      emit(common.out, text);
      return 0;
    }

    if (cv_cmd->parsed()) {
      const PipelineConfig cfg = load_config(common, cv_cmd);
      const CvResult r = cross_validate(load_features(features_csv), cfg.train, cfg.cv, cfg.seed);
      json j = {{"mean_accuracy", r.mean_accuracy},
                {"std_accuracy", r.std_accuracy},
                {"repeat_accuracy", r.repeat_accuracy},
                {"n_samples", r.n_samples},
                {"n_folds", r.n_folds},
                {"n_repeats", r.n_repeats}};
      emit(common.out, j.dump(2) + "\n");
      return 0;
    }

    if (report->parsed()) {
      const PipelineConfig cfg = load_config(common, report);
      RunOptions opts;
      opts.out_dir = common.out.empty() ? fs::path("run") : fs::path(common.out);
      for (const auto& s : sessions) opts.sessions.emplace_back(s);
      const int rc = run_pipeline(cfg, opts);
      if (rc != 0) std::cerr << "error: see " << (opts.out_dir / "FAILED.json").string() << "\n";
      return rc;
    }

    if (replay_cmd->parsed()) {
      const PipelineConfig cfg = load_config(common, replay_cmd);
      const std::vector<int> schedule =
          replay_cmd->count("--schedule") > 0 ? parse_schedule(schedule_text) : cfg.replay_schedule;
      const Session s = load_session(session_dir, cfg);
      const ReplayLog log = session_replay(cfg, s, schedule);
      if (common.out.empty()) {
        std::cout << log.csv;
      } else {
        fs::create_directories(common.out);
        write_file((fs::path(common.out) / "replay.csv").string(), log.csv);
        write_file((fs::path(common.out) / "replay.json").string(), log.summary.dump(2) + "\n");
      }
      std::cerr << "agreement " << format_double(log.summary["agreement"].get<double>()) << ", model versions "
                << log.summary["model_versions"].dump() << "\n";
      return 0;
    }
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
