#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "affect/analysis/correlation.hpp"
#include "affect/analysis/gaze.hpp"
#include "affect/analysis/report.hpp"
#include "affect/classify/cv.hpp"
#include "affect/classify/incremental.hpp"
#include "affect/classify/model.hpp"
#include "affect/core/epoch.hpp"
#include "affect/core/session_io.hpp"
#include "affect/core/validate.hpp"
#include "affect/features/extract.hpp"
#include "affect/pipeline/config.hpp"

namespace affect {

/// Error tagged with the pipeline stage and the session / trial involved.
class StageError : public Error {
 public:
  StageError(const Error& cause, std::string stage, std::string session, std::string trial = "")
      : Error(cause.code(), "[" + stage + "] " + session + (trial.empty() ? "" : "/" + trial) + ": " + cause.what()),
        stage_(std::move(stage)),
        session_(std::move(session)),
        trial_(std::move(trial)),
        detail_(cause.what()) {}

  const std::string& stage() const { return stage_; }
  const std::string& session() const { return session_; }
  const std::string& trial() const { return trial_; }
  const std::string& detail() const { return detail_; }

 private:
  std::string stage_, session_, trial_, detail_;
};

// FNV-1a; stable across platforms, unlike std::hash.
inline std::uint64_t stable_hash(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

template <typename F>
auto in_stage(const std::string& stage, const std::string& session, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(e, stage, session);
  }
}

/// Append-only line log, flushed per line.
class RunLog {
 public:
  RunLog() = default;
  explicit RunLog(const std::filesystem::path& path) : out_(path, std::ios::app) {}
  void line(const std::string& s) {
    lines_.push_back(s);
    if (out_.is_open()) out_ << s << '\n' << std::flush;
  }
  const std::vector<std::string>& lines() const { return lines_; }

 private:
  std::ofstream out_;
  std::vector<std::string> lines_;
};

struct PreprocessResult {
  std::vector<Trial> trials;
  ArtifactReport artifacts;
  std::optional<PlrFit> plr;
  int plr_flagged = 0;
  std::vector<std::string> warnings;
};

/// Filter -> ICA -> wavelet despike on the continuous EEG, then epoching
/// and pupil light-reflex removal.
inline PreprocessResult preprocess_session(const Session& input, const PipelineConfig& cfg, RunLog* log = nullptr) {
  Session session = input;
  session.epoch_length_s = cfg.epoch_length_s;
  const std::string& sid = session.session_id;
  PreprocessResult out;
  SampleStream* eeg = session.find_stream(StreamKind::Eeg);
  in_stage("preprocess", sid, [&] {
    require(eeg != nullptr, ErrorCode::MissingStream, "no EEG stream");
    require(session.find_stream(StreamKind::Eye) != nullptr, ErrorCode::MissingStream, "no eye stream");
  });

  eeg->samples = in_stage("filter", sid, [&] { return bandpass_notch(eeg->samples, eeg->sample_rate_hz, cfg.filter); });

  if (cfg.ica_enabled) {
    in_stage("ica", sid, [&] {
      IcaConfig ic = cfg.ica;
      ic.seed = derive_seed(cfg.seed, 0x1CA);
      IcaRejection rej = ica_artifact_reject(eeg->samples, eeg->sample_rate_hz, eeg->channel_names, ic);
      out.artifacts = rej.report;
      eeg->samples = std::move(rej.cleaned);
      if (!rej.report.ica_converged) out.warnings.push_back(sid + ": ICA did not converge; identity transform used");
    });
  }
  if (cfg.despike_enabled) {
    in_stage("despike", sid, [&] {
      for (Eigen::Index c = 0; c < eeg->samples.cols(); ++c) {
        const Eigen::VectorXd col = eeg->samples.col(c);
        const auto r = wavelet_despike(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                                       cfg.despike);
        eeg->samples.col(c) = Eigen::Map<const Eigen::VectorXd>(r.signal.data(), col.size());
        out.artifacts.despiked_coefficients.push_back(r.clipped);
      }
    });
  }
  if (log)
    log->line("preprocess " + sid + ": ica_removed=" + std::to_string(out.artifacts.n_components_removed) +
              " despike=" + (cfg.despike_enabled ? "on" : "off"));

  out.trials = in_stage("epoch", sid, [&] { return epoch_all(session, epoch_options(cfg)); });

  if (cfg.plr_enabled) {
    in_stage("plr", sid, [&] {
      std::vector<Trial> usable;
      for (const auto& t : out.trials)
        if (trial_usable(t)) usable.push_back(t);
      try {
        const PlrFit fit = fit_light_reflex(usable, cfg.plr);
        for (auto& t : out.trials) {
          if (!t.event.luminance) ++out.plr_flagged;
          apply_light_reflex(t, fit);
        }
        out.plr = fit;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::InsufficientLuminance) throw;
        out.plr_flagged = static_cast<int>(out.trials.size());
        out.warnings.push_back(sid + ": " + e.what() + "; pupil left uncorrected");
      }
    });
  }
  return out;
}

inline FeatureMatrix session_features(const PreprocessResult& pre, const PipelineConfig& cfg, const std::string& sid,
                                      std::vector<std::string>& warnings) {
  ExtractionLog xlog;
  FeatureMatrix m = in_stage("features", sid, [&] { return build_feature_matrix(pre.trials, cfg.features, &xlog); });
  for (auto& w : xlog.warnings) warnings.push_back(sid + ": " + w);
  return m;
}

/// Rows of `m` whose category is `c`.
inline FeatureMatrix rows_of_category(const FeatureMatrix& m, Category c) {
  std::vector<int> idx;
  for (std::size_t i = 0; i < m.categories.size(); ++i)
    if (m.categories[i] == c) idx.push_back(static_cast<int>(i));
  return m.select_rows(idx);
}

struct RunOptions {
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> sessions;
};

inline void write_failure_marker(const std::filesystem::path& dir, const Error& e) {
  json j;
  j["status"] = "failed";
  j["code"] = to_string(e.code());
  j["message"] = e.what();
  if (const auto* se = dynamic_cast<const StageError*>(&e)) {
    j["stage"] = se->stage();
    j["session"] = se->session();
    j["trial"] = se->trial();
  }
  std::filesystem::create_directories(dir);
  write_file((dir / "FAILED.json").string(), j.dump(2) + "\n");
}

/// Analysis of one session: CV per category and pooled, modality ablation,
/// training-size sweep, gaze ratios and factor correlation.
inline SessionReport analyse_session(const std::string& sid, const PreprocessResult& pre, const FeatureMatrix& m,
                                     const PipelineConfig& cfg, RunLog* log) {
  SessionReport r;
  r.session_id = sid;
  r.n_trials = static_cast<int>(pre.trials.size());
  r.n_used = static_cast<int>(m.rows());
  r.artifacts = pre.artifacts;
  if (pre.plr) r.plr_slope = pre.plr->slope;
  const std::uint64_t seed = derive_seed(cfg.seed, stable_hash(sid));

  auto run_cv = [&](const std::string& name, const FeatureMatrix& sub, double fraction) -> std::optional<CvSummary> {
    CvConfig cv = cfg.cv;
    cv.train_fraction = fraction;
    try {
      const CvResult res = cross_validate(sub, cfg.train, cv, seed);
      if (log)
        log->line("cv " + sid + " " + name + ": mean=" + format_double(res.mean_accuracy) +
                  " std=" + format_double(res.std_accuracy));
      return CvSummary{name, res.mean_accuracy, res.std_accuracy, res.n_samples, fraction};
    } catch (const Error& e) {
      if (e.code() != ErrorCode::TooFewSamples && e.code() != ErrorCode::UnstratifiableFolds) throw;
      r.warnings.push_back(sid + ": cv '" + name + "' skipped: " + e.what());
      return std::nullopt;
    }
  };

  in_stage("cv", sid, [&] {
    for (Category c : {Category::Face, Category::Cloth, Category::Color, Category::Composite}) {
      const FeatureMatrix sub = rows_of_category(m, c);
      if (sub.rows() == 0) continue;
      if (auto s = run_cv(std::string(to_string(c)), sub, 1.0)) r.category.push_back(*s);
    }
    std::optional<CvResult> pooled;
    {
      CvConfig cv = cfg.cv;
      try {
        pooled = cross_validate(m, cfg.train, cv, seed);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::TooFewSamples && e.code() != ErrorCode::UnstratifiableFolds) throw;
        r.warnings.push_back(sid + ": pooled cv skipped: " + e.what());
      }
    }
    if (!pooled) return;
    r.category.push_back({"all", pooled->mean_accuracy, pooled->std_accuracy, pooled->n_samples, 1.0});
    if (log)
      log->line("cv " + sid + " all: mean=" + format_double(pooled->mean_accuracy) +
                " std=" + format_double(pooled->std_accuracy));

    r.modality.push_back({"both", pooled->mean_accuracy, pooled->std_accuracy, pooled->n_samples, 1.0});
    for (Modality mod : {Modality::Eeg, Modality::Eye})
      if (auto s = run_cv(std::string(to_string(mod)), m.select_columns(columns_of(m, mod)), 1.0))
        r.modality.push_back(*s);

    for (double f : cfg.sweep_fractions) {
      if (f >= 1.0) {
        r.sweep.push_back({"1", pooled->mean_accuracy, pooled->std_accuracy, pooled->n_samples, 1.0});
        continue;
      }
      if (auto s = run_cv(format_double(f), m, f)) r.sweep.push_back(*s);
    }

    std::map<std::string, double> posterior;
    for (std::size_t i = 0; i < m.event_ids.size(); ++i) posterior[m.event_ids[i]] = pooled->oof_posterior[i];
    std::map<std::string, Composition> grouped, pooled_comp;
    for (const auto& t : pre.trials) {
      if (t.event.category != Category::Composite) continue;
      const auto& md = t.event.metadata;
      if (!md.count("face_id") || !md.count("cloth_id") || !md.count("color_id")) continue;
      grouped[t.event_id] = {md.at("face_id"), md.at("cloth_id"), md.at("color_id"), group_key(t.event, cfg.grouping)};
      pooled_comp[t.event_id] = {md.at("face_id"), md.at("cloth_id"), md.at("color_id"), "all"};
    }
    r.factors = factor_correlation(posterior, pooled_comp);
    for (auto& f : factor_correlation(posterior, grouped)) r.factors.push_back(std::move(f));
  });

  in_stage("gaze", sid, [&] {
    std::vector<GazeStats> stats;
    for (const auto& t : pre.trials) {
      if (t.event.rois.empty()) continue;
      try {
        stats.push_back(gaze_ratio(t, cfg.grouping));
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NoValidGaze) throw;
        r.warnings.push_back(sid + ": trial " + t.event_id + " has no valid gaze");
      }
    }
    r.gaze = pool_gaze(stats);
  });
  for (const auto& w : pre.warnings) r.warnings.push_back(w);
  return r;
}

/// End-to-end run over session directories. Returns the process exit
/// status (0 ok, 1 domain error); a failure leaves FAILED.json behind.
inline int run_pipeline(const PipelineConfig& cfg, const RunOptions& opts) {
  namespace fs = std::filesystem;
  fs::create_directories(opts.out_dir);
  fs::remove(opts.out_dir / "FAILED.json");
  fs::remove(opts.out_dir / "run.log");
  RunLog log(opts.out_dir / "run.log");
  try {
    validate_config(cfg);
    write_file((opts.out_dir / "config.txt").string(), config_to_text(cfg));
    Report report;
    report.seed = cfg.seed;
    report.ablation = {{"ica", !cfg.ica_enabled}, {"despike", !cfg.despike_enabled}, {"plr", !cfg.plr_enabled}};
    json bundle;
    bundle["schema"] = "affect.bundle/1";
    bundle["models"] = json::object();
    for (const auto& dir : opts.sessions) {
      const Session session = in_stage("ingest", dir.string(), [&] { return read_session(dir, ingest_options(cfg)); });
      const std::string& sid = session.session_id;
      log.line("session " + sid + ": " + std::to_string(session.events.size()) + " events");
      const auto diags = validate_session(session, cfg.allow_any_rate);
      if (!diags.empty()) {
        for (const auto& d : diags) log.line("invalid " + sid + " " + d.location + ": " + d.message);
        throw StageError(Error(ErrorCode::Ingest, std::to_string(diags.size()) + " validation errors, first: " +
                                                      diags.front().location + ": " + diags.front().message),
                         "validate", sid);
      }
      const PreprocessResult pre = preprocess_session(session, cfg, &log);
      std::vector<std::string> warnings;
      const FeatureMatrix m = session_features(pre, cfg, sid, warnings);
      const fs::path sdir = opts.out_dir / "sessions" / sid;
      fs::create_directories(sdir);
      write_file((sdir / "features.csv").string(), feature_matrix_to_csv(m));
      write_file((sdir / "artifact_report.json").string(), to_json(pre.artifacts).dump(2) + "\n");
      log.line("features " + sid + ": " + std::to_string(m.rows()) + " x " + std::to_string(m.cols()));

      const TrainedModel model = in_stage("train", sid, [&] { return train(m, cfg.train, cfg.seed); });
      bundle["models"][sid] = to_json(model);
      log.line("train " + sid + ": " + std::to_string(model.selected.size()) + " features, " +
               std::to_string(model.support_vectors.rows()) + " support vectors");

      SessionReport sr = analyse_session(sid, pre, m, cfg, &log);
      sr.warnings.insert(sr.warnings.begin(), warnings.begin(), warnings.end());
      for (const auto& w : sr.warnings) log.line("warning " + w);
      report.sessions.push_back(std::move(sr));
    }
    write_file((opts.out_dir / "model.json").string(), bundle.dump(2) + "\n");
    write_report(report, opts.out_dir);
    log.line("done");
    return 0;
  } catch (const Error& e) {
    log.line(std::string("error ") + e.what());
    write_failure_marker(opts.out_dir, e);
    return 1;
  }
}

struct ReplayLog {
  ReplayResult result;
  std::string csv;
  json summary;
};

/// Replays a recorded session: events tagged phase=train build the initial
/// model, phase=predict events arrive in time order.
inline ReplayLog session_replay(const PipelineConfig& cfg, const Session& session, const std::vector<int>& schedule) {
  const std::string& sid = session.session_id;
  const PreprocessResult pre = preprocess_session(session, cfg);
  std::vector<std::string> warnings;
  const FeatureMatrix m = session_features(pre, cfg, sid, warnings);
  std::map<std::string, std::string> phase;
  for (const auto& ev : session.events) {
    const auto it = ev.metadata.find("phase");
    if (it != ev.metadata.end()) phase[ev.event_id] = it->second;
  }
  std::vector<int> tr, te;
  for (std::size_t i = 0; i < m.event_ids.size(); ++i) {
    const auto it = phase.find(m.event_ids[i]);
    require(it != phase.end() && (it->second == "train" || it->second == "predict"), ErrorCode::Ingest,
            "event " + m.event_ids[i] + " lacks phase=train|predict metadata");
    (it->second == "train" ? tr : te).push_back(static_cast<int>(i));
  }
  ReplayLog out;
  out.result = in_stage("replay", sid, [&] {
    return incremental_session(m.select_rows(tr), m.select_rows(te), schedule, cfg.train, cfg.seed);
  });
  out.csv = "trial,event_id,predicted,posterior,truth,model_version\n";
  int agree = 0;
  for (const auto& r : out.result.records) {
    out.csv += std::to_string(r.trial) + "," + r.event_id + "," + std::string(to_string(r.prediction.label)) + "," +
               format_double(r.prediction.posterior) + "," + std::string(to_string(r.truth)) + "," +
               std::to_string(r.model_version) + "\n";
    if (r.prediction.label == r.truth) ++agree;
  }
  out.summary = {{"session_id", sid},
                 {"n_train", static_cast<int>(tr.size())},
                 {"n_predict", static_cast<int>(te.size())},
                 {"schedule", schedule},
                 {"model_versions", out.result.versions_used()},
                 {"agreement", te.empty() ? 0.0 : static_cast<double>(agree) / static_cast<double>(te.size())},
                 {"warnings", warnings}};
  return out;
}

}  // namespace affect
