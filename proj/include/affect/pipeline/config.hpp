#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "affect/classify/cv.hpp"
#include "affect/classify/model.hpp"
#include "affect/core/epoch.hpp"
#include "affect/core/session_io.hpp"
#include "affect/core/text.hpp"
#include "affect/features/extract.hpp"
#include "affect/preprocess/despike.hpp"
#include "affect/preprocess/filter.hpp"
#include "affect/preprocess/ica.hpp"
#include "affect/preprocess/plr.hpp"

namespace affect {

/// Every tunable of the pipeline. Text form: one `key = value` per line,
/// `#` starts a comment, lists are comma separated.
struct PipelineConfig {
  FilterSpec filter;
  bool ica_enabled = true;
  IcaConfig ica;
  bool despike_enabled = true;
  DespikeConfig despike;
  bool plr_enabled = true;
  PlrConfig plr;
  FeatureOptions features;
  TrainConfig train;
  CvConfig cv;
  std::vector<int> replay_schedule = {3, 6, 9};
  std::vector<double> sweep_fractions = {0.25, 0.5, 0.75, 1.0};
  std::vector<std::string> grouping = {"viewer_sex", "image_sex"};
  std::uint64_t seed = 42;
  double epoch_length_s = 2.0;
  int label_threshold = 5;
  bool allow_any_rate = false;

  friend bool operator==(const PipelineConfig& a, const PipelineConfig& b);
};

namespace config_detail {

inline std::string join_list(const std::vector<std::string>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
  return s;
}

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  if (trim(s).empty()) return out;
  for (auto p : split(s, ',')) out.emplace_back(trim(p));
  return out;
}

inline bool parse_bool(std::string_view s) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw Error(ErrorCode::InvalidConfig, "not a boolean: '" + std::string(s) + "'");
}

struct Binding {
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, std::string_view)> set;
};

template <typename F>
Binding real(F field) {
  return {[field](const PipelineConfig& c) { return format_double(field(const_cast<PipelineConfig&>(c))); },
          [field](PipelineConfig& c, std::string_view v) {
            const double d = parse_double(v);
            require(std::isfinite(d), ErrorCode::InvalidConfig, "not a finite number: '" + std::string(v) + "'");
            field(c) = d;
          }};
}

template <typename F>
Binding integer(F field) {
  return {[field](const PipelineConfig& c) { return std::to_string(field(const_cast<PipelineConfig&>(c))); },
          [field](PipelineConfig& c, std::string_view v) {
            field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(parse_int(v));
          }};
}

template <typename F>
Binding boolean(F field) {
  return {[field](const PipelineConfig& c) { return std::string(field(const_cast<PipelineConfig&>(c)) ? "true" : "false"); },
          [field](PipelineConfig& c, std::string_view v) { field(c) = parse_bool(v); }};
}

inline const std::map<std::string, Binding>& bindings() {
  using C = PipelineConfig;
  static const std::map<std::string, Binding> table = {
      {"filter.band_low_hz", real([](C& c) -> double& { return c.filter.band_low_hz; })},
      {"filter.band_high_hz", real([](C& c) -> double& { return c.filter.band_high_hz; })},
      {"filter.notch_hz", real([](C& c) -> double& { return c.filter.notch_hz; })},
      {"filter.notch_q", real([](C& c) -> double& { return c.filter.notch_q; })},
      {"filter.order", integer([](C& c) -> int& { return c.filter.filter_order; })},
      {"ica.enabled", boolean([](C& c) -> bool& { return c.ica_enabled; })},
      {"ica.max_iterations", integer([](C& c) -> int& { return c.ica.max_iterations; })},
      {"ica.tolerance", real([](C& c) -> double& { return c.ica.tolerance; })},
      {"ica.eog_correlation", real([](C& c) -> double& { return c.ica.eog_correlation_threshold; })},
      {"ica.kurtosis", real([](C& c) -> double& { return c.ica.kurtosis_threshold; })},
      {"ica.eog_lowpass_hz", real([](C& c) -> double& { return c.ica.eog_lowpass_hz; })},
      {"ica.min_duration_s", real([](C& c) -> double& { return c.ica.min_duration_s; })},
      {"despike.enabled", boolean([](C& c) -> bool& { return c.despike_enabled; })},
      {"despike.levels", integer([](C& c) -> int& { return c.despike.levels; })},
      {"despike.mad_multiplier", real([](C& c) -> double& { return c.despike.mad_multiplier; })},
      {"plr.enabled", boolean([](C& c) -> bool& { return c.plr_enabled; })},
      {"plr.min_trials", integer([](C& c) -> int& { return c.plr.min_trials; })},
      {"eye.fixation_dispersion", real([](C& c) -> double& { return c.features.eye.fixation_dispersion; })},
      {"eye.fixation_min_duration_s", real([](C& c) -> double& { return c.features.eye.fixation_min_duration_s; })},
      {"eye.saccade_velocity", real([](C& c) -> double& { return c.features.eye.saccade_velocity; })},
      {"eye.psd_ar_order", integer([](C& c) -> int& { return c.features.eye.psd_ar_order; })},
      {"features.fd_k_max", integer([](C& c) -> int& { return c.features.fd_k_max; })},
      {"features.hoc_max_order", integer([](C& c) -> int& { return c.features.hoc_max_order; })},
      {"select.alpha", real([](C& c) -> double& { return c.train.alpha; })},
      {"select.top_k", integer([](C& c) -> int& { return c.train.top_k; })},
      {"select.features",
       {[](const C& c) { return join_list(c.train.forced_features); },
        [](C& c, std::string_view v) { c.train.forced_features = split_list(v); }}},
      {"svm.degree", integer([](C& c) -> int& { return c.train.kernel.degree; })},
      {"svm.gamma", real([](C& c) -> double& { return c.train.kernel.gamma; })},
      {"svm.coef0", real([](C& c) -> double& { return c.train.kernel.coef0; })},
      {"svm.C", real([](C& c) -> double& { return c.train.kernel.c; })},
      {"svm.eps", real([](C& c) -> double& { return c.train.smo.eps; })},
      {"svm.max_iterations", integer([](C& c) -> long& { return c.train.smo.max_iterations; })},
      {"calibration.inner_folds", integer([](C& c) -> int& { return c.train.calibration_folds; })},
      {"cv.folds", integer([](C& c) -> int& { return c.cv.n_folds; })},
      {"cv.repeats", integer([](C& c) -> int& { return c.cv.n_repeats; })},
      {"replay.schedule",
       {[](const C& c) {
          std::vector<std::string> s;
          for (int v : c.replay_schedule) s.push_back(std::to_string(v));
          return join_list(s);
        },
        [](C& c, std::string_view v) {
          c.replay_schedule.clear();
          for (const auto& p : split_list(v)) c.replay_schedule.push_back(static_cast<int>(parse_int(p)));
        }}},
      {"report.sweep_fractions",
       {[](const C& c) {
          std::vector<std::string> s;
          for (double v : c.sweep_fractions) s.push_back(format_double(v));
          return join_list(s);
        },
        [](C& c, std::string_view v) {
          c.sweep_fractions.clear();
          for (const auto& p : split_list(v)) c.sweep_fractions.push_back(parse_double(p));
        }}},
      {"report.grouping",
       {[](const C& c) { return join_list(c.grouping); },
        [](C& c, std::string_view v) { c.grouping = split_list(v); }}},
      {"seed",
       {[](const C& c) { return std::to_string(c.seed); },
        [](C& c, std::string_view v) {
          const auto t = trim(v);
          std::uint64_t s = 0;
          auto res = std::from_chars(t.data(), t.data() + t.size(), s);
          require(res.ec == std::errc() && res.ptr == t.data() + t.size(), ErrorCode::InvalidConfig,
                  "seed must be a non-negative integer");
          c.seed = s;
        }}},
      {"epoch.length_s", real([](C& c) -> double& { return c.epoch_length_s; })},
      {"label.threshold", integer([](C& c) -> int& { return c.label_threshold; })},
      {"ingest.allow_any_rate", boolean([](C& c) -> bool& { return c.allow_any_rate; })},
  };
  return table;
}

}  // namespace config_detail

inline std::vector<std::string> config_keys() {
  std::vector<std::string> k;
  for (const auto& [name, b] : config_detail::bindings()) k.push_back(name);
  return k;
}

inline std::string config_get(const PipelineConfig& c, const std::string& key) {
  const auto& t = config_detail::bindings();
  const auto it = t.find(key);
  require(it != t.end(), ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  return it->second.get(c);
}

inline void config_set(PipelineConfig& c, const std::string& key, std::string_view value) {
  const auto& t = config_detail::bindings();
  const auto it = t.find(key);
  require(it != t.end(), ErrorCode::InvalidConfig, "unknown config key '" + key + "'");
  try {
    it->second.set(c, value);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidConfig) throw;
    throw Error(ErrorCode::InvalidConfig, key + ": " + e.what());
  }
}

inline void validate_config(const PipelineConfig& c) {
  auto check = [](bool ok, const std::string& msg) { require(ok, ErrorCode::InvalidConfig, msg); };
  check(c.ica.max_iterations > 0 && c.ica.tolerance > 0, "ICA iterations and tolerance must be positive");
  check(c.despike.levels >= 1 && c.despike.mad_multiplier > 0, "despike levels and multiplier must be positive");
  check(c.features.eye.psd_ar_order >= 1, "eye.psd_ar_order must be >= 1");
  check(c.features.fd_k_max >= 2 && c.features.hoc_max_order >= 1, "feature orders out of range");
  check(c.train.alpha >= 0 && c.train.alpha <= 1, "select.alpha must lie in [0, 1]");
  check(c.train.top_k >= 1, "select.top_k must be >= 1");
  check(c.train.kernel.degree >= 1 && c.train.kernel.c > 0 && c.train.kernel.gamma >= 0,
        "svm.degree >= 1, svm.C > 0, svm.gamma >= 0 (0 = 1/n_features)");
  check(c.train.smo.eps > 0 && c.train.smo.max_iterations > 0, "svm.eps and svm.max_iterations must be positive");
  check(c.cv.n_folds >= 2 && c.cv.n_repeats >= 1, "cv.folds >= 2 and cv.repeats >= 1");
  for (double f : c.sweep_fractions) check(f > 0 && f <= 1, "sweep fractions must lie in (0, 1]");
  for (int t : c.replay_schedule) check(t >= 1, "replay schedule entries are 1-based trial indices");
  check(c.epoch_length_s > 0, "epoch.length_s must be positive");
  check(c.label_threshold >= 1 && c.label_threshold <= 7, "label.threshold must lie in 1..7");
}

inline PipelineConfig parse_config(std::string_view text) {
  PipelineConfig c;
  int line_no = 0;
  for (auto raw : lines_of(text)) {
    ++line_no;
    auto line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string_view::npos, ErrorCode::InvalidConfig,
            "line " + std::to_string(line_no) + ": expected 'key = value'");
    config_set(c, std::string(trim(line.substr(0, eq))), trim(line.substr(eq + 1)));
  }
  validate_config(c);
  return c;
}

inline std::string config_to_text(const PipelineConfig& c) {
  std::string out;
  for (const auto& [key, b] : config_detail::bindings()) out += key + " = " + b.get(c) + "\n";
  return out;
}

inline bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
  return config_to_text(a) == config_to_text(b);
}

inline EpochOptions epoch_options(const PipelineConfig& c) {
  EpochOptions o;
  o.label_threshold = c.label_threshold;
  return o;
}

inline IngestOptions ingest_options(const PipelineConfig& c) {
  IngestOptions o;
  o.allow_any_rate = c.allow_any_rate;
  return o;
}

}  // namespace affect
