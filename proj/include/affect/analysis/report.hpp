#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "affect/analysis/correlation.hpp"
#include "affect/analysis/gaze.hpp"
#include "affect/core/session_io.hpp"
#include "affect/core/text.hpp"
#include "affect/dsp/stats.hpp"
#include "affect/preprocess/ica.hpp"

namespace affect {

// Per-category accuracies measured on human recordings, shown for
// comparison only.
inline const std::vector<std::pair<std::string, double>> kReferenceAccuracy = {
    {"face", 0.644}, {"cloth", 0.645}, {"color", 0.605}, {"composite", 0.744}, {"all", 0.692}};

struct CvSummary {
  std::string name;
  double mean = 0.0;
  double std = 0.0;
  int n = 0;
  double train_fraction = 1.0;
};

struct SessionReport {
  std::string session_id;
  int n_trials = 0;
  int n_used = 0;
  ArtifactReport artifacts;
  std::optional<double> plr_slope;
  std::vector<CvSummary> category;
  std::vector<CvSummary> modality;
  std::vector<CvSummary> sweep;
  std::vector<FactorR> factors;
  GroupedGaze gaze;
  std::vector<std::string> warnings;
};

struct Report {
  std::uint64_t seed = 0;
  std::map<std::string, bool> ablation;  // stage -> skipped
  std::vector<SessionReport> sessions;
};

inline json to_json(const ArtifactReport& r) {
  return {{"n_components_removed", r.n_components_removed},
          {"removed_indices", r.removed_indices},
          {"despiked_coefficients", r.despiked_coefficients},
          {"ica_applied", r.ica_applied},
          {"ica_converged", r.ica_converged},
          {"ica_iterations", r.ica_iterations},
          {"component_eog_correlation", r.component_eog_correlation},
          {"component_kurtosis", r.component_kurtosis}};
}

inline json to_json(const CvSummary& s) {
  return {{"name", s.name}, {"mean", s.mean}, {"std", s.std}, {"n", s.n}, {"train_fraction", s.train_fraction}};
}

/// Mean over sessions of each named accuracy, in first-seen order.
inline std::vector<CvSummary> average_over_sessions(const Report& r,
                                                    std::vector<CvSummary> SessionReport::*field) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> vals;
  std::map<std::string, int> n;
  for (const auto& s : r.sessions)
    for (const auto& c : s.*field) {
      if (!vals.count(c.name)) order.push_back(c.name);
      vals[c.name].push_back(c.mean);
      n[c.name] += c.n;
    }
  std::vector<CvSummary> out;
  for (const auto& name : order) out.push_back({name, mean(vals[name]), sample_stddev(vals[name]), n[name], 1.0});
  return out;
}

inline json report_json(const Report& r) {
  json j;
  j["schema"] = "affect.report/1";
  j["seed"] = r.seed;
  j["ablation"] = r.ablation;
  json ref = json::object();
  for (const auto& [k, v] : kReferenceAccuracy) ref[k] = v;
  j["reference_accuracy"] = ref;
  json sessions = json::array();
  for (const auto& s : r.sessions) {
    json js;
    js["session_id"] = s.session_id;
    js["n_trials"] = s.n_trials;
    js["n_used"] = s.n_used;
    js["artifacts"] = to_json(s.artifacts);
    js["plr_slope"] = s.plr_slope ? json(*s.plr_slope) : json(nullptr);
    for (const char* key : {"category", "modality", "sweep"}) js[key] = json::array();
    for (const auto& c : s.category) js["category"].push_back(to_json(c));
    for (const auto& c : s.modality) js["modality"].push_back(to_json(c));
    for (const auto& c : s.sweep) js["sweep"].push_back(to_json(c));
    json fac = json::array();
    for (const auto& f : s.factors)
      fac.push_back({{"factor", f.factor}, {"group", f.group}, {"r", f.r ? json(*f.r) : json(nullptr)},
                     {"n", f.n}, {"dropped", f.dropped}});
    js["factor_correlation"] = fac;
    json gz = json::object();
    for (const auto& [g, rois] : s.gaze.ratio) gz[g] = {{"ratio", rois}, {"valid_samples", s.gaze.valid_samples.at(g)}};
    js["gaze"] = gz;
    js["warnings"] = s.warnings;
    sessions.push_back(js);
  }
  j["sessions"] = sessions;
  json summary;
  for (const auto& [key, field] : {std::pair{"category", &SessionReport::category},
                                   std::pair{"modality", &SessionReport::modality},
                                   std::pair{"sweep", &SessionReport::sweep}}) {
    summary[key] = json::array();
    for (const auto& c : average_over_sessions(r, field)) summary[key].push_back(to_json(c));
  }
  j["summary"] = summary;
  return j;
}

inline std::string report_csv(const Report& r) {
  std::string out = "section,session,name,mean,std,n\n";
  auto row = [&](const std::string& sec, const std::string& sid, const std::string& name, double m, double sd, int n) {
    out += sec + "," + sid + "," + name + "," + format_double(m) + "," + format_double(sd) + "," + std::to_string(n) + "\n";
  };
  for (const auto& [k, v] : kReferenceAccuracy) row("reference", "", k, v, 0.0, 0);
  for (const auto& s : r.sessions) {
    for (const auto& c : s.category) row("category", s.session_id, c.name, c.mean, c.std, c.n);
    for (const auto& c : s.modality) row("modality", s.session_id, c.name, c.mean, c.std, c.n);
    for (const auto& c : s.sweep) row("sweep", s.session_id, c.name, c.mean, c.std, c.n);
    for (const auto& f : s.factors)
      if (f.r) row("factor", s.session_id, f.factor + "@" + f.group, *f.r, 0.0, f.n);
    for (const auto& [g, rois] : s.gaze.ratio)
      for (const auto& [roi, v] : rois) row("gaze", s.session_id, roi + "@" + g, v, 0.0, s.gaze.valid_samples.at(g));
  }
  for (const auto& c : average_over_sessions(r, &SessionReport::category)) row("category", "mean", c.name, c.mean, c.std, c.n);
  return out;
}

/// Static bar chart: measured accuracy per category next to the reference
/// value, then pooled gaze ratios of the first session.
inline std::string report_svg(const Report& r) {
  const auto cats = average_over_sessions(r, &SessionReport::category);
  const int bar = 28, gap = 22, left = 60, top = 30, height = 200;
  std::map<std::string, double> ref(kReferenceAccuracy.begin(), kReferenceAccuracy.end());
  std::vector<std::tuple<std::string, double, std::string>> gaze;
  if (!r.sessions.empty())
    for (const auto& [g, rois] : r.sessions.front().gaze.ratio)
      for (const auto& [roi, v] : rois) gaze.emplace_back(roi + " " + g, v, "#7a9e3f");
  const int width = left + static_cast<int>(cats.size()) * (2 * bar + gap) + static_cast<int>(gaze.size()) * (bar + gap) + 60;
  std::string s = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) + "\" height=\"" +
                  std::to_string(height + top + 90) + "\" font-family=\"sans-serif\" font-size=\"10\">\n";
  s += "<text x=\"" + std::to_string(left) + "\" y=\"16\" font-size=\"12\">accuracy per category (blue: this run, grey: reference) and gaze ratios</text>\n";
  s += "<line x1=\"" + std::to_string(left - 4) + "\" y1=\"" + std::to_string(top + height) + "\" x2=\"" +
       std::to_string(width - 20) + "\" y2=\"" + std::to_string(top + height) + "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const int y = top + height - t * height / 4;
    s += "<text x=\"" + std::to_string(left - 30) + "\" y=\"" + std::to_string(y + 3) + "\">" +
         format_double(t / 4.0) + "</text>\n";
  }
  int x = left;
  auto rect = [&](int px, double v, const char* color) {
    const int h = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * height));
    s += "<rect x=\"" + std::to_string(px) + "\" y=\"" + std::to_string(top + height - h) + "\" width=\"" +
         std::to_string(bar) + "\" height=\"" + std::to_string(h) + "\" fill=\"" + color + "\"/>\n";
  };
  auto label = [&](int px, const std::string& text) {
    s += "<text x=\"" + std::to_string(px) + "\" y=\"" + std::to_string(top + height + 14) +
         "\" transform=\"rotate(30 " + std::to_string(px) + " " + std::to_string(top + height + 14) + ")\">" + text +
         "</text>\n";
  };
  for (const auto& c : cats) {
    rect(x, c.mean, "#3f6e9e");
    if (ref.count(c.name)) rect(x + bar, ref[c.name], "#b0b0b0");
    label(x, c.name);
    x += 2 * bar + gap;
  }
  for (const auto& [name, v, color] : gaze) {
    rect(x, v, color.c_str());
    label(x, name);
    x += bar + gap;
  }
  s += "</svg>\n";
  return s;
}

inline void write_report(const Report& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_file((dir / "report.json").string(), report_json(r).dump(2) + "\n");
  write_file((dir / "report.csv").string(), report_csv(r));
  write_file((dir / "report.svg").string(), report_svg(r));
}

}  // namespace affect
