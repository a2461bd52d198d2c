#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <numeric>
#include <string>
#include <vector>

#include "affect/analysis/correlation.hpp"
#include "affect/core/session_io.hpp"
#include "affect/core/types.hpp"
#include "affect/error.hpp"
#include "affect/rng.hpp"

namespace affect {

/// Parameters of the synthetic recording. Attracted ("like") trials get
/// frontal alpha power scaled by (1 + alpha_gain * effect) and a pupil
/// dilation of pupil_dilation_mm * effect.
struct GeneratorConfig {
  int n_face = 30;
  int n_cloth = 30;
  int n_color = 30;
  bool composites = true;  // 3 faces x 3 cloths x 3 colors per image sex
  double effect_size = 1.0;
  double eeg_rate_hz = 250.0;
  double epoch_length_s = 2.0;
  double lead_in_s = 3.0;
  double gap_min_s = 3.0;
  double gap_max_s = 3.5;

  double pink_rms_uv = 10.0;
  double alpha_amplitude_uv = 4.0;
  double alpha_trial_log_sd = 0.1;
  double modulation_log_sd = 0.35;
  double modulation_time_s = 2.0;
  double line_amplitude_uv = 5.0;
  double blink_rate_hz = 0.2;
  double blink_amplitude_uv = 80.0;
  double blink_width_s = 0.1;
  double blink_invalid_s = 0.15;

  double pupil_baseline_mm = 3.5;
  double reflex_gain = -0.8;  // mm per luminance unit
  double rest_luminance = 0.5;
  double luminance_min = 0.1;
  double luminance_max = 0.9;
  double pupil_trial_sd = 0.05;
  double pupil_noise_sd = 0.02;
  double pupil_ramp_s = 0.3;

  double alpha_gain = 0.4;
  double pupil_dilation_mm = 0.4;

  // Composite latent attractiveness = weights . component latents + noise.
  double face_weight = 0.7;
  double cloth_weight = 0.2;
  double color_weight = 0.1;
  double composite_noise_sd = 0.1;

  double gaze_jitter_sd = 0.002;

  void validate() const {
    auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::InvalidConfig, what); };
    check(n_face >= 0 && n_cloth >= 0 && n_color >= 0, "image counts must be non-negative");
    check(!composites || (n_face >= 6 && n_cloth >= 6 && n_color >= 6),
          "composites need at least 6 faces, 6 cloths and 6 colors");
    check(n_face + n_cloth + n_color > 0, "no images to show");
    check(effect_size >= 0 && effect_size <= 1, "effect_size must lie in [0, 1]");
    check(eeg_rate_hz == 250.0 || eeg_rate_hz == 500.0, "EEG rate must be 250 or 500 Hz");
    check(epoch_length_s > 0 && gap_min_s >= epoch_length_s + 0.5 && gap_max_s >= gap_min_s,
          "gaps must leave at least 0.5 s after each epoch");
    check(lead_in_s >= 0, "lead-in must be non-negative");
    for (double v : {pink_rms_uv, alpha_amplitude_uv, alpha_trial_log_sd, modulation_log_sd, line_amplitude_uv,
                     blink_rate_hz, blink_amplitude_uv, pupil_trial_sd, pupil_noise_sd, alpha_gain, pupil_dilation_mm,
                     composite_noise_sd, gaze_jitter_sd})
      check(v >= 0, "amplitudes, rates and spreads must be non-negative");
    check(modulation_time_s > 0 && blink_width_s > 0 && pupil_ramp_s > 0, "time constants must be positive");
    check(pupil_baseline_mm > 0, "pupil baseline must be positive");
    check(luminance_min >= 0 && luminance_max <= 1 && luminance_min <= luminance_max &&
              rest_luminance >= 0 && rest_luminance <= 1,
          "luminance values must lie in [0, 1]");
  }
};

struct ImageTruth {
  std::string event_id;
  Category category = Category::Other;
  std::string image_sex;
  double latent = 0.0;
  Label label = Label::Dislike;
  double posterior = 0.5;  // planted attraction probability
};

struct SyntheticSession {
  Session session;
  std::vector<ImageTruth> truth;
  std::map<std::string, Composition> composition;
  std::uint64_t seed = 0;
  double effect_size = 0.0;

  json truth_json() const {
    json j;
    j["seed"] = seed;
    j["effect_size"] = effect_size;
    j["session_id"] = session.session_id;
    j["subject_id"] = session.subject_id;
    json ev = json::array();
    for (const auto& t : truth)
      ev.push_back({{"event_id", t.event_id},
                    {"category", std::string(to_string(t.category))},
                    {"image_sex", t.image_sex},
                    {"latent", t.latent},
                    {"label", std::string(to_string(t.label))},
                    {"posterior", t.posterior}});
    j["images"] = ev;
    json comp = json::object();
    for (const auto& [id, c] : composition)
      comp[id] = {{"face_id", c.face_id}, {"cloth_id", c.cloth_id}, {"color_id", c.color_id}};
    j["composition"] = comp;
    return j;
  }
};

struct SubjectSpec {
  std::string subject_id = "S01";
  std::string session_id = "subject_01";
  std::string viewer_sex = "male";
  std::uint64_t seed = 1;
};

namespace synth_detail {

inline double quantize(double v, double step) { return std::round(v / step) * step; }

inline double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Paul Kellet's economy pink filter applied to unit white noise.
inline std::vector<double> pink_noise(std::size_t n, Rng& rng) {
  std::vector<double> out(n);
  double b0 = 0, b1 = 0, b2 = 0, b3 = 0, b4 = 0, b5 = 0, b6 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double white = gaussian(rng);
    b0 = 0.99886 * b0 + white * 0.0555179;
    b1 = 0.99332 * b1 + white * 0.0750759;
    b2 = 0.96900 * b2 + white * 0.1538520;
    b3 = 0.86650 * b3 + white * 0.3104856;
    b4 = 0.55000 * b4 + white * 0.5329522;
    b5 = -0.7616 * b5 - white * 0.0168980;
    out[i] = 0.129 * (b0 + b1 + b2 + b3 + b4 + b5 + b6 + white * 0.5362);
    b6 = white * 0.115926;
  }
  return out;
}

/// Unit-variance AR(1) process with the given correlation time.
inline std::vector<double> slow_process(std::size_t n, double rate_hz, double time_s, Rng& rng) {
  const double phi = std::exp(-1.0 / (time_s * rate_hz));
  const double k = std::sqrt(1.0 - phi * phi);
  std::vector<double> u(n);
  double v = gaussian(rng);
  for (std::size_t i = 0; i < n; ++i) {
    u[i] = v;
    v = phi * v + k * gaussian(rng);
  }
  return u;
}

/// Labels by median split: the upper half of latents is "like".
inline std::vector<Label> median_split(const std::vector<double>& z) {
  std::vector<int> idx(z.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return z[static_cast<std::size_t>(a)] < z[static_cast<std::size_t>(b)]; });
  std::vector<Label> out(z.size(), Label::Dislike);
  for (std::size_t r = z.size() / 2; r < idx.size(); ++r) out[static_cast<std::size_t>(idx[r])] = Label::Like;
  return out;
}

/// 7-point ratings consistent with the labels: likes spread over 5..7,
/// dislikes over 1..4, ordered by latent.
inline std::vector<int> ratings_for(const std::vector<double>& z, const std::vector<Label>& labels) {
  std::vector<int> r(z.size());
  for (Label grp : {Label::Like, Label::Dislike}) {
    std::vector<int> idx;
    for (std::size_t i = 0; i < z.size(); ++i)
      if (labels[i] == grp) idx.push_back(static_cast<int>(i));
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return z[static_cast<std::size_t>(a)] < z[static_cast<std::size_t>(b)]; });
    const int lo = grp == Label::Like ? 5 : 1, levels = grp == Label::Like ? 3 : 4;
    for (std::size_t k = 0; k < idx.size(); ++k)
      r[static_cast<std::size_t>(idx[k])] = lo + static_cast<int>(k * static_cast<std::size_t>(levels) / idx.size());
  }
  return r;
}

struct Roiset {
  std::vector<Roi> rois;
  std::vector<double> weight;  // gaze preference per ROI
};

inline Roiset rois_for(Category c, const std::string& viewer_sex) {
  const Rect face{0.35, 0.05, 0.3, 0.3}, clothes{0.3, 0.4, 0.4, 0.55}, color{0.02, 0.05, 0.22, 0.9};
  Roiset s;
  switch (c) {
    case Category::Face: s.rois = {{"face", face}}; s.weight = {1.0}; break;
    case Category::Cloth: s.rois = {{"clothes", clothes}}; s.weight = {1.0}; break;
    case Category::Color: s.rois = {{"color", {0.1, 0.1, 0.8, 0.8}}}; s.weight = {1.0}; break;
    default:
      s.rois = {{"face", face}, {"clothes", clothes}, {"color", color}};
      s.weight = viewer_sex == "female" ? std::vector<double>{0.4, 0.45, 0.15} : std::vector<double>{0.5, 0.3, 0.2};
  }
  return s;
}

struct PlannedEvent {
  StimulusEvent event;
  bool like = false;
};

}  // namespace synth_detail

/// Renders the EEG and eye streams for an ordered list of events; the
/// event timestamps are assigned here.
inline Session render_session(const GeneratorConfig& cfg, const SubjectSpec& subject,
                              std::vector<synth_detail::PlannedEvent>& plan, Rng& rng) {
  using namespace synth_detail;
  const double eeg_rate = cfg.eeg_rate_hz;
  const double eye_rate = kEyeRateHz;
  const std::int64_t start_us = 1'000'000;

  std::vector<double> onset_s;
  double t = cfg.lead_in_s;
  for (std::size_t k = 0; k < plan.size(); ++k) {
    onset_s.push_back(t);
    t += uniform(rng, cfg.gap_min_s, cfg.gap_max_s);
  }
  const double total_s = (plan.empty() ? cfg.lead_in_s : onset_s.back() + cfg.epoch_length_s) + cfg.lead_in_s;
  for (std::size_t k = 0; k < plan.size(); ++k)
    plan[k].event.timestamp_us = start_us + static_cast<std::int64_t>(std::llround(onset_s[k] * 1e6));

  // Which event (if any) is on screen at time s.
  auto active = [&](double s) -> int {
    const auto it = std::upper_bound(onset_s.begin(), onset_s.end(), s);
    if (it == onset_s.begin()) return -1;
    const int k = static_cast<int>(it - onset_s.begin()) - 1;
    return s < onset_s[static_cast<std::size_t>(k)] + cfg.epoch_length_s ? k : -1;
  };

  // Blinks (shared by both streams).
  std::vector<double> blinks;
  if (cfg.blink_rate_hz > 0) {
    std::exponential_distribution<double> gap(cfg.blink_rate_hz);
    for (double b = gap(rng); b < total_s; b += gap(rng)) blinks.push_back(b);
  }

  // ---- EEG ----
  const auto n_eeg = static_cast<std::size_t>(std::llround(total_s * eeg_rate));
  const std::array<double, 6> blink_weight = {1.0, 1.0, 0.4, 0.4, 0.6, 0.6};
  SampleStream eeg;
  eeg.stream_id = "eeg";
  eeg.kind = StreamKind::Eeg;
  for (auto c : kEegChannels) eeg.channel_names.emplace_back(c);
  eeg.sample_rate_hz = eeg_rate;
  eeg.start_timestamp_us = start_us;
  eeg.samples.resize(static_cast<Eigen::Index>(n_eeg), 6);

  std::vector<std::array<double, 6>> trial_alpha(plan.size());
  for (auto& ta : trial_alpha)
    for (double& a : ta) a = std::exp(gaussian(rng, 0.0, cfg.alpha_trial_log_sd));
  const double line_phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);

  for (int c = 0; c < 6; ++c) {
    const auto pink = pink_noise(n_eeg, rng);
    const double pink_scale = cfg.pink_rms_uv / std::max(1e-12, std::sqrt(variance(pink)));
    const auto mod = slow_process(n_eeg, eeg_rate, cfg.modulation_time_s, rng);
    const double f_alpha = uniform(rng, 9.5, 11.0);
    const double phase = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const bool frontal = c == 2 || c == 3;  // AF3, AF4
    for (std::size_t i = 0; i < n_eeg; ++i) {
      const double s = static_cast<double>(i) / eeg_rate;
      const int k = active(s);
      double amp = cfg.alpha_amplitude_uv;
      if (k >= 0) {
        amp *= trial_alpha[static_cast<std::size_t>(k)][static_cast<std::size_t>(c)];
        if (frontal && plan[static_cast<std::size_t>(k)].like)
          amp *= std::sqrt(1.0 + cfg.alpha_gain * cfg.effect_size);
      }
      const double neural = pink[i] * pink_scale + amp * std::sin(2.0 * std::numbers::pi * f_alpha * s + phase);
      const double gain = std::exp(cfg.modulation_log_sd * mod[i] - cfg.modulation_log_sd * cfg.modulation_log_sd);
      double v = neural * gain +
                 cfg.line_amplitude_uv * std::sin(2.0 * std::numbers::pi * 60.0 * s + line_phase);
      for (double b : blinks) {
        const double d = (s - b) / cfg.blink_width_s;
        if (std::abs(d) < 6.0) v += blink_weight[static_cast<std::size_t>(c)] * cfg.blink_amplitude_uv * std::exp(-0.5 * d * d);
      }
      eeg.samples(static_cast<Eigen::Index>(i), c) = quantize(v, 1e-3);
    }
  }

  // ---- eye ----
  const auto n_eye = static_cast<std::size_t>(std::llround(total_s * eye_rate));
  SampleStream eye;
  eye.stream_id = "eye";
  eye.kind = StreamKind::Eye;
  for (auto c : kEyeChannels) eye.channel_names.emplace_back(c);
  eye.sample_rate_hz = eye_rate;
  eye.start_timestamp_us = start_us;
  eye.samples.resize(static_cast<Eigen::Index>(n_eye), 6);

  std::vector<double> trial_offset(plan.size());
  for (double& o : trial_offset) o = gaussian(rng, 0.0, cfg.pupil_trial_sd);

  // Gaze: a fixation target sequence per event, centre cross otherwise.
  struct Fix {
    double until_s, x, y;
  };
  std::vector<std::vector<Fix>> fixations(plan.size());
  for (std::size_t k = 0; k < plan.size(); ++k) {
    const auto set = rois_for(plan[k].event.category, plan[k].event.metadata["viewer_sex"]);
    std::discrete_distribution<int> pick(set.weight.begin(), set.weight.end());
    double s = onset_s[k] + 0.15;  // saccade latency
    fixations[k].push_back({s, 0.5, 0.5});
    while (s < onset_s[k] + cfg.epoch_length_s) {
      const Rect r = set.rois[static_cast<std::size_t>(pick(rng))].rect;
      s += uniform(rng, 0.25, 0.6);
      fixations[k].push_back({s, r.x + r.w * uniform(rng, 0.15, 0.85), r.y + r.h * uniform(rng, 0.15, 0.85)});
    }
  }

  for (std::size_t i = 0; i < n_eye; ++i) {
    const double s = static_cast<double>(i) / eye_rate;
    const int k = active(s);
    double lum = cfg.rest_luminance;
    double pupil = cfg.pupil_baseline_mm;
    double gx = 0.5, gy = 0.5;
    if (k >= 0) {
      const auto ku = static_cast<std::size_t>(k);
      lum = *plan[ku].event.luminance;
      pupil += trial_offset[ku];
      if (plan[ku].like)
        pupil += cfg.pupil_dilation_mm * cfg.effect_size * std::min(1.0, (s - onset_s[ku]) / cfg.pupil_ramp_s);
      for (const auto& f : fixations[ku]) {
        gx = f.x;
        gy = f.y;
        if (s < f.until_s) break;
      }
    } else {
      // Dilation decays after the epoch.
      const auto it = std::upper_bound(onset_s.begin(), onset_s.end(), s);
      if (it != onset_s.begin()) {
        const auto ku = static_cast<std::size_t>(it - onset_s.begin() - 1);
        const double since = s - onset_s[ku] - cfg.epoch_length_s;
        if (plan[ku].like && since < cfg.pupil_ramp_s)
          pupil += cfg.pupil_dilation_mm * cfg.effect_size * (1.0 - since / cfg.pupil_ramp_s);
      }
    }
    pupil += cfg.reflex_gain * (lum - cfg.rest_luminance);
    bool valid = true;
    for (double b : blinks)
      if (std::abs(s - b) <= 0.5 * cfg.blink_invalid_s) valid = false;
    const auto row = static_cast<Eigen::Index>(i);
    gx = std::clamp(gx + gaussian(rng, 0.0, cfg.gaze_jitter_sd), 0.0, 1.0);
    gy = std::clamp(gy + gaussian(rng, 0.0, cfg.gaze_jitter_sd), 0.0, 1.0);
    const double pl = pupil + gaussian(rng, 0.0, cfg.pupil_noise_sd);
    const double pr = pupil + gaussian(rng, 0.0, cfg.pupil_noise_sd);
    eye.samples(row, eye_col::kPupilLeft) = valid ? quantize(pl, 1e-4) : 0.0;
    eye.samples(row, eye_col::kPupilRight) = valid ? quantize(pr, 1e-4) : 0.0;
    eye.samples(row, eye_col::kGazeX) = valid ? quantize(gx, 1e-5) : 0.0;
    eye.samples(row, eye_col::kGazeY) = valid ? quantize(gy, 1e-5) : 0.0;
    eye.samples(row, eye_col::kValidLeft) = valid ? 1.0 : 0.0;
    eye.samples(row, eye_col::kValidRight) = valid ? 1.0 : 0.0;
  }

  Session session;
  session.session_id = subject.session_id;
  session.subject_id = subject.subject_id;
  session.epoch_length_s = cfg.epoch_length_s;
  session.metadata = {{"viewer_sex", subject.viewer_sex}, {"source", "synthetic"}};
  session.streams.push_back(std::move(eeg));
  session.streams.push_back(std::move(eye));
  for (const auto& p : plan) session.events.push_back(p.event);
  return session;
}

/// One viewing session with the configured image categories, presented in
/// a seeded random order. Labels are a per-category median split of latent
/// attractiveness; ratings follow the labels.
inline SyntheticSession generate_session(const GeneratorConfig& cfg, const SubjectSpec& subject = {}) {
  using namespace synth_detail;
  cfg.validate();
  Rng rng(subject.seed);
  SyntheticSession out;
  out.seed = subject.seed;
  out.effect_size = cfg.effect_size;

  auto sex_of = [](int i) { return i % 2 == 0 ? std::string("male") : std::string("female"); };
  auto id = [](const char* prefix, int i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%02d", prefix, i + 1);
    return std::string(buf);
  };

  struct Item {
    ImageTruth truth;
    std::map<std::string, std::string> meta;
  };
  std::vector<std::vector<Item>> groups;
  std::map<std::string, double> latent;
  auto add_group = [&](Category cat, const char* prefix, int n, bool sexed) {
    std::vector<Item> g;
    for (int i = 0; i < n; ++i) {
      Item it;
      it.truth.event_id = id(prefix, i);
      it.truth.category = cat;
      it.truth.latent = gaussian(rng);
      if (sexed) it.truth.image_sex = sex_of(i);
      latent[it.truth.event_id] = it.truth.latent;
      g.push_back(it);
    }
    groups.push_back(std::move(g));
  };
  add_group(Category::Face, "face", cfg.n_face, true);
  add_group(Category::Cloth, "cloth", cfg.n_cloth, true);
  add_group(Category::Color, "color", cfg.n_color, false);

  if (cfg.composites) {
    std::vector<Item> g;
    int n = 0;
    for (int sex = 0; sex < 2; ++sex) {
      // Three parts of each kind per sex, taken at the low, middle and high
      // end of the attraction scale so every factor varies across the set.
      auto spread = [&](const char* prefix, int n) {
        std::vector<int> pool;
        for (int i = sex; i < n; i += 2) pool.push_back(i);
        std::sort(pool.begin(), pool.end(), [&](int a, int b) { return latent[id(prefix, a)] < latent[id(prefix, b)]; });
        const int m = static_cast<int>(pool.size());
        return std::vector<int>{pool[static_cast<std::size_t>(m / 6)], pool[static_cast<std::size_t>(m / 2)],
                                pool[static_cast<std::size_t>(5 * m / 6)]};
      };
      const std::vector<int> faces = spread("face", cfg.n_face), cloths = spread("cloth", cfg.n_cloth),
                             colors = spread("color", cfg.n_color);
      for (int f : faces)
        for (int c : cloths)
          for (int k : colors) {
            Item it;
            it.truth.event_id = id("composite", n++);
            it.truth.category = Category::Composite;
            it.truth.image_sex = sex_of(sex);
            Composition comp{id("face", f), id("cloth", c), id("color", k), ""};
            it.truth.latent = cfg.face_weight * latent[comp.face_id] + cfg.cloth_weight * latent[comp.cloth_id] +
                              cfg.color_weight * latent[comp.color_id] + gaussian(rng, 0.0, cfg.composite_noise_sd);
            it.meta = {{"face_id", comp.face_id}, {"cloth_id", comp.cloth_id}, {"color_id", comp.color_id}};
            out.composition[it.truth.event_id] = comp;
            g.push_back(it);
          }
    }
    groups.push_back(std::move(g));
  }

  std::vector<PlannedEvent> plan;
  for (auto& g : groups) {
    std::vector<double> z;
    for (const auto& it : g) z.push_back(it.truth.latent);
    const auto labels = median_split(z);
    const auto ratings = ratings_for(z, labels);
    for (std::size_t i = 0; i < g.size(); ++i) {
      auto& tr = g[i].truth;
      tr.label = labels[i];
      tr.posterior = logistic(1.5 * tr.latent);
      PlannedEvent pe;
      pe.like = labels[i] == Label::Like;
      pe.event.event_id = tr.event_id;
      pe.event.category = tr.category;
      pe.event.rating = ratings[i];
      pe.event.luminance = quantize(uniform(rng, cfg.luminance_min, cfg.luminance_max), 1e-4);
      pe.event.rois = rois_for(tr.category, subject.viewer_sex).rois;
      pe.event.metadata = g[i].meta;
      pe.event.metadata["viewer_sex"] = subject.viewer_sex;
      if (!tr.image_sex.empty()) pe.event.metadata["image_sex"] = tr.image_sex;
      out.truth.push_back(tr);
      plan.push_back(std::move(pe));
    }
  }
  std::shuffle(plan.begin(), plan.end(), rng);
  out.session = render_session(cfg, subject, plan, rng);
  return out;
}

/// Offline analogue of the live session: n_train labeled face images
/// followed by n_predict face images, both with explicit like/dislike answers.
inline SyntheticSession generate_replay_session(const GeneratorConfig& base, const SubjectSpec& subject,
                                                int n_train = 30, int n_predict = 10) {
  using namespace synth_detail;
  GeneratorConfig cfg = base;
  cfg.composites = false;
  cfg.validate();
  require(n_train >= 4 && n_predict >= 1, ErrorCode::InvalidConfig, "replay needs >= 4 training and >= 1 test image");
  Rng rng(subject.seed);
  SyntheticSession out;
  out.seed = subject.seed;
  out.effect_size = cfg.effect_size;

  std::vector<PlannedEvent> plan;
  for (int phase = 0; phase < 2; ++phase) {
    const int n = phase == 0 ? n_train : n_predict;
    std::vector<double> z;
    for (int i = 0; i < n; ++i) z.push_back(gaussian(rng));
    const auto labels = median_split(z);
    std::vector<PlannedEvent> block;
    for (int i = 0; i < n; ++i) {
      ImageTruth tr;
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s_%02d", phase == 0 ? "train" : "predict", i + 1);
      tr.event_id = buf;
      tr.category = Category::Face;
      tr.image_sex = i % 2 == 0 ? "male" : "female";
      tr.latent = z[static_cast<std::size_t>(i)];
      tr.label = labels[static_cast<std::size_t>(i)];
      tr.posterior = logistic(1.5 * tr.latent);
      PlannedEvent pe;
      pe.like = tr.label == Label::Like;
      pe.event.event_id = tr.event_id;
      pe.event.category = Category::Face;
      pe.event.binary_label = tr.label;
      pe.event.luminance = quantize(uniform(rng, cfg.luminance_min, cfg.luminance_max), 1e-4);
      pe.event.rois = rois_for(Category::Face, subject.viewer_sex).rois;
      pe.event.metadata = {{"phase", phase == 0 ? "train" : "predict"},
                           {"viewer_sex", subject.viewer_sex},
                           {"image_sex", tr.image_sex}};
      out.truth.push_back(tr);
      block.push_back(std::move(pe));
    }
    std::shuffle(block.begin(), block.end(), rng);
    plan.insert(plan.end(), block.begin(), block.end());
  }
  out.session = render_session(cfg, subject, plan, rng);
  return out;
}

inline SubjectSpec corpus_subject(std::uint64_t seed, int index, int n_male) {
  char buf[32];
  SubjectSpec s;
  std::snprintf(buf, sizeof(buf), "S%02d", index + 1);
  s.subject_id = buf;
  std::snprintf(buf, sizeof(buf), "subject_%02d", index + 1);
  s.session_id = buf;
  s.viewer_sex = index < n_male ? "male" : "female";
  s.seed = derive_seed(seed, static_cast<std::uint64_t>(index));
  return s;
}

/// Writes one directory per subject (session files plus truth.json).
inline std::vector<std::filesystem::path> generate_corpus(const GeneratorConfig& cfg, std::uint64_t seed,
                                                          const std::filesystem::path& out_dir, int n_subjects = 13,
                                                          int n_male = 7) {
  require(n_subjects >= 1 && n_male >= 0 && n_male <= n_subjects, ErrorCode::InvalidConfig,
          "subject counts out of range");
  std::vector<std::filesystem::path> dirs;
  for (int s = 0; s < n_subjects; ++s) {
    const SubjectSpec subject = corpus_subject(seed, s, n_male);
    const SyntheticSession syn = generate_session(cfg, subject);
    const auto dir = out_dir / subject.session_id;
    write_session(syn.session, dir);
    write_file((dir / "truth.json").string(), syn.truth_json().dump(2) + "\n");
    dirs.push_back(dir);
  }
  return dirs;
}

}  // namespace affect
