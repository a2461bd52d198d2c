#pragma once

#include <fnmatch.h>

#include <Eigen/Dense>

#include <sstream>
#include <string>
#include <vector>

#include "affect/core/epoch.hpp"
#include "affect/core/text.hpp"
#include "affect/core/types.hpp"
#include "affect/features/eeg.hpp"
#include "affect/features/eye.hpp"

namespace affect {

enum class Modality { Eeg, Eye };

inline std::string_view to_string(Modality m) { return m == Modality::Eeg ? "eeg" : "eye"; }

struct FeatureOptions {
  int fd_k_max = 8;
  int hoc_max_order = 10;
  int dwt_levels = kDwtLevels;
  EyeFeatureConfig eye;
};

struct FeatureLayout {
  std::vector<std::string> names;
  std::vector<Modality> modality;

  std::size_t size() const { return names.size(); }
};

/// Canonical column order: per EEG channel 5 band powers, 5 relative
/// powers, NSI, FD, HOC 1..n, DWT sub-band stats; then the eye block.
inline FeatureLayout feature_layout(const FeatureOptions& opts = {}) {
  FeatureLayout l;
  auto add = [&](std::string n, Modality m) {
    l.names.push_back(std::move(n));
    l.modality.push_back(m);
  };
  for (auto ch : kEegChannels) {
    const std::string p = "eeg." + std::string(ch) + ".";
    for (const auto& b : kEegBands) add(p + std::string(b.name) + "_power", Modality::Eeg);
    for (const auto& b : kEegBands) add(p + std::string(b.name) + "_rel", Modality::Eeg);
    add(p + "nsi", Modality::Eeg);
    add(p + "fd", Modality::Eeg);
    for (int k = 1; k <= opts.hoc_max_order; ++k) add(p + "hoc" + std::to_string(k), Modality::Eeg);
    for (const auto& sb : dwt_subband_names(opts.dwt_levels)) {
      add(p + sb + "_log_energy", Modality::Eeg);
      add(p + sb + "_mean_abs", Modality::Eeg);
      add(p + sb + "_std", Modality::Eeg);
    }
  }
  for (auto n : kEyeFeatureNames) add("eye." + std::string(n), Modality::Eye);
  return l;
}

inline bool trial_usable(const Trial& t) {
  return !t.quality_flags.has(QualityFlag::EegGap) && !t.quality_flags.has(QualityFlag::EyeGap) &&
         !t.quality_flags.has(QualityFlag::OutOfSpan);
}

/// Full feature vector of one trial. Rejects trials whose quality flags
/// make the epoch unusable.
inline std::vector<double> extract_all(const Trial& trial, const FeatureOptions& opts = {}) {
  require(trial_usable(trial), ErrorCode::TrialQuality,
          "trial " + trial.event_id + " flagged " + to_string(trial.quality_flags));
  require(trial.eeg_epoch.cols() == static_cast<Eigen::Index>(kEegChannels.size()), ErrorCode::OutOfRange,
          "trial " + trial.event_id + " has " + std::to_string(trial.eeg_epoch.cols()) + " EEG channels");
  std::vector<double> out;
  out.reserve(feature_layout(opts).size());
  for (Eigen::Index c = 0; c < trial.eeg_epoch.cols(); ++c) {
    const Eigen::VectorXd col = trial.eeg_epoch.col(c);
    const std::span<const double> x(col.data(), static_cast<std::size_t>(col.size()));
    const BandPowers bp = eeg_band_powers(x, trial.eeg_rate_hz);
    out.insert(out.end(), bp.absolute.begin(), bp.absolute.end());
    out.insert(out.end(), bp.relative.begin(), bp.relative.end());
    out.push_back(eeg_nsi(x));
    out.push_back(eeg_fractal_dimension(x, opts.fd_k_max));
    const auto hoc = eeg_hoc(x, opts.hoc_max_order);
    out.insert(out.end(), hoc.begin(), hoc.end());
    const auto dw = eeg_dwt_features(x, opts.dwt_levels);
    out.insert(out.end(), dw.begin(), dw.end());
  }
  const auto eye = eye_features(trial.eye_epoch, trial.eye_rate_hz, opts.eye);
  out.insert(out.end(), eye.begin(), eye.end());
  for (double v : out)
    require(std::isfinite(v), ErrorCode::TrialQuality, "non-finite feature in trial " + trial.event_id);
  return out;
}

/// Rows are trials, columns follow `names`. event_ids and categories are
/// kept in memory only; the CSV form holds values and labels.
struct FeatureMatrix {
  std::vector<std::string> names;
  std::vector<Modality> modality;
  Eigen::MatrixXd values;  // [n_rows x n_cols]
  std::vector<Label> labels;
  std::vector<std::string> event_ids;
  std::vector<Category> categories;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  std::vector<int> label_signs() const {
    std::vector<int> y;
    for (Label l : labels) y.push_back(label_sign(l));
    return y;
  }

  FeatureMatrix select_rows(const std::vector<int>& idx) const {
    FeatureMatrix m;
    m.names = names;
    m.modality = modality;
    m.values.resize(static_cast<Eigen::Index>(idx.size()), cols());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      m.values.row(static_cast<Eigen::Index>(i)) = values.row(idx[i]);
      m.labels.push_back(labels[static_cast<std::size_t>(idx[i])]);
      if (!event_ids.empty()) m.event_ids.push_back(event_ids[static_cast<std::size_t>(idx[i])]);
      if (!categories.empty()) m.categories.push_back(categories[static_cast<std::size_t>(idx[i])]);
    }
    return m;
  }

  FeatureMatrix select_columns(const std::vector<int>& idx) const {
    FeatureMatrix m;
    m.values.resize(rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
      m.names.push_back(names[static_cast<std::size_t>(idx[j])]);
      m.modality.push_back(modality[static_cast<std::size_t>(idx[j])]);
      m.values.col(static_cast<Eigen::Index>(j)) = values.col(idx[j]);
    }
    m.labels = labels;
    m.event_ids = event_ids;
    m.categories = categories;
    return m;
  }

  /// Rows from another matrix with the same columns.
  void append(const FeatureMatrix& other) {
    require(other.names == names || rows() == 0, ErrorCode::ColumnMismatch, "feature columns differ");
    if (rows() == 0) {
      names = other.names;
      modality = other.modality;
    }
    Eigen::MatrixXd v(rows() + other.rows(), other.cols());
    if (rows() > 0) v.topRows(rows()) = values;
    v.bottomRows(other.rows()) = other.values;
    values = std::move(v);
    labels.insert(labels.end(), other.labels.begin(), other.labels.end());
    event_ids.insert(event_ids.end(), other.event_ids.begin(), other.event_ids.end());
    categories.insert(categories.end(), other.categories.begin(), other.categories.end());
  }
};

inline std::vector<int> columns_of(const FeatureMatrix& m, Modality mod) {
  std::vector<int> idx;
  for (std::size_t j = 0; j < m.modality.size(); ++j)
    if (m.modality[j] == mod) idx.push_back(static_cast<int>(j));
  return idx;
}

/// Resolves names or shell-style globs to column indices in pattern order.
inline std::vector<int> resolve_columns(const std::vector<std::string>& names,
                                        const std::vector<std::string>& patterns) {
  std::vector<int> idx;
  for (const auto& p : patterns) {
    bool hit = false;
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (fnmatch(p.c_str(), names[j].c_str(), 0) != 0) continue;
      hit = true;
      if (std::find(idx.begin(), idx.end(), static_cast<int>(j)) == idx.end()) idx.push_back(static_cast<int>(j));
    }
    require(hit, ErrorCode::UnknownFeature, "no feature column matches '" + p + "'");
  }
  return idx;
}

struct ExtractionLog {
  std::vector<std::string> warnings;
};

/// Features for every usable, labeled trial; skipped trials are logged.
inline FeatureMatrix build_feature_matrix(const std::vector<Trial>& trials, const FeatureOptions& opts = {},
                                          ExtractionLog* log = nullptr) {
  const FeatureLayout layout = feature_layout(opts);
  FeatureMatrix m;
  m.names = layout.names;
  m.modality = layout.modality;
  std::vector<std::vector<double>> rows;
  for (const auto& t : trials) {
    auto warn = [&](const std::string& why) {
      if (log) log->warnings.push_back("trial " + t.event_id + " excluded: " + why);
    };
    if (!t.label) {
      warn("no label");
      continue;
    }
    if (!trial_usable(t)) {
      warn("quality flags " + to_string(t.quality_flags));
      continue;
    }
    try {
      rows.push_back(extract_all(t, opts));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoValidPupil && e.code() != ErrorCode::TrialQuality) throw;
      warn(e.what());
      continue;
    }
    m.labels.push_back(*t.label);
    m.event_ids.push_back(t.event_id);
    m.categories.push_back(t.event.category);
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(layout.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

inline std::string feature_matrix_to_csv(const FeatureMatrix& m) {
  std::string out;
  for (const auto& n : m.names) out += n + ",";
  out += "label\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out += format_double(m.values(i, j)) + ",";
    out += std::string(to_string(m.labels[static_cast<std::size_t>(i)])) + "\n";
  }
  return out;
}

/// Column modality follows the name prefix ("eeg." / "eye.").
inline FeatureMatrix feature_matrix_from_csv(std::string_view text) {
  const auto lines = lines_of(text);
  require(!lines.empty(), ErrorCode::Ingest, "empty feature file");
  const auto header = split(lines[0], ',');
  require(header.size() >= 2 && trim(header.back()) == "label", ErrorCode::Ingest,
          "feature header must end with a 'label' column");
  FeatureMatrix m;
  for (std::size_t j = 0; j + 1 < header.size(); ++j) {
    const std::string n(trim(header[j]));
    require(n.rfind("eeg.", 0) == 0 || n.rfind("eye.", 0) == 0, ErrorCode::Ingest,
            "feature column '" + n + "' lacks an eeg./eye. prefix");
    m.names.push_back(n);
    m.modality.push_back(n.rfind("eeg.", 0) == 0 ? Modality::Eeg : Modality::Eye);
  }
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto f = split(lines[i], ',');
    require(f.size() == header.size(), ErrorCode::Ingest, "line " + std::to_string(i + 1) + " has wrong width");
    std::vector<double> r;
    for (std::size_t j = 0; j + 1 < f.size(); ++j) r.push_back(parse_double(f[j]));
    rows.push_back(std::move(r));
    m.labels.push_back(parse_label(trim(f.back())));
    m.event_ids.push_back(std::to_string(i - 1));
  }
  m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

}  // namespace affect
