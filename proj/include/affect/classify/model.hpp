#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <cmath>
#include <string>
#include <vector>

#include "affect/classify/calibrate.hpp"
#include "affect/classify/folds.hpp"
#include "affect/classify/svm.hpp"
#include "affect/core/types.hpp"
#include "affect/features/extract.hpp"
#include "affect/rng.hpp"
#include "affect/select/ilfs.hpp"

namespace affect {

inline constexpr const char* kModelSchema = "affect.model/1";

struct TrainConfig {
  double alpha = 0.5;
  int top_k = 20;
  std::vector<std::string> forced_features;  // names or globs; bypasses ranking
  KernelParams kernel;
  SmoOptions smo;
  int calibration_folds = 5;
  CalibrationOptions calibration;
};

struct Prediction {
  double decision = 0.0;
  double posterior = 0.5;
  Label label = Label::Dislike;
};

/// Like iff p > 0.5.
inline Label label_from_posterior(double p) { return p > 0.5 ? Label::Like : Label::Dislike; }

struct TrainedModel {
  std::vector<std::string> input_names;     // columns of the training matrix
  std::vector<int> selected;                // indices into input_names
  std::vector<std::string> selected_names;
  std::vector<double> ranking_scores;       // empty when features were forced
  Eigen::VectorXd scale_mean;
  Eigen::VectorXd scale_std;
  KernelParams kernel;                      // gamma resolved
  Eigen::MatrixXd support_vectors;          // standardized, [n_sv x n_selected]
  Eigen::VectorXd dual_coef;                // alpha_i * y_i
  double rho = 0.0;
  Calibration calibration;
  std::uint64_t seed = 0;
  int n_train = 0;
  double objective = 0.0;
  long iterations = 0;
  std::vector<std::string> warnings;

  Eigen::VectorXd standardize(const Eigen::VectorXd& raw_selected) const {
    return (raw_selected - scale_mean).cwiseQuotient(scale_std);
  }

  double decision_standardized(const Eigen::VectorXd& z) const {
    double f = -rho;
    for (Eigen::Index i = 0; i < support_vectors.rows(); ++i)
      f += dual_coef[i] * poly_kernel(support_vectors.row(i).transpose(), z, kernel.gamma, kernel.coef0, kernel.degree);
    return f;
  }

  /// `raw_selected` holds the unscaled values of the selected columns.
  Prediction predict_selected(const Eigen::VectorXd& raw_selected) const {
    require(raw_selected.size() == static_cast<Eigen::Index>(selected.size()), ErrorCode::ColumnMismatch,
            "expected " + std::to_string(selected.size()) + " values, got " + std::to_string(raw_selected.size()));
    Prediction p;
    p.decision = decision_standardized(standardize(raw_selected));
    p.posterior = sigmoid_posterior(p.decision, calibration);
    p.label = label_from_posterior(p.posterior);
    return p;
  }
};

/// Positions of the model's selected columns inside `names`.
inline std::vector<int> map_columns(const TrainedModel& model, const std::vector<std::string>& names) {
  std::vector<int> idx;
  for (const auto& n : model.selected_names) {
    const auto it = std::find(names.begin(), names.end(), n);
    require(it != names.end(), ErrorCode::ColumnMismatch, "input lacks model column '" + n + "'");
    idx.push_back(static_cast<int>(it - names.begin()));
  }
  return idx;
}

inline std::vector<Prediction> predict(const TrainedModel& model, const FeatureMatrix& m) {
  const auto idx = map_columns(model, m.names);
  std::vector<Prediction> out;
  Eigen::VectorXd v(static_cast<Eigen::Index>(idx.size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < idx.size(); ++j) v[static_cast<Eigen::Index>(j)] = m.values(i, idx[j]);
    out.push_back(model.predict_selected(v));
  }
  return out;
}

namespace detail {

struct SvmFit {
  Eigen::MatrixXd support_vectors;
  Eigen::VectorXd dual_coef;
  double rho = 0;
  double objective = 0;
  long iterations = 0;
};

inline SvmFit fit_svm(const Eigen::MatrixXd& z, const std::vector<int>& y, const KernelParams& k,
                      const SmoOptions& smo) {
  const Eigen::MatrixXd gram = poly_gram(z, z, k.gamma, k.coef0, k.degree);
  const SvmSolution s = smo_solve(gram, y, k.c, smo);
  SvmFit fit;
  std::vector<Eigen::Index> sv;
  for (Eigen::Index i = 0; i < z.rows(); ++i)
    if (s.alpha[i] > 0) sv.push_back(i);
  fit.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), z.cols());
  fit.dual_coef.resize(static_cast<Eigen::Index>(sv.size()));
  for (std::size_t r = 0; r < sv.size(); ++r) {
    fit.support_vectors.row(static_cast<Eigen::Index>(r)) = z.row(sv[r]);
    fit.dual_coef[static_cast<Eigen::Index>(r)] = s.alpha[sv[r]] * (y[static_cast<std::size_t>(sv[r])] > 0 ? 1.0 : -1.0);
  }
  fit.rho = s.rho;
  fit.objective = s.objective;
  fit.iterations = s.iterations;
  return fit;
}

inline double svm_decision(const SvmFit& fit, const Eigen::VectorXd& z, const KernelParams& k) {
  double f = -fit.rho;
  for (Eigen::Index i = 0; i < fit.support_vectors.rows(); ++i)
    f += fit.dual_coef[i] * poly_kernel(fit.support_vectors.row(i).transpose(), z, k.gamma, k.coef0, k.degree);
  return f;
}

}  // namespace detail

/// Ranking -> top-k -> z-score -> SMO -> sigmoid calibration on inner
/// cross-validated decision values. Everything is fitted on `m` only.
inline TrainedModel train(const FeatureMatrix& m, const TrainConfig& cfg, std::uint64_t seed) {
  require(m.rows() >= 4, ErrorCode::TooFewSamples, "training needs at least 4 samples");
  const std::vector<int> y = m.label_signs();
  const bool pos = std::count(y.begin(), y.end(), 1) > 0;
  const bool neg = std::count(y.begin(), y.end(), -1) > 0;
  require(pos && neg, ErrorCode::SingleClass, "training data holds a single class");

  TrainedModel model;
  model.input_names = m.names;
  model.seed = seed;
  model.n_train = static_cast<int>(m.rows());

  std::vector<int> chosen;
  if (!cfg.forced_features.empty()) {
    chosen = resolve_columns(m.names, cfg.forced_features);
  } else {
    const FeatureRanking rk = rank_features(m.values, y, cfg.alpha);
    model.ranking_scores = rk.scores;
    const int k = std::min<int>(cfg.top_k, static_cast<int>(m.cols()));
    chosen = select_top_k(rk, k);
  }

  // Standardize; columns without spread on the training rows carry no
  // information and would divide by zero.
  std::vector<double> mu, sd;
  for (int j : chosen) {
    const Eigen::VectorXd col = m.values.col(j);
    const double mean = col.mean();
    const double var = (col.array() - mean).square().mean();
    if (!(var > 0)) {
      model.warnings.push_back("dropped zero-variance column " + m.names[static_cast<std::size_t>(j)]);
      continue;
    }
    model.selected.push_back(j);
    model.selected_names.push_back(m.names[static_cast<std::size_t>(j)]);
    mu.push_back(mean);
    sd.push_back(std::sqrt(var));
  }
  require(!model.selected.empty(), ErrorCode::DegenerateLabels, "no selected column varies on the training set");
  const auto p = static_cast<Eigen::Index>(model.selected.size());
  model.scale_mean = Eigen::Map<const Eigen::VectorXd>(mu.data(), p);
  model.scale_std = Eigen::Map<const Eigen::VectorXd>(sd.data(), p);

  Eigen::MatrixXd z(m.rows(), p);
  for (Eigen::Index j = 0; j < p; ++j)
    z.col(j) = (m.values.col(model.selected[static_cast<std::size_t>(j)]).array() - model.scale_mean[j]) /
               model.scale_std[j];

  model.kernel = cfg.kernel;
  model.kernel.gamma = cfg.kernel.resolved_gamma(p);
  const detail::SvmFit fit = detail::fit_svm(z, y, model.kernel, cfg.smo);
  model.support_vectors = fit.support_vectors;
  model.dual_coef = fit.dual_coef;
  model.rho = fit.rho;
  model.objective = fit.objective;
  model.iterations = fit.iterations;

  // Decision values for calibration: inner folds when both classes allow,
  // otherwise the in-sample values.
  std::vector<double> dec(static_cast<std::size_t>(m.rows()));
  bool inner_ok = false;
  if (cfg.calibration_folds >= 2) {
    try {
      Rng rng(derive_seed(seed, 0xCA11B));
      const auto fold = stratified_folds(y, cfg.calibration_folds, rng, 1);
      for (int f = 0; f < cfg.calibration_folds; ++f) {
        const auto tr = rows_where(fold, f, false);
        const auto te = rows_where(fold, f, true);
        Eigen::MatrixXd zt(static_cast<Eigen::Index>(tr.size()), p);
        std::vector<int> yt;
        for (std::size_t r = 0; r < tr.size(); ++r) {
          zt.row(static_cast<Eigen::Index>(r)) = z.row(tr[r]);
          yt.push_back(y[static_cast<std::size_t>(tr[r])]);
        }
        const detail::SvmFit inner = detail::fit_svm(zt, yt, model.kernel, cfg.smo);
        for (int r : te) dec[static_cast<std::size_t>(r)] = detail::svm_decision(inner, z.row(r).transpose(), model.kernel);
      }
      inner_ok = true;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::UnstratifiableFolds && e.code() != ErrorCode::TooFewSamples &&
          e.code() != ErrorCode::SingleClass)
        throw;
      model.warnings.push_back(std::string("calibration on in-sample decision values: ") + e.what());
    }
  }
  if (!inner_ok)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      dec[static_cast<std::size_t>(i)] = detail::svm_decision(fit, z.row(i).transpose(), model.kernel);
  model.calibration = calibrate(dec, y, cfg.calibration);
  return model;
}

// ---- JSON -----------------------------------------------------------------

inline nlohmann::json vec_json(const Eigen::VectorXd& v) {
  return nlohmann::json(std::vector<double>(v.data(), v.data() + v.size()));
}

inline Eigen::VectorXd vec_from_json(const nlohmann::json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

inline nlohmann::json to_json(const TrainedModel& m) {
  nlohmann::json j;
  j["schema"] = kModelSchema;
  j["input_names"] = m.input_names;
  j["selected"] = m.selected;
  j["selected_names"] = m.selected_names;
  nlohmann::json scores = nlohmann::json::array();
  for (double s : m.ranking_scores) scores.push_back(std::isfinite(s) ? nlohmann::json(s) : nlohmann::json(nullptr));
  j["ranking_scores"] = scores;
  j["scaler"] = {{"mean", vec_json(m.scale_mean)}, {"std", vec_json(m.scale_std)}};
  j["kernel"] = {{"degree", m.kernel.degree}, {"gamma", m.kernel.gamma}, {"coef0", m.kernel.coef0}, {"C", m.kernel.c}};
  nlohmann::json sv = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.support_vectors.rows(); ++i) sv.push_back(vec_json(m.support_vectors.row(i).transpose()));
  j["support_vectors"] = sv;
  j["dual_coef"] = vec_json(m.dual_coef);
  j["rho"] = m.rho;
  j["calibration"] = {{"A", m.calibration.a}, {"B", m.calibration.b}};
  j["training"] = {{"seed", m.seed}, {"n_train", m.n_train}, {"objective", m.objective},
                   {"iterations", m.iterations}, {"warnings", m.warnings}};
  return j;
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  try {
    require(j.at("schema") == kModelSchema, ErrorCode::Ingest, "unsupported model schema");
    TrainedModel m;
    m.input_names = j.at("input_names").get<std::vector<std::string>>();
    m.selected = j.at("selected").get<std::vector<int>>();
    m.selected_names = j.at("selected_names").get<std::vector<std::string>>();
    for (const auto& s : j.at("ranking_scores"))
      m.ranking_scores.push_back(s.is_null() ? -std::numeric_limits<double>::infinity() : s.get<double>());
    m.scale_mean = vec_from_json(j.at("scaler").at("mean"));
    m.scale_std = vec_from_json(j.at("scaler").at("std"));
    const auto& k = j.at("kernel");
    m.kernel.degree = k.at("degree");
    m.kernel.gamma = k.at("gamma");
    m.kernel.coef0 = k.at("coef0");
    m.kernel.c = k.at("C");
    const auto& sv = j.at("support_vectors");
    m.support_vectors.resize(static_cast<Eigen::Index>(sv.size()), static_cast<Eigen::Index>(m.selected.size()));
    for (std::size_t i = 0; i < sv.size(); ++i) m.support_vectors.row(static_cast<Eigen::Index>(i)) = vec_from_json(sv[i]).transpose();
    m.dual_coef = vec_from_json(j.at("dual_coef"));
    m.rho = j.at("rho");
    m.calibration.a = j.at("calibration").at("A");
    m.calibration.b = j.at("calibration").at("B");
    const auto& t = j.at("training");
    m.seed = t.at("seed");
    m.n_train = t.at("n_train");
    m.objective = t.at("objective");
    m.iterations = t.at("iterations");
    m.warnings = t.at("warnings").get<std::vector<std::string>>();
    require(m.scale_mean.size() == static_cast<Eigen::Index>(m.selected.size()) &&
                m.scale_std.size() == m.scale_mean.size() && m.dual_coef.size() == m.support_vectors.rows(),
            ErrorCode::Ingest, "model arrays have inconsistent sizes");
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Ingest, std::string("malformed model file: ") + e.what());
  }
}

}  // namespace affect
