#pragma once

#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "straddle/classifiers/ensembles.hpp"
#include "straddle/classifiers/knn.hpp"
#include "straddle/classifiers/logistic.hpp"
#include "straddle/classifiers/matrix.hpp"
#include "straddle/classifiers/svc.hpp"
#include "straddle/error.hpp"

namespace straddle {

enum class ClassifierKind { logistic_regression, knn, random_forest, gradient_boosting, adaboost, svc };

inline std::string_view kind_name(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::logistic_regression: return "logistic_regression";
    case ClassifierKind::knn: return "knn";
    case ClassifierKind::random_forest: return "random_forest";
    case ClassifierKind::gradient_boosting: return "gradient_boosting";
    case ClassifierKind::adaboost: return "adaboost";
    case ClassifierKind::svc: return "svc";
  }
  return "?";
}

inline std::optional<ClassifierKind> parse_kind(std::string_view s) {
  for (auto k : {ClassifierKind::logistic_regression, ClassifierKind::knn, ClassifierKind::random_forest,
                 ClassifierKind::gradient_boosting, ClassifierKind::adaboost, ClassifierKind::svc})
    if (kind_name(k) == s) return k;
  return std::nullopt;
}

using Hyperparameters = std::variant<LogisticParams, KnnParams, ForestParams, BoostingParams, AdaBoostParams, SvcParams>;

struct ClassifierSpec {
  ClassifierKind kind = ClassifierKind::logistic_regression;
  Hyperparameters params = LogisticParams{};
  std::uint64_t seed = 0;
};

/// Default hyperparameters for `kind`.
inline Hyperparameters default_params(ClassifierKind kind) {
  switch (kind) {
    case ClassifierKind::logistic_regression: return LogisticParams{};
    case ClassifierKind::knn: return KnnParams{};
    case ClassifierKind::random_forest: return ForestParams{};
    case ClassifierKind::gradient_boosting: return BoostingParams{};
    case ClassifierKind::adaboost: return AdaBoostParams{};
    case ClassifierKind::svc: return SvcParams{};
  }
  return LogisticParams{};
}

/// Whether fitted models differ between seeds. Only the forest samples.
inline bool is_seed_dependent(ClassifierKind kind) { return kind == ClassifierKind::random_forest; }

/// Overrides n_estimators for ensemble kinds; other kinds are returned unchanged.
inline void set_estimator_count(ClassifierSpec& spec, int n) {
  std::visit(
      [n](auto& p) {
        if constexpr (requires { p.n_estimators; }) p.n_estimators = n;
      },
      spec.params);
}

// ------------------------------------------------------- JSON parameters

namespace detail {

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                           std::string_view where) {
  if (!j.is_object()) throw ConfigError(std::string(where) + ": params must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (auto a : allowed) ok = ok || it.key() == a;
    if (!ok) throw ConfigError(std::string(where) + ": unknown parameter '" + it.key() + "'");
  }
}

template <typename T>
void read_param(const nlohmann::json& j, const char* key, T& out, std::string_view where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string(where) + ": bad value for '" + key + "'");
  }
}

}  // namespace detail

/// Kind defaults overlaid with `j`; unknown keys are rejected.
inline Hyperparameters params_from_json(ClassifierKind kind, const nlohmann::json& j) {
  const std::string where = std::string(kind_name(kind));
  const nlohmann::json empty = nlohmann::json::object();
  const nlohmann::json& p = j.is_null() ? empty : j;
  switch (kind) {
    case ClassifierKind::logistic_regression: {
      detail::reject_unknown(p, {"C", "max_iter", "tol", "warm_start"}, where);
      LogisticParams out;
      detail::read_param(p, "C", out.C, where);
      detail::read_param(p, "max_iter", out.max_iter, where);
      detail::read_param(p, "tol", out.tol, where);
      detail::read_param(p, "warm_start", out.warm_start, where);
      if (!(out.C > 0) || out.max_iter < 1) throw ConfigError(where + ": C must be > 0 and max_iter >= 1");
      return out;
    }
    case ClassifierKind::knn: {
      detail::reject_unknown(p, {"k", "metric", "weights"}, where);
      KnnParams out;
      detail::read_param(p, "k", out.k, where);
      std::string metric = "euclidean", weights = "uniform";
      detail::read_param(p, "metric", metric, where);
      detail::read_param(p, "weights", weights, where);
      if (metric == "euclidean") out.metric = KnnMetric::euclidean;
      else if (metric == "cosine") out.metric = KnnMetric::cosine;
      else throw ConfigError(where + ": metric must be euclidean or cosine");
      if (weights == "uniform") out.weighting = KnnWeighting::uniform;
      else if (weights == "distance") out.weighting = KnnWeighting::distance;
      else throw ConfigError(where + ": weights must be uniform or distance");
      // k defaults follow the weighting: 13 for uniform, 101 for distance.
      if (!p.contains("k")) out.k = out.weighting == KnnWeighting::uniform ? 13 : 101;
      if (out.k < 1) throw ConfigError(where + ": k must be >= 1");
      return out;
    }
    case ClassifierKind::random_forest: {
      detail::reject_unknown(p, {"n_estimators", "max_depth", "min_samples_split"}, where);
      ForestParams out;
      detail::read_param(p, "n_estimators", out.n_estimators, where);
      detail::read_param(p, "max_depth", out.max_depth, where);
      detail::read_param(p, "min_samples_split", out.min_samples_split, where);
      if (out.n_estimators < 1 || out.max_depth < 0 || out.min_samples_split < 2)
        throw ConfigError(where + ": invalid forest parameters");
      return out;
    }
    case ClassifierKind::gradient_boosting: {
      detail::reject_unknown(p, {"n_estimators", "learning_rate", "max_depth"}, where);
      BoostingParams out;
      detail::read_param(p, "n_estimators", out.n_estimators, where);
      detail::read_param(p, "learning_rate", out.learning_rate, where);
      detail::read_param(p, "max_depth", out.max_depth, where);
      if (out.n_estimators < 0 || !(out.learning_rate > 0) || out.max_depth < 1)
        throw ConfigError(where + ": invalid boosting parameters");
      return out;
    }
    case ClassifierKind::adaboost: {
      detail::reject_unknown(p, {"n_estimators", "learning_rate"}, where);
      AdaBoostParams out;
      detail::read_param(p, "n_estimators", out.n_estimators, where);
      detail::read_param(p, "learning_rate", out.learning_rate, where);
      if (out.n_estimators < 1 || !(out.learning_rate > 0)) throw ConfigError(where + ": invalid adaboost parameters");
      return out;
    }
    case ClassifierKind::svc: {
      detail::reject_unknown(p, {"C", "gamma", "tol", "max_passes"}, where);
      SvcParams out;
      detail::read_param(p, "C", out.C, where);
      if (p.contains("gamma") && !(p.at("gamma").is_string() && p.at("gamma") == "scale")) {
        double g = 0;
        detail::read_param(p, "gamma", g, where);
        if (!(g > 0)) throw ConfigError(where + ": gamma must be > 0 or \"scale\"");
        out.gamma = g;
      }
      detail::read_param(p, "tol", out.tol, where);
      detail::read_param(p, "max_passes", out.max_passes, where);
      if (!(out.C > 0) || !(out.tol > 0) || out.max_passes < 1) throw ConfigError(where + ": invalid svc parameters");
      return out;
    }
  }
  throw ConfigError("unknown classifier kind");
}

inline nlohmann::json params_to_json(const Hyperparameters& hp) {
  using nlohmann::json;
  return std::visit(
      [](const auto& p) -> json {
        using P = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<P, LogisticParams>) {
          return {{"C", p.C}, {"max_iter", p.max_iter}, {"tol", p.tol}, {"warm_start", p.warm_start}};
        } else if constexpr (std::is_same_v<P, KnnParams>) {
          return {{"k", p.k},
                  {"metric", p.metric == KnnMetric::euclidean ? "euclidean" : "cosine"},
                  {"weights", p.weighting == KnnWeighting::uniform ? "uniform" : "distance"}};
        } else if constexpr (std::is_same_v<P, ForestParams>) {
          return {{"n_estimators", p.n_estimators}, {"max_depth", p.max_depth},
                  {"min_samples_split", p.min_samples_split}};
        } else if constexpr (std::is_same_v<P, BoostingParams>) {
          return {{"n_estimators", p.n_estimators}, {"learning_rate", p.learning_rate}, {"max_depth", p.max_depth}};
        } else if constexpr (std::is_same_v<P, AdaBoostParams>) {
          return {{"n_estimators", p.n_estimators}, {"learning_rate", p.learning_rate}};
        } else {
          json j = {{"C", p.C}, {"tol", p.tol}, {"max_passes", p.max_passes}};
          if (p.gamma) j["gamma"] = *p.gamma; else j["gamma"] = "scale";
          return j;
        }
      },
      hp);
}

// ------------------------------------------------------------ fit/predict

using FittedState = std::variant<LogisticModel, KnnModel, ForestModel, BoostingModel, AdaBoostModel, SvcModel>;

struct TrainedModel {
  ClassifierSpec spec;
  std::size_t n_features = 0;
  FittedState state;
};

struct FitOptions {
  /// Warm start source for iterative kinds (logistic regression).
  const TrainedModel* warm = nullptr;
  /// Optimizer segments for iterative kinds; others fit once.
  int epochs = 1;
  /// Called after each epoch (once for non-iterative kinds).
  std::function<void(int epoch, const TrainedModel&)> on_epoch;
};

inline std::vector<double> predict_proba(const TrainedModel& model, const Matrix& X) {
  if (X.cols() != model.n_features)
    throw std::invalid_argument("predict_proba: model expects " + std::to_string(model.n_features) +
                                " features, got " + std::to_string(X.cols()));
  auto p = std::visit([&](const auto& m) { return m.predict_proba(X); }, model.state);
  for (double& v : p) v = std::clamp(v, 0.0, 1.0);
  return p;
}

inline TrainedModel fit(const ClassifierSpec& spec, const Matrix& X, std::span<const int> y,
                        const FitOptions& options = {}) {
  if (X.rows() < 2) throw std::invalid_argument("fit: need at least 2 samples");
  if (X.cols() < 1) throw std::invalid_argument("fit: need at least 1 feature");
  if (y.size() != X.rows()) throw std::invalid_argument("fit: label count does not match rows");
  if (!X.all_finite()) throw std::invalid_argument("fit: non-finite feature value");
  std::size_t pos = 0;
  for (int v : y) {
    if (v != 0 && v != 1) throw std::invalid_argument("fit: labels must be 0 or 1");
    pos += std::size_t(v);
  }
  if (pos == 0 || pos == y.size()) throw std::invalid_argument("fit: training labels contain a single class");

  TrainedModel out;
  out.spec = spec;
  out.n_features = X.cols();
  switch (spec.kind) {
    case ClassifierKind::logistic_regression: {
      const auto& p = std::get<LogisticParams>(spec.params);
      const LogisticModel* warm = nullptr;
      if (options.warm && std::holds_alternative<LogisticModel>(options.warm->state))
        warm = &std::get<LogisticModel>(options.warm->state);
      LogisticEpochHook hook;
      if (options.on_epoch) {
        hook = [&](int e, const LogisticModel& m) {
          TrainedModel partial{spec, X.cols(), m};
          options.on_epoch(e, partial);
        };
      }
      out.state = fit_logistic(X, y, p, warm, options.epochs, hook);
      return out;
    }
    case ClassifierKind::knn: out.state = fit_knn(X, y, std::get<KnnParams>(spec.params)); break;
    case ClassifierKind::random_forest:
      out.state = fit_forest(X, y, std::get<ForestParams>(spec.params), spec.seed);
      break;
    case ClassifierKind::gradient_boosting:
      out.state = fit_boosting(X, y, std::get<BoostingParams>(spec.params));
      break;
    case ClassifierKind::adaboost: out.state = fit_adaboost(X, y, std::get<AdaBoostParams>(spec.params)); break;
    case ClassifierKind::svc: out.state = fit_svc(X, y, std::get<SvcParams>(spec.params)); break;
  }
  if (options.on_epoch)
    for (int e = 0; e < std::max(options.epochs, 1); ++e) options.on_epoch(e, out);
  return out;
}

/// 1 where probability > threshold (strict).
inline std::vector<int> decide(std::span<const double> probs, double threshold) {
  std::vector<int> d(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) d[i] = probs[i] > threshold ? 1 : 0;
  return d;
}

// ------------------------------------------------------------ save / load

inline constexpr int kModelFormatVersion = 1;

namespace detail {

using nlohmann::json;

inline json matrix_json(const Matrix& m) {
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::vector<double>(m.data().begin(), m.data().end())}};
}
inline Matrix matrix_from(const json& j) {
  Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != m.rows() * m.cols()) throw std::runtime_error("model: matrix size mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t c = 0; c < m.cols(); ++c) m(i, c) = data[i * m.cols() + c];
  return m;
}
inline json scaler_json(const Standardizer& s) { return {{"mean", s.mean}, {"scale", s.scale}}; }
inline Standardizer scaler_from(const json& j) {
  return {j.at("mean").get<std::vector<double>>(), j.at("scale").get<std::vector<double>>()};
}
inline json tree_json(const DecisionTree& t) {
  json nodes = json::array();
  for (const auto& n : t.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.weight});
  return nodes;
}
inline DecisionTree tree_from(const json& j) {
  DecisionTree t;
  for (const auto& n : j)
    t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                       n.at(4).get<double>(), n.at(5).get<double>()});
  return t;
}
inline json trees_json(const std::vector<DecisionTree>& ts) {
  json a = json::array();
  for (const auto& t : ts) a.push_back(tree_json(t));
  return a;
}
inline std::vector<DecisionTree> trees_from(const json& j) {
  std::vector<DecisionTree> ts;
  for (const auto& t : j) ts.push_back(tree_from(t));
  return ts;
}

}  // namespace detail

/// Versioned JSON document:
///   {"format": "straddle-model", "version": 1, "kind": ..., "seed": ...,
///    "n_features": ..., "params": {...}, "state": {...}}
/// Doubles are written in shortest round-trip form, so a loaded model
/// predicts exactly as the saved one.
inline nlohmann::json model_to_json(const TrainedModel& m) {
  using nlohmann::json;
  json state = std::visit(
      [](const auto& s) -> json {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, LogisticModel>) {
          return {{"scaler", detail::scaler_json(s.scaler)}, {"weights", s.weights}, {"intercept", s.intercept}};
        } else if constexpr (std::is_same_v<S, KnnModel>) {
          return {{"scaler", detail::scaler_json(s.scaler)}, {"train", detail::matrix_json(s.train)},
                  {"labels", s.labels}};
        } else if constexpr (std::is_same_v<S, ForestModel>) {
          return {{"trees", detail::trees_json(s.trees)}};
        } else if constexpr (std::is_same_v<S, BoostingModel>) {
          return {{"init_score", s.init_score}, {"learning_rate", s.learning_rate},
                  {"trees", detail::trees_json(s.trees)}};
        } else if constexpr (std::is_same_v<S, AdaBoostModel>) {
          return {{"stumps", detail::trees_json(s.stumps)}};
        } else {
          return {{"scaler", detail::scaler_json(s.scaler)}, {"gamma", s.gamma},
                  {"support", detail::matrix_json(s.support)}, {"coef", s.coef}, {"rho", s.rho},
                  {"calibration", {s.calibration.a, s.calibration.b}}};
        }
      },
      m.state);
  return {{"format", "straddle-model"},
          {"version", kModelFormatVersion},
          {"kind", kind_name(m.spec.kind)},
          {"seed", m.spec.seed},
          {"n_features", m.n_features},
          {"params", params_to_json(m.spec.params)},
          {"state", std::move(state)}};
}

inline TrainedModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "straddle-model") throw std::runtime_error("model: not a straddle-model document");
  if (j.at("version").get<int>() != kModelFormatVersion) throw std::runtime_error("model: unsupported version");
  auto kind = parse_kind(j.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("model: unknown kind");
  TrainedModel m;
  m.spec.kind = *kind;
  m.spec.seed = j.at("seed").get<std::uint64_t>();
  m.spec.params = params_from_json(*kind, j.at("params"));
  m.n_features = j.at("n_features").get<std::size_t>();
  const auto& s = j.at("state");
  switch (*kind) {
    case ClassifierKind::logistic_regression: {
      LogisticModel lm;
      lm.scaler = detail::scaler_from(s.at("scaler"));
      lm.weights = s.at("weights").get<std::vector<double>>();
      lm.intercept = s.at("intercept").get<double>();
      m.state = std::move(lm);
      break;
    }
    case ClassifierKind::knn: {
      KnnModel km;
      km.params = std::get<KnnParams>(m.spec.params);
      km.scaler = detail::scaler_from(s.at("scaler"));
      km.train = detail::matrix_from(s.at("train"));
      km.labels = s.at("labels").get<std::vector<int>>();
      m.state = std::move(km);
      break;
    }
    case ClassifierKind::random_forest: {
      ForestModel fm;
      fm.n_features = m.n_features;
      fm.trees = detail::trees_from(s.at("trees"));
      m.state = std::move(fm);
      break;
    }
    case ClassifierKind::gradient_boosting: {
      BoostingModel bm;
      bm.n_features = m.n_features;
      bm.init_score = s.at("init_score").get<double>();
      bm.learning_rate = s.at("learning_rate").get<double>();
      bm.trees = detail::trees_from(s.at("trees"));
      m.state = std::move(bm);
      break;
    }
    case ClassifierKind::adaboost: {
      AdaBoostModel am;
      am.n_features = m.n_features;
      am.stumps = detail::trees_from(s.at("stumps"));
      m.state = std::move(am);
      break;
    }
    case ClassifierKind::svc: {
      SvcModel sm;
      sm.scaler = detail::scaler_from(s.at("scaler"));
      sm.gamma = s.at("gamma").get<double>();
      sm.support = detail::matrix_from(s.at("support"));
      sm.coef = s.at("coef").get<std::vector<double>>();
      sm.rho = s.at("rho").get<double>();
      sm.calibration = {s.at("calibration").at(0).get<double>(), s.at("calibration").at(1).get<double>()};
      m.state = std::move(sm);
      break;
    }
  }
  return m;
}

inline void save_model(const std::string& path, const TrainedModel& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << model_to_json(m).dump() << '\n';
}

inline TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return model_from_json(nlohmann::json::parse(in));
}

}  // namespace straddle
