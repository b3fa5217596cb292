#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "straddle/classifiers/logistic.hpp"
#include "straddle/classifiers/matrix.hpp"
#include "straddle/classifiers/tree.hpp"
#include "straddle/random.hpp"

namespace straddle {

// ---------------------------------------------------------------- forest

struct ForestParams {
  int n_estimators = 701;
  int max_depth = 0;  // grow to purity
  std::size_t min_samples_split = 2;
};

/// Bootstrap-aggregated classification trees; every split searches all
/// features. P(1) is the mean of the per-tree leaf class frequencies.
struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;

  std::vector<double> predict_proba(const Matrix& X) const {
    if (X.cols() != n_features) throw std::invalid_argument("random_forest: feature arity mismatch");
    std::vector<double> p(X.rows(), 0.0);
    for (std::size_t i = 0; i < X.rows(); ++i) {
      double s = 0.0;
      for (const auto& t : trees) s += t.predict(X.row(i));
      p[i] = s / double(trees.size());
    }
    return p;
  }
};

inline ForestModel fit_forest(const Matrix& X, std::span<const int> y, const ForestParams& params,
                              std::uint64_t seed) {
  if (params.n_estimators < 1) throw std::invalid_argument("random_forest: n_estimators must be >= 1");
  const std::size_t n = X.rows();
  const auto sorted = SortedColumns::of(X);
  std::vector<double> target(y.begin(), y.end());
  std::vector<double> counts(n);
  TreeParams tp;
  tp.max_depth = params.max_depth;
  tp.min_samples_split = params.min_samples_split;

  ForestModel m;
  m.n_features = X.cols();
  m.trees.reserve(std::size_t(params.n_estimators));
  for (int t = 0; t < params.n_estimators; ++t) {
    Rng rng(mix_seed(seed, std::uint64_t(t)));
    std::fill(counts.begin(), counts.end(), 0.0);
    for (std::size_t k = 0; k < n; ++k) counts[rng.index(n)] += 1.0;
    m.trees.push_back(grow_tree(X, sorted, target, counts, TreeTask::classification, tp));
  }
  return m;
}

// ------------------------------------------------------ gradient boosting

struct BoostingParams {
  int n_estimators = 701;
  double learning_rate = 0.5;
  int max_depth = 3;
};

/// Additive log-odds model: F(x) = F0 + lr * sum_t tree_t(x), P(1) = sigmoid(F).
struct BoostingModel {
  double init_score = 0.0;
  double learning_rate = 0.5;
  std::vector<DecisionTree> trees;
  std::size_t n_features = 0;

  double score(std::span<const double> x, std::size_t stages) const {
    double f = init_score;
    for (std::size_t t = 0; t < std::min(stages, trees.size()); ++t) f += learning_rate * trees[t].predict(x);
    return f;
  }

  std::vector<double> predict_proba(const Matrix& X) const { return predict_proba(X, trees.size()); }

  /// Probabilities using only the first `stages` trees.
  std::vector<double> predict_proba(const Matrix& X, std::size_t stages) const {
    if (X.cols() != n_features) throw std::invalid_argument("gradient_boosting: feature arity mismatch");
    std::vector<double> p(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) p[i] = sigmoid(score(X.row(i), stages));
    return p;
  }
};

/// Binomial-deviance gradient boosting: each stage fits a regression tree
/// to the residuals y - p and sets leaf values by a single Newton step.
inline BoostingModel fit_boosting(const Matrix& X, std::span<const int> y, const BoostingParams& params) {
  if (params.n_estimators < 0) throw std::invalid_argument("gradient_boosting: n_estimators must be >= 0");
  const std::size_t n = X.rows();
  double pos = 0.0;
  for (int v : y) pos += v;
  const double prior = pos / double(n);

  BoostingModel m;
  m.n_features = X.cols();
  m.learning_rate = params.learning_rate;
  m.init_score = std::log(prior / (1.0 - prior));

  const auto sorted = SortedColumns::of(X);
  const std::vector<double> ones(n, 1.0);
  std::vector<double> F(n, m.init_score), residual(n), num, den;
  TreeParams tp;
  tp.max_depth = params.max_depth;
  for (int t = 0; t < params.n_estimators; ++t) {
    for (std::size_t i = 0; i < n; ++i) residual[i] = y[i] - sigmoid(F[i]);
    DecisionTree tree = grow_tree(X, sorted, residual, ones, TreeTask::regression, tp);

    num.assign(tree.nodes.size(), 0.0);
    den.assign(tree.nodes.size(), 0.0);
    std::vector<int> leaf(n);
    for (std::size_t i = 0; i < n; ++i) {
      leaf[i] = tree.leaf_index(X.row(i));
      const double p = y[i] - residual[i];
      num[std::size_t(leaf[i])] += residual[i];
      den[std::size_t(leaf[i])] += p * (1.0 - p);
    }
    for (std::size_t k = 0; k < tree.nodes.size(); ++k) {
      if (tree.nodes[k].feature >= 0) continue;
      tree.nodes[k].value = std::abs(den[k]) < 1e-150 ? 0.0 : num[k] / den[k];
    }
    for (std::size_t i = 0; i < n; ++i) F[i] += m.learning_rate * tree.nodes[std::size_t(leaf[i])].value;
    m.trees.push_back(std::move(tree));
  }
  return m;
}

// -------------------------------------------------------------- adaboost

struct AdaBoostParams {
  int n_estimators = 50;
  double learning_rate = 1.0;
};

/// Real AdaBoost (SAMME.R, two classes) on depth-1 trees. Each stump
/// contributes log(p1/p0) from its clipped leaf class frequencies and
/// P(1) = sigmoid(mean contribution).
struct AdaBoostModel {
  std::vector<DecisionTree> stumps;
  std::size_t n_features = 0;

  static double stump_logit(const DecisionTree& s, std::span<const double> x) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const double p1 = std::max(s.predict(x), eps);
    const double p0 = std::max(1.0 - s.predict(x), eps);
    return std::log(p1) - std::log(p0);
  }

  std::vector<double> predict_proba(const Matrix& X) const {
    if (X.cols() != n_features) throw std::invalid_argument("adaboost: feature arity mismatch");
    std::vector<double> p(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) {
      double d = 0.0;
      for (const auto& s : stumps) d += stump_logit(s, X.row(i));
      p[i] = sigmoid(d / double(stumps.size()));
    }
    return p;
  }
};

inline AdaBoostModel fit_adaboost(const Matrix& X, std::span<const int> y, const AdaBoostParams& params) {
  if (params.n_estimators < 1) throw std::invalid_argument("adaboost: n_estimators must be >= 1");
  const std::size_t n = X.rows();
  const auto sorted = SortedColumns::of(X);
  std::vector<double> target(y.begin(), y.end());
  std::vector<double> w(n, 1.0 / double(n));
  TreeParams tp;
  tp.max_depth = 1;

  AdaBoostModel m;
  m.n_features = X.cols();
  for (int t = 0; t < params.n_estimators; ++t) {
    DecisionTree stump = grow_tree(X, sorted, target, w, TreeTask::classification, tp);

    double error = 0.0;
    std::vector<double> logit(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double p1 = stump.predict(X.row(i));
      const int predicted = p1 > 0.5 ? 1 : 0;  // argmax, ties to class 0
      if (predicted != y[i]) error += w[i];
      logit[i] = AdaBoostModel::stump_logit(stump, X.row(i));
    }
    m.stumps.push_back(std::move(stump));
    if (error <= 0.0) break;

    // w_i *= exp(-lr/2 * (log p_true - log p_other)), applied to positive weights.
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double margin = y[i] == 1 ? logit[i] : -logit[i];
      if (w[i] > 0.0) w[i] *= std::exp(-0.5 * params.learning_rate * margin);
      total += w[i];
    }
    if (!(total > 0.0) || !std::isfinite(total)) break;
    for (double& v : w) v /= total;
  }
  return m;
}

}  // namespace straddle
