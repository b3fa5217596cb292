#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "straddle/classifiers/matrix.hpp"
#include "straddle/classifiers/standardizer.hpp"

namespace straddle {

enum class KnnMetric { euclidean, cosine };
enum class KnnWeighting { uniform, distance };

struct KnnParams {
  int k = 13;
  KnnMetric metric = KnnMetric::euclidean;
  KnnWeighting weighting = KnnWeighting::uniform;
};

struct Neighbor {
  double distance = 0.0;
  std::size_t index = 0;
  friend bool operator<(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.index < b.index);
  }
  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

inline double knn_distance(std::span<const double> a, std::span<const double> b, KnnMetric metric) {
  if (metric == KnnMetric::euclidean) {
    double s = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
    return std::sqrt(s);
  }
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    ab += a[j] * b[j];
    aa += a[j] * a[j];
    bb += b[j] * b[j];
  }
  // A zero vector has similarity 0 with everything.
  if (aa == 0.0 || bb == 0.0) return 1.0;
  return std::max(0.0, 1.0 - ab / std::sqrt(aa * bb));
}

/// The k nearest training rows by (distance, index), nearest first.
inline std::vector<Neighbor> nearest_neighbors(const Matrix& train, std::span<const double> query, std::size_t k,
                                               KnnMetric metric) {
  std::vector<Neighbor> all(train.rows());
  for (std::size_t i = 0; i < train.rows(); ++i) all[i] = {knn_distance(train.row(i), query, metric), i};
  k = std::min(k, all.size());
  std::nth_element(all.begin(), all.begin() + long(k) - (k > 0 ? 1 : 0), all.end());
  all.resize(k);
  std::sort(all.begin(), all.end());
  return all;
}

struct KnnModel {
  KnnParams params;
  Standardizer scaler;
  Matrix train;  // standardized
  std::vector<int> labels;

  std::size_t effective_k() const { return std::min<std::size_t>(std::size_t(params.k), train.rows()); }

  double proba_one(std::span<const double> raw) const {
    std::vector<double> q(raw.size());
    scaler.apply_row(raw, q);
    const auto nn = nearest_neighbors(train, q, effective_k(), params.metric);
    if (params.weighting == KnnWeighting::uniform) {
      double votes = 0.0;
      for (const auto& n : nn) votes += labels[n.index];
      return votes / double(nn.size());
    }
    // Exact matches take all the weight.
    std::size_t exact = 0, exact_pos = 0;
    for (const auto& n : nn)
      if (n.distance == 0.0) {
        ++exact;
        exact_pos += std::size_t(labels[n.index]);
      }
    if (exact > 0) return double(exact_pos) / double(exact);
    double wsum = 0.0, wpos = 0.0;
    for (const auto& n : nn) {
      const double w = 1.0 / n.distance;
      wsum += w;
      if (labels[n.index] == 1) wpos += w;
    }
    return wpos / wsum;
  }

  std::vector<double> predict_proba(const Matrix& X) const {
    if (X.cols() != train.cols()) throw std::invalid_argument("knn: feature arity mismatch");
    std::vector<double> p(X.rows());
    for (std::size_t i = 0; i < X.rows(); ++i) p[i] = proba_one(X.row(i));
    return p;
  }
};

/// k larger than the training set is clamped to its size.
inline KnnModel fit_knn(const Matrix& X, std::span<const int> y, const KnnParams& params) {
  if (params.k < 1) throw std::invalid_argument("knn: k must be >= 1");
  KnnModel m;
  m.params = params;
  m.scaler = Standardizer::fit(X);
  m.train = m.scaler.transform(X);
  m.labels.assign(y.begin(), y.end());
  return m;
}

}  // namespace straddle
