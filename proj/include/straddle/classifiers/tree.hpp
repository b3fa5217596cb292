#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "straddle/classifiers/matrix.hpp"

namespace straddle {

enum class TreeTask {
  classification,  // weighted Gini on 0/1 targets; leaf value = weighted fraction of 1s
  regression,      // weighted squared error; leaf value = weighted mean target
};

struct TreeParams {
  int max_depth = 0;  // 0 = unlimited
  std::size_t min_samples_split = 2;
  std::size_t min_samples_leaf = 1;
};

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0;
  double weight = 0.0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  int leaf_index(std::span<const double> x) const {
    int i = 0;
    while (nodes[std::size_t(i)].feature >= 0) {
      const auto& n = nodes[std::size_t(i)];
      i = x[std::size_t(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return i;
  }

  double predict(std::span<const double> x) const { return nodes[std::size_t(leaf_index(x))].value; }

  int depth() const {
    std::vector<int> d(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].feature < 0) continue;
      d[std::size_t(nodes[i].left)] = d[std::size_t(nodes[i].right)] = d[i] + 1;
      best = std::max(best, d[i] + 1);
    }
    return best;
  }
};

/// Row indices sorted by value, one ordering per feature (ties by index).
struct SortedColumns {
  std::vector<std::vector<std::uint32_t>> order;

  static SortedColumns of(const Matrix& X) {
    SortedColumns s;
    s.order.resize(X.cols());
    for (std::size_t f = 0; f < X.cols(); ++f) {
      auto& o = s.order[f];
      o.resize(X.rows());
      std::iota(o.begin(), o.end(), 0u);
      std::stable_sort(o.begin(), o.end(), [&](std::uint32_t a, std::uint32_t b) { return X(a, f) < X(b, f); });
    }
    return s;
  }
};

namespace detail {

// Values closer than this are not separated by a split.
inline constexpr double kFeatureResolution = 1e-7;

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& X, const SortedColumns& sorted, std::span<const double> target,
              std::span<const double> weight, TreeTask task, const TreeParams& params)
      : X_(X), target_(target), weight_(weight), task_(task), params_(params) {
    cols_.resize(X.cols());
    for (std::size_t f = 0; f < X.cols(); ++f) {
      cols_[f].reserve(X.rows());
      for (std::uint32_t i : sorted.order[f])
        if (weight[i] > 0.0) cols_[f].push_back(i);
    }
    goes_left_.assign(X.rows(), 0);
    buffer_.resize(cols_.empty() ? 0 : cols_[0].size());
  }

  DecisionTree build() {
    if (cols_.empty() || cols_[0].empty()) throw std::invalid_argument("tree: no samples with positive weight");
    grow(0, cols_[0].size(), 0);
    return std::move(tree_);
  }

 private:
  struct Stats {
    double w = 0, wt = 0, wtt = 0;
    std::size_t n = 0, n_pos = 0;
    void add(double wi, double ti) {
      w += wi;
      wt += wi * ti;
      wtt += wi * ti * ti;
      ++n;
      if (ti > 0.5) ++n_pos;
    }
  };

  // Larger is better; parent-independent part of the impurity decrease.
  double proxy(double wl, double sl, double wr, double sr) const {
    if (task_ == TreeTask::classification)
      return (sl * sl + (wl - sl) * (wl - sl)) / wl + (sr * sr + (wr - sr) * (wr - sr)) / wr;
    return sl * sl / wl + sr * sr / wr;
  }

  int grow(std::size_t lo, std::size_t hi, int depth) {
    Stats st;
    for (std::size_t k = lo; k < hi; ++k) {
      const auto i = cols_[0][k];
      st.add(weight_[i], target_[i]);
    }
    const int id = int(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes.back().value = st.wt / st.w;
    tree_.nodes.back().weight = st.w;

    bool leaf = st.n < params_.min_samples_split || (params_.max_depth > 0 && depth >= params_.max_depth) ||
                st.n < 2 * params_.min_samples_leaf;
    if (task_ == TreeTask::classification) {
      leaf = leaf || st.n_pos == 0 || st.n_pos == st.n;
    } else {
      const double mean = st.wt / st.w;
      leaf = leaf || st.wtt / st.w - mean * mean <= 1e-14 * std::max(1.0, mean * mean);
    }
    if (leaf) return id;

    int best_f = -1;
    std::size_t best_pos = 0;
    double best_proxy = -std::numeric_limits<double>::infinity();
    double best_thr = 0.0;
    for (std::size_t f = 0; f < cols_.size(); ++f) {
      const auto& col = cols_[f];
      double wl = 0, sl = 0;
      for (std::size_t k = lo; k + 1 < hi; ++k) {
        const auto i = col[k];
        wl += weight_[i];
        sl += weight_[i] * target_[i];
        const std::size_t n_left = k + 1 - lo;
        if (n_left < params_.min_samples_leaf) continue;
        if (hi - lo - n_left < params_.min_samples_leaf) break;
        const double xa = X_(i, f), xb = X_(col[k + 1], f);
        if (xb <= xa + kFeatureResolution) continue;
        const double p = proxy(wl, sl, st.w - wl, st.wt - sl);
        if (p > best_proxy) {
          best_proxy = p;
          best_f = int(f);
          best_pos = k + 1;
          double thr = xa / 2.0 + xb / 2.0;
          if (!(thr < xb)) thr = xa;
          best_thr = thr;
        }
      }
    }
    if (best_f < 0) return id;

    // Partition every feature's slice stably into left | right.
    const auto& split_col = cols_[std::size_t(best_f)];
    for (std::size_t k = lo; k < hi; ++k) goes_left_[split_col[k]] = k < best_pos;
    const std::size_t mid = best_pos;
    for (auto& col : cols_) {
      std::size_t l = lo, r = 0;
      for (std::size_t k = lo; k < hi; ++k) {
        const auto i = col[k];
        if (goes_left_[i]) {
          col[l++] = i;
        } else {
          buffer_[r++] = i;
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + long(r), col.begin() + long(l));
    }

    const int left = grow(lo, mid, depth + 1);
    const int right = grow(mid, hi, depth + 1);
    auto& node = tree_.nodes[std::size_t(id)];
    node.feature = best_f;
    node.threshold = best_thr;
    node.left = left;
    node.right = right;
    return id;
  }

  const Matrix& X_;
  std::span<const double> target_;
  std::span<const double> weight_;
  TreeTask task_;
  TreeParams params_;
  std::vector<std::vector<std::uint32_t>> cols_;
  std::vector<char> goes_left_;
  std::vector<std::uint32_t> buffer_;
  DecisionTree tree_;
};

}  // namespace detail

/// Grows a CART tree on rows with positive `weight`. `sorted` must be
/// SortedColumns::of(X).
inline DecisionTree grow_tree(const Matrix& X, const SortedColumns& sorted, std::span<const double> target,
                              std::span<const double> weight, TreeTask task, const TreeParams& params = {}) {
  if (target.size() != X.rows() || weight.size() != X.rows()) throw std::invalid_argument("tree: length mismatch");
  return detail::TreeBuilder(X, sorted, target, weight, task, params).build();
}

}  // namespace straddle
