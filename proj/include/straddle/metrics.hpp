#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace straddle {

/// Every reported metric, in the order of the published metric tables
/// (prc_auc variants, which those tables omit, sit after their block).
enum class Metric : std::size_t {
  accuracy,
  balanced_accuracy,
  average_precision,
  brier_score,
  f1,
  log_loss,
  precision,
  recall,
  roc_auc,
  prc_auc,
  accuracy_weighted,
  balanced_accuracy_weighted,
  average_precision_weighted,
  brier_score_weighted,
  f1_weighted,
  log_loss_weighted,
  precision_weighted,
  recall_weighted,
  roc_auc_weighted,
  prc_auc_weighted,
  avg_profit,
  tot_profit,
  avg_trading_profit,
  std_trading_profit,
  downw_std_trading_profit,
  avg_trades,
  count_
};

inline constexpr std::size_t kMetricCount = std::size_t(Metric::count_);

inline constexpr std::array<std::string_view, kMetricCount> kMetricNames = {
    "accuracy",
    "balanced_accuracy",
    "average_precision",
    "brier_score",
    "f1",
    "log_loss",
    "precision",
    "recall",
    "roc_auc",
    "prc_auc",
    "accuracy_weighted",
    "balanced_accuracy_weighted",
    "average_precision_weighted",
    "brier_score_weighted",
    "f1_weighted",
    "log_loss_weighted",
    "precision_weighted",
    "recall_weighted",
    "roc_auc_weighted",
    "prc_auc_weighted",
    "avg_profit",
    "tot_profit",
    "avg_trading_profit",
    "std_trading_profit",
    "downw_std_trading_profit",
    "avg_trades",
};

inline std::string_view metric_name(Metric m) { return kMetricNames[std::size_t(m)]; }

inline std::optional<Metric> parse_metric(std::string_view name) {
  for (std::size_t i = 0; i < kMetricCount; ++i)
    if (kMetricNames[i] == name) return Metric(i);
  return std::nullopt;
}

/// Rows of the published metric tables, top to bottom.
inline constexpr std::array<Metric, 24> kTableRows = {
    Metric::accuracy,
    Metric::balanced_accuracy,
    Metric::average_precision,
    Metric::brier_score,
    Metric::f1,
    Metric::log_loss,
    Metric::precision,
    Metric::recall,
    Metric::roc_auc,
    Metric::accuracy_weighted,
    Metric::balanced_accuracy_weighted,
    Metric::average_precision_weighted,
    Metric::brier_score_weighted,
    Metric::f1_weighted,
    Metric::log_loss_weighted,
    Metric::precision_weighted,
    Metric::recall_weighted,
    Metric::roc_auc_weighted,
    Metric::avg_profit,
    Metric::tot_profit,
    Metric::avg_trading_profit,
    Metric::std_trading_profit,
    Metric::downw_std_trading_profit,
    Metric::avg_trades,
};

struct CurvePoint {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const CurvePoint&, const CurvePoint&) = default;
};

/// ROC points are (fpr, tpr); PRC points are (recall, precision).
struct Curves {
  std::vector<CurvePoint> roc;
  std::vector<CurvePoint> prc;
};

/// Metric values for one prediction set. An empty optional marks a metric
/// that is undefined for this input (e.g. roc_auc with one class present).
struct MetricRow {
  std::array<std::optional<double>, kMetricCount> values{};
  Curves curves;

  std::optional<double>& operator[](Metric m) { return values[std::size_t(m)]; }
  const std::optional<double>& operator[](Metric m) const { return values[std::size_t(m)]; }
};

inline constexpr double kLogLossEps = 1e-15;

/// Classification metrics with the same definition for plain and weighted use.
struct ClassificationMetrics {
  std::optional<double> accuracy, balanced_accuracy, average_precision, brier_score, f1, log_loss, precision,
      recall, roc_auc, prc_auc;
  Curves curves;
};

namespace detail {

inline double trapezoid(std::span<const CurvePoint> pts) {
  double area = 0.0;
  for (std::size_t i = 1; i < pts.size(); ++i) area += (pts[i].x - pts[i - 1].x) * (pts[i].y + pts[i - 1].y) / 2.0;
  return area;
}

inline std::optional<double> ratio(double num, double den) {
  if (den == 0.0) return std::nullopt;
  return num / den;
}

}  // namespace detail

/// `weights` may be empty (all ones). Labels and decisions are 0/1;
/// probabilities are the model's P(label = 1).
inline ClassificationMetrics classification_metrics(std::span<const int> y, std::span<const int> decisions,
                                                    std::span<const double> probs,
                                                    std::span<const double> weights = {}) {
  const std::size_t n = y.size();
  if (decisions.size() != n || probs.size() != n || (!weights.empty() && weights.size() != n))
    throw std::invalid_argument("classification_metrics: length mismatch");
  auto w = [&](std::size_t i) { return weights.empty() ? 1.0 : weights[i]; };

  double pos = 0, neg = 0, tp = 0, fp = 0, total = 0, brier = 0, logloss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w(i);
    total += wi;
    if (y[i] == 1) {
      pos += wi;
      if (decisions[i] == 1) tp += wi;
    } else {
      neg += wi;
      if (decisions[i] == 1) fp += wi;
    }
    const double diff = probs[i] - y[i];
    brier += wi * diff * diff;
    const double p = std::clamp(probs[i], kLogLossEps, 1.0 - kLogLossEps);
    logloss += wi * -(y[i] == 1 ? std::log(p) : std::log(1.0 - p));
  }
  const double fn = pos - tp;
  const double tn = neg - fp;

  ClassificationMetrics m;
  m.accuracy = detail::ratio(tp + tn, total);
  m.recall = detail::ratio(tp, pos);
  m.precision = detail::ratio(tp, tp + fp);
  if (pos != 0.0 && neg != 0.0) m.balanced_accuracy = (tp / pos + tn / neg) / 2.0;
  m.f1 = detail::ratio(2.0 * tp, 2.0 * tp + fp + fn);
  m.brier_score = detail::ratio(brier, total);
  m.log_loss = detail::ratio(logloss, total);

  // Threshold sweep over distinct scores, highest first.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });

  std::vector<CurvePoint> roc{{0.0, 0.0}};
  std::vector<CurvePoint> prc;
  double ctp = 0, cfp = 0, ap = 0, prev_recall = 0;
  for (std::size_t k = 0; k < n;) {
    const double score = probs[order[k]];
    for (; k < n && probs[order[k]] == score; ++k) {
      const std::size_t i = order[k];
      (y[i] == 1 ? ctp : cfp) += w(i);
    }
    if (pos != 0.0 && neg != 0.0) roc.push_back({cfp / neg, ctp / pos});
    if (pos != 0.0) {
      const double precision = (ctp + cfp) != 0.0 ? ctp / (ctp + cfp) : 1.0;
      const double recall = ctp / pos;
      if (prc.empty()) prc.push_back({0.0, precision});
      prc.push_back({recall, precision});
      ap += (recall - prev_recall) * precision;
      prev_recall = recall;
    }
  }
  if (pos != 0.0 && neg != 0.0) {
    m.roc_auc = detail::trapezoid(roc);
    m.curves.roc = std::move(roc);
  }
  if (pos != 0.0 && n > 0) {
    m.average_precision = ap;
    m.prc_auc = detail::trapezoid(prc);
    m.curves.prc = std::move(prc);
  }
  return m;
}

struct ProfitMetrics {
  std::optional<double> avg_profit, tot_profit, avg_trading_profit, std_trading_profit, downw_std_trading_profit,
      avg_trades;
};

namespace detail {

inline std::optional<double> mean(std::span<const double> xs) {
  if (xs.empty()) return std::nullopt;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / double(xs.size());
}

/// Population standard deviation.
inline std::optional<double> pstdev(std::span<const double> xs) {
  const auto mu = mean(xs);
  if (!mu) return std::nullopt;
  double ss = 0.0;
  for (double x : xs) ss += (x - *mu) * (x - *mu);
  return std::sqrt(ss / double(xs.size()));
}

}  // namespace detail

inline ProfitMetrics profit_metrics(std::span<const int> decisions, std::span<const double> profits) {
  if (decisions.size() != profits.size()) throw std::invalid_argument("profit_metrics: length mismatch");
  const std::size_t n = profits.size();
  std::vector<double> traded, traded_losses;
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (decisions[i] == 0) continue;
    total += profits[i];
    traded.push_back(profits[i]);
    if (profits[i] < 0.0) traded_losses.push_back(profits[i]);
  }
  ProfitMetrics m;
  m.tot_profit = total;
  if (n > 0) {
    m.avg_profit = total / double(n);
    m.avg_trades = double(traded.size()) / double(n);
  }
  m.avg_trading_profit = detail::mean(traded);
  m.std_trading_profit = detail::pstdev(traded);
  m.downw_std_trading_profit = detail::pstdev(traded_losses);
  return m;
}

enum class WeightMode { absolute, signed_profit };

inline std::vector<double> weight_vector(std::span<const double> profits, WeightMode mode = WeightMode::absolute) {
  std::vector<double> w(profits.begin(), profits.end());
  if (mode == WeightMode::absolute)
    for (double& x : w) x = std::abs(x);
  return w;
}

/// Full metric row: plain classification, profit-weighted classification
/// and profit statistics. Curves are the unweighted ones.
inline MetricRow compute_metric_row(std::span<const int> y, std::span<const int> decisions,
                                    std::span<const double> probs, std::span<const double> profits,
                                    WeightMode mode = WeightMode::absolute) {
  const auto plain = classification_metrics(y, decisions, probs);
  const auto weights = weight_vector(profits, mode);
  const auto weighted = classification_metrics(y, decisions, probs, weights);
  const auto profit = profit_metrics(decisions, profits);

  MetricRow row;
  auto put = [&row](Metric base, const ClassificationMetrics& c) {
    const std::size_t b = std::size_t(base);
    row.values[b + 0] = c.accuracy;
    row.values[b + 1] = c.balanced_accuracy;
    row.values[b + 2] = c.average_precision;
    row.values[b + 3] = c.brier_score;
    row.values[b + 4] = c.f1;
    row.values[b + 5] = c.log_loss;
    row.values[b + 6] = c.precision;
    row.values[b + 7] = c.recall;
    row.values[b + 8] = c.roc_auc;
    row.values[b + 9] = c.prc_auc;
  };
  put(Metric::accuracy, plain);
  put(Metric::accuracy_weighted, weighted);
  row[Metric::avg_profit] = profit.avg_profit;
  row[Metric::tot_profit] = profit.tot_profit;
  row[Metric::avg_trading_profit] = profit.avg_trading_profit;
  row[Metric::std_trading_profit] = profit.std_trading_profit;
  row[Metric::downw_std_trading_profit] = profit.downw_std_trading_profit;
  row[Metric::avg_trades] = profit.avg_trades;
  row.curves = plain.curves;
  return row;
}

}  // namespace straddle
