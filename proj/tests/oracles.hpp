#pragma once

// Direct-from-definition reference implementations used to cross-check the
// library. Deliberately naive: pairwise counting, per-threshold recounting,
// full enumeration.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <vector>

#include "straddle/metrics.hpp"
#include "straddle/random.hpp"

namespace oracle {

struct Classification {
  std::optional<double> accuracy, balanced_accuracy, precision, recall, f1, brier, log_loss, roc_auc, ap, prc_auc;
};

inline Classification classification(std::span<const int> y, std::span<const int> d, std::span<const double> p) {
  Classification o;
  const std::size_t n = y.size();
  if (n == 0) return o;
  int tp = 0, fp = 0, tn = 0, fn = 0;
  double brier = 0, ll = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (y[i] == 1 && d[i] == 1) ++tp;
    if (y[i] == 0 && d[i] == 1) ++fp;
    if (y[i] == 0 && d[i] == 0) ++tn;
    if (y[i] == 1 && d[i] == 0) ++fn;
    brier += (p[i] - y[i]) * (p[i] - y[i]);
    const double c = std::min(std::max(p[i], 1e-15), 1.0 - 1e-15);
    ll += y[i] == 1 ? -std::log(c) : -std::log(1.0 - c);
  }
  o.accuracy = double(tp + tn) / double(n);
  o.brier = brier / double(n);
  o.log_loss = ll / double(n);
  if (tp + fp > 0) o.precision = double(tp) / double(tp + fp);
  if (tp + fn > 0) o.recall = double(tp) / double(tp + fn);
  if (tp + fn > 0 && tn + fp > 0)
    o.balanced_accuracy = 0.5 * (double(tp) / double(tp + fn) + double(tn) / double(tn + fp));
  if (2 * tp + fp + fn > 0) o.f1 = 2.0 * tp / double(2 * tp + fp + fn);

  const int npos = tp + fn, nneg = tn + fp;
  if (npos > 0 && nneg > 0) {
    double wins = 0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        if (y[i] == 1 && y[j] == 0) wins += p[i] > p[j] ? 1.0 : (p[i] == p[j] ? 0.5 : 0.0);
    o.roc_auc = wins / (double(npos) * double(nneg));
  }
  if (npos > 0) {
    // Distinct thresholds, highest first; predict positive when p >= s.
    std::set<double, std::greater<double>> thresholds(p.begin(), p.end());
    double ap = 0, prev_r = 0, area = 0, prev_p = -1;
    bool first = true;
    for (double s : thresholds) {
      int ctp = 0, cpred = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (p[i] >= s) {
          ++cpred;
          ctp += y[i];
        }
      const double prec = double(ctp) / double(cpred);
      const double rec = double(ctp) / double(npos);
      ap += (rec - prev_r) * prec;
      if (first) {
        prev_p = prec;  // curve starts at (0, first precision)
        first = false;
      }
      area += (rec - prev_r) * (prec + prev_p) / 2.0;
      prev_r = rec;
      prev_p = prec;
    }
    o.ap = ap;
    o.prc_auc = area;
  }
  return o;
}

struct Profit {
  std::optional<double> avg, tot, avg_trading, std_trading, downw_std, avg_trades;
};

inline std::optional<double> population_std(const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double m = 0;
  for (double x : xs) m += x;
  m /= double(xs.size());
  double s = 0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / double(xs.size()));
}

inline Profit profit(std::span<const int> d, std::span<const double> pr) {
  Profit o;
  double tot = 0;
  std::vector<double> traded, losses;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] != 1) continue;
    tot += pr[i];
    traded.push_back(pr[i]);
    if (pr[i] < 0) losses.push_back(pr[i]);
  }
  o.tot = tot;
  if (!d.empty()) {
    o.avg = tot / double(d.size());
    o.avg_trades = double(traded.size()) / double(d.size());
  }
  if (!traded.empty()) {
    double s = 0;
    for (double x : traded) s += x;
    o.avg_trading = s / double(traded.size());
  }
  o.std_trading = population_std(traded);
  o.downw_std = population_std(losses);
  return o;
}

/// One random metric instance with ties in the scores.
struct Instance {
  std::vector<int> y, d;
  std::vector<double> p, profit;
};

inline Instance random_instance(straddle::Rng& rng, std::size_t max_n = 64) {
  Instance in;
  const std::size_t n = 1 + rng.index(max_n);
  const bool coarse = rng.uniform() < 0.5;
  const double threshold = 0.1 * double(rng.index(10));
  for (std::size_t i = 0; i < n; ++i) {
    const double p = coarse ? 0.1 * double(rng.index(11)) : rng.uniform();
    in.p.push_back(p);
    in.y.push_back(rng.uniform() < 0.5 + 0.3 * (p - 0.5) ? 1 : 0);
    in.d.push_back(rng.uniform() < 0.15 ? int(rng.index(2)) : (p > threshold ? 1 : 0));
    in.profit.push_back(std::round((rng.uniform() * 80.0 - 40.0) * 100.0) / 100.0);
  }
  return in;
}

inline bool close(const std::optional<double>& a, const std::optional<double>& b, double tol) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::abs(*a - *b) <= tol;
}

/// Every unweighted classification and profit metric of the library agrees
/// with the oracle on `in`.
inline bool metrics_agree(const Instance& in, double tol) {
  using straddle::Metric;
  const auto row = straddle::compute_metric_row(in.y, in.d, in.p, in.profit);
  const auto c = classification(in.y, in.d, in.p);
  const auto pr = profit(in.d, in.profit);
  return close(row[Metric::accuracy], c.accuracy, tol) &&
         close(row[Metric::balanced_accuracy], c.balanced_accuracy, tol) &&
         close(row[Metric::average_precision], c.ap, tol) && close(row[Metric::brier_score], c.brier, tol) &&
         close(row[Metric::f1], c.f1, tol) && close(row[Metric::log_loss], c.log_loss, tol) &&
         close(row[Metric::precision], c.precision, tol) && close(row[Metric::recall], c.recall, tol) &&
         close(row[Metric::roc_auc], c.roc_auc, tol) && close(row[Metric::prc_auc], c.prc_auc, tol) &&
         close(row[Metric::avg_profit], pr.avg, tol) && close(row[Metric::tot_profit], pr.tot, tol) &&
         close(row[Metric::avg_trading_profit], pr.avg_trading, tol) &&
         close(row[Metric::std_trading_profit], pr.std_trading, tol) &&
         close(row[Metric::downw_std_trading_profit], pr.downw_std, tol) &&
         close(row[Metric::avg_trades], pr.avg_trades, tol);
}

// ------------------------------------------------------------ wilcoxon

/// Two-sided p-value by enumerating all 2^n sign assignments of the
/// mid-ranked |differences| (zeros dropped).
inline double wilcoxon_enumerated(std::span<const double> a, std::span<const double> b) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  const std::size_t n = d.size();
  if (n == 0) return 1.0;
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++less;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    rank[i] = less + (equal + 1.0) / 2.0;
  }
  double observed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) observed += rank[i];
  double le = 0, ge = 0;
  const std::uint64_t total = std::uint64_t(1) << n;
  for (std::uint64_t mask = 0; mask < total; ++mask) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1) w += rank[i];
    if (w <= observed + 1e-9) ++le;
    if (w >= observed - 1e-9) ++ge;
  }
  return std::min(1.0, 2.0 * std::min(le, ge) / double(total));
}

/// Monte Carlo sign-flip test on W+ with `draws` random assignments.
inline double wilcoxon_permutation(std::span<const double> a, std::span<const double> b, int draws,
                                   std::uint64_t seed) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) d.push_back(a[i] - b[i]);
  const std::size_t n = d.size();
  std::vector<double> rank(n);
  for (std::size_t i = 0; i < n; ++i) {
    double less = 0, equal = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (std::abs(d[j]) < std::abs(d[i])) ++less;
      if (std::abs(d[j]) == std::abs(d[i])) ++equal;
    }
    rank[i] = less + (equal + 1.0) / 2.0;
  }
  const double centre = double(n) * double(n + 1) / 4.0;
  double observed = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (d[i] > 0) observed += rank[i];
  const double dev = std::abs(observed - centre);
  straddle::Rng rng(seed);
  int extreme = 0;
  for (int k = 0; k < draws; ++k) {
    double w = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (rng.next() >> 63) w += rank[i];
    if (std::abs(w - centre) >= dev - 1e-9) ++extreme;
  }
  return double(extreme) / double(draws);
}

// ------------------------------------------------------------ threshold

/// Best grid threshold by exhaustive evaluation; ties to the smallest.
inline double best_threshold(std::span<const double> probs, std::span<const double> profits) {
  double best_t = 0.0, best_v = -1e300;
  for (int k = 0; k < 10; ++k) {
    const double t = k / 10.0;
    double s = 0;
    for (std::size_t i = 0; i < probs.size(); ++i)
      if (probs[i] > t) s += profits[i];
    const double v = probs.empty() ? 0.0 : s / double(probs.size());
    if (v > best_v) {
      best_v = v;
      best_t = t;
    }
  }
  return best_t;
}

}  // namespace oracle
