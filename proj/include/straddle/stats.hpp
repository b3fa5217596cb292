#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "straddle/date.hpp"
#include "straddle/metrics.hpp"
#include "straddle/prequential.hpp"

namespace straddle {

// ------------------------------------------------------------- wilcoxon

enum class WilcoxonMethod { automatic, exact, normal };

/// Largest effective sample size handled by the exact distribution in
/// automatic mode.
inline constexpr std::size_t kWilcoxonExactMax = 25;

struct WilcoxonResult {
  double p_value = 1.0;
  double statistic = 0.0;   // W+, sum of ranks of positive differences
  std::size_t n = 0;        // pairs left after dropping zero differences
  bool degenerate = false;  // every difference was zero
  bool exact = false;
  bool small_sample = false;  // fewer than 5 non-zero differences
};

/// Mid-ranks of |d|, 1-based.
inline std::vector<double> signed_rank_ranks(std::span<const double> abs_diffs) {
  const std::size_t n = abs_diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return abs_diffs[a] < abs_diffs[b]; });
  std::vector<double> ranks(n);
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && abs_diffs[order[j + 1]] == abs_diffs[order[i]]) ++j;
    const double mid = (double(i + 1) + double(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
    i = j + 1;
  }
  return ranks;
}

/// Two-sided Wilcoxon signed-rank test on paired samples. Zero differences
/// are dropped and ties get mid-ranks. The exact mode is the null
/// distribution of W+ given the observed ranks (all 2^n sign assignments);
/// the normal mode uses tie and continuity corrections.
inline WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                           WilcoxonMethod method = WilcoxonMethod::automatic) {
  if (a.size() != b.size()) throw std::invalid_argument("wilcoxon: samples must be paired");
  std::vector<double> d, absd;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double diff = a[i] - b[i];
    if (diff != 0.0) {
      d.push_back(diff);
      absd.push_back(std::abs(diff));
    }
  }
  WilcoxonResult r;
  r.n = d.size();
  r.small_sample = r.n < 5;
  if (r.n == 0) {
    r.degenerate = true;
    r.p_value = 1.0;
    return r;
  }
  const auto ranks = signed_rank_ranks(absd);
  for (std::size_t i = 0; i < r.n; ++i)
    if (d[i] > 0) r.statistic += ranks[i];

  const bool use_exact = method == WilcoxonMethod::exact ||
                         (method == WilcoxonMethod::automatic && r.n <= kWilcoxonExactMax);
  if (use_exact) {
    r.exact = true;
    // Doubled mid-ranks are integers.
    std::vector<std::size_t> r2(r.n);
    std::size_t total = 0;
    for (std::size_t i = 0; i < r.n; ++i) total += r2[i] = std::size_t(std::llround(2.0 * ranks[i]));
    std::vector<double> count(total + 1, 0.0);
    count[0] = 1.0;
    std::size_t reach = 0;
    for (std::size_t v : r2) {
      for (std::size_t s = reach + 1; s-- > 0;) count[s + v] += count[s];
      reach += v;
    }
    const auto w2 = std::size_t(std::llround(2.0 * r.statistic));
    double lower = 0.0, upper = 0.0;
    for (std::size_t s = 0; s <= total; ++s) {
      if (s <= w2) lower += count[s];
      if (s >= w2) upper += count[s];
    }
    const double all = std::ldexp(1.0, int(r.n));
    r.p_value = std::min(1.0, 2.0 * std::min(lower, upper) / all);
    return r;
  }

  const double n = double(r.n);
  const double mean = n * (n + 1.0) / 4.0;
  double tie_term = 0.0;
  {
    std::vector<double> sorted(ranks);
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size();) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      const double t = double(j - i);
      tie_term += t * t * t - t;
      i = j;
    }
  }
  const double var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - tie_term / 48.0;
  const double dev = r.statistic - mean;
  const double corrected = std::max(std::abs(dev) - 0.5, 0.0);
  const double z = var > 0 ? corrected / std::sqrt(var) : 0.0;
  r.p_value = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return r;
}

/// min(1, m * p) for every p. `m` must cover the family.
inline std::vector<double> bonferroni(std::span<const double> pvals, std::size_t m) {
  if (m < pvals.size()) throw std::invalid_argument("bonferroni: m smaller than the number of p-values");
  std::vector<double> out(pvals.size());
  for (std::size_t i = 0; i < pvals.size(); ++i) out[i] = std::min(1.0, double(m) * pvals[i]);
  return out;
}

// ------------------------------------------------------------ aggregate

/// Per-metric mean over non-missing values, with the number of values used.
struct MeanRow {
  std::array<std::optional<double>, kMetricCount> mean{};
  std::array<std::size_t, kMetricCount> count{};
  std::size_t windows = 0;
};

struct PairedTest {
  double p_value = 1.0;
  double p_adjusted = 1.0;
  std::size_t n = 0;
  bool degenerate = false;
  bool small_sample = false;
};

/// One test window of the split sequence, by iteration index.
struct WindowSpan {
  std::size_t iteration = 0;
  Window test;
};

struct AggregateReport {
  Date cutoff;
  std::vector<std::string> models;  // first-appearance order, baseline included
  std::vector<WindowSpan> windows;  // time order
  std::map<std::string, MeanRow> mean_all;
  std::map<std::string, MeanRow> mean_since;
  bool since_empty = true;
  /// per_window[model][metric][k]: repetition-averaged value on windows[k].
  std::map<std::string, std::vector<std::array<std::optional<double>, kMetricCount>>> per_window;
  /// Model vs baseline, per metric; partition "all" or "since".
  std::map<std::string, std::map<std::string, std::map<Metric, PairedTest>>> pvalues;
  std::map<std::string, std::vector<double>> cumulative_profit;
  std::vector<WindowResult> results;  // input, kept for plot data
};

inline bool window_since(const Window& w, Date cutoff) { return w.after.plus_days(1) >= cutoff; }

namespace detail {

inline void accumulate_mean(MeanRow& row, const MetricRow& m) {
  ++row.windows;
  for (std::size_t k = 0; k < kMetricCount; ++k) {
    if (!m.values[k]) continue;
    row.mean[k] = row.mean[k].value_or(0.0) + *m.values[k];
    ++row.count[k];
  }
}

inline void finish_mean(MeanRow& row) {
  for (std::size_t k = 0; k < kMetricCount; ++k)
    if (row.count[k] > 0) *row.mean[k] /= double(row.count[k]);
}

}  // namespace detail

/// Means per model over all test windows and over windows starting on or
/// after `cutoff`; Wilcoxon tests of every model against the baseline on
/// repetition-averaged per-window values (Bonferroni over the number of
/// models compared); cumulative per-window total profit.
inline AggregateReport aggregate(std::span<const WindowResult> results, Date cutoff) {
  if (results.empty()) throw std::invalid_argument("aggregate: no results");
  AggregateReport rep;
  rep.cutoff = cutoff;
  rep.results.assign(results.begin(), results.end());

  std::map<std::size_t, Window> spans;
  for (const auto& w : results) {
    if (std::find(rep.models.begin(), rep.models.end(), w.model_id) == rep.models.end())
      rep.models.push_back(w.model_id);
    spans[w.iteration] = w.test;
  }
  std::map<std::size_t, std::size_t> slot;
  for (const auto& [iter, win] : spans) {
    slot[iter] = rep.windows.size();
    rep.windows.push_back({iter, win});
  }
  const std::size_t n_win = rep.windows.size();

  for (const auto& w : results) {
    detail::accumulate_mean(rep.mean_all[w.model_id], w.metrics);
    if (window_since(w.test, cutoff)) {
      detail::accumulate_mean(rep.mean_since[w.model_id], w.metrics);
      rep.since_empty = false;
    }
  }
  for (auto& [id, row] : rep.mean_all) detail::finish_mean(row);
  for (auto& [id, row] : rep.mean_since) detail::finish_mean(row);

  // Repetition-averaged per-window values.
  for (const auto& id : rep.models) {
    std::vector<MeanRow> acc(n_win);
    for (const auto& w : results)
      if (w.model_id == id) detail::accumulate_mean(acc[slot[w.iteration]], w.metrics);
    auto& series = rep.per_window[id];
    series.resize(n_win);
    for (std::size_t k = 0; k < n_win; ++k) {
      detail::finish_mean(acc[k]);
      series[k] = acc[k].mean;
    }
    auto& cum = rep.cumulative_profit[id];
    double running = 0.0;
    for (std::size_t k = 0; k < n_win; ++k) {
      running += series[k][std::size_t(Metric::tot_profit)].value_or(0.0);
      cum.push_back(running);
    }
  }

  const std::string baseline(kBaselineId);
  if (rep.per_window.count(baseline)) {
    std::vector<std::string> compared;
    for (const auto& id : rep.models)
      if (id != baseline) compared.push_back(id);
    const auto& base = rep.per_window.at(baseline);
    for (const char* partition : {"all", "since"}) {
      const bool since = std::string(partition) == "since";
      for (std::size_t mi = 0; mi < kMetricCount; ++mi) {
        std::vector<double> raw;
        std::vector<PairedTest> tests;
        for (const auto& id : compared) {
          const auto& series = rep.per_window.at(id);
          std::vector<double> a, b;
          for (std::size_t k = 0; k < n_win; ++k) {
            if (since && !window_since(rep.windows[k].test, cutoff)) continue;
            if (series[k][mi] && base[k][mi]) {
              a.push_back(*series[k][mi]);
              b.push_back(*base[k][mi]);
            }
          }
          const auto w = wilcoxon_signed_rank(a, b);
          tests.push_back({w.p_value, w.p_value, w.n, w.degenerate, w.small_sample});
          raw.push_back(w.p_value);
        }
        const auto adjusted = bonferroni(raw, compared.size());
        for (std::size_t c = 0; c < compared.size(); ++c) {
          tests[c].p_adjusted = adjusted[c];
          rep.pvalues[partition][compared[c]][Metric(mi)] = tests[c];
        }
      }
    }
  }
  return rep;
}

}  // namespace straddle
