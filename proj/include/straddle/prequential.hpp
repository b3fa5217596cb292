#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "straddle/classifiers/classifier.hpp"
#include "straddle/date.hpp"
#include "straddle/error.hpp"
#include "straddle/features.hpp"
#include "straddle/metrics.hpp"

namespace straddle {

/// Half-open-on-the-left date interval (after, through].
struct Window {
  Date after;
  Date through;
  bool contains(Date d) const { return d > after && d <= through; }
  friend bool operator==(const Window&, const Window&) = default;
};

/// One walk-forward step: train on [train_start, t_i], validate on
/// (t_i, t_{i+1}], test on (t_{i+1}, t_{i+2}]. Boundaries are month ends.
struct PrequentialIteration {
  std::size_t index = 0;
  Date train_start;
  Date train_end;  // t_i, inclusive
  Window validation;
  Window test;
  int delta_months = 1;

  bool in_train(Date d) const { return d >= train_start && d <= train_end; }
};

struct SplitPlan {
  std::vector<PrequentialIteration> iterations;
  std::vector<std::string> warnings;
};

/// Walk-forward splits over the (ascending) sample dates. The first test
/// window starts at `test_start`; windows advance by `delta_months` until
/// the data runs out. Iterations with an empty train, validation or test
/// window are dropped with a warning.
inline SplitPlan make_splits(std::span<const Date> sample_dates, int delta_months, YearMonth test_start,
                             Date train_start) {
  if (delta_months < 1) throw ConfigError("split frequency must be at least one month");
  if (test_start.plus_months(-2 * delta_months) < YearMonth::of(train_start))
    throw ConfigError("test start " + test_start.iso() + " leaves no room for a training and validation window");
  if (sample_dates.empty()) throw DataError("no samples to split");

  auto count_in = [&](auto&& pred) {
    return std::size_t(std::count_if(sample_dates.begin(), sample_dates.end(), pred));
  };

  SplitPlan plan;
  const Date last = sample_dates.back();
  for (int k = 0;; ++k) {
    const YearMonth first_test = test_start.plus_months(k * delta_months);
    PrequentialIteration it;
    it.delta_months = delta_months;
    it.train_start = train_start;
    it.train_end = first_test.plus_months(-delta_months - 1).last_day();
    it.validation = {it.train_end, first_test.plus_months(-1).last_day()};
    it.test = {it.validation.through, first_test.plus_months(delta_months - 1).last_day()};
    if (!(it.test.after < last)) break;

    const auto n_train = count_in([&](Date d) { return it.in_train(d); });
    const auto n_val = count_in([&](Date d) { return it.validation.contains(d); });
    const auto n_test = count_in([&](Date d) { return it.test.contains(d); });
    if (n_train == 0 || n_val == 0 || n_test == 0) {
      plan.warnings.push_back("split with test window starting " + first_test.iso() + " dropped: " +
                              std::to_string(n_train) + " train, " + std::to_string(n_val) + " validation, " +
                              std::to_string(n_test) + " test samples");
      continue;
    }
    it.index = plan.iterations.size();
    plan.iterations.push_back(it);
  }
  if (plan.iterations.empty()) throw DataError("data does not cover a single complete prequential iteration");
  return plan;
}

// ------------------------------------------------------- thresholds

enum class ThresholdMode {
  all_samples,  // average over every validation sample (untraded count as 0)
  per_trade,    // average over traded samples only
};

struct ThresholdChoice {
  double threshold = 0.0;
  double achieved_validation_avg_profit = 0.0;
};

/// Candidate thresholds 0.0, 0.1, ..., 0.9.
inline constexpr std::array<double, 10> kThresholdGrid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

/// Validation average profit when trading every sample with prob > threshold.
inline double average_profit_at(std::span<const double> probs, std::span<const double> profits, double threshold,
                                 ThresholdMode mode) {
  double total = 0.0;
  std::size_t traded = 0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if (probs[i] > threshold) {
      total += profits[i];
      ++traded;
    }
  if (mode == ThresholdMode::all_samples) return probs.empty() ? 0.0 : total / double(probs.size());
  return traded == 0 ? 0.0 : total / double(traded);
}

/// Grid point with the highest validation average profit; ties go to the
/// smallest threshold.
inline ThresholdChoice optimize_threshold(std::span<const double> val_probs, std::span<const double> val_profits,
                                          ThresholdMode mode = ThresholdMode::all_samples) {
  if (val_probs.size() != val_profits.size()) throw std::invalid_argument("optimize_threshold: length mismatch");
  ThresholdChoice best{kThresholdGrid[0], average_profit_at(val_probs, val_profits, kThresholdGrid[0], mode)};
  for (std::size_t k = 1; k < kThresholdGrid.size(); ++k) {
    const double avg = average_profit_at(val_probs, val_profits, kThresholdGrid[k], mode);
    if (avg > best.achieved_validation_avg_profit) best = {kThresholdGrid[k], avg};
  }
  return best;
}

// ------------------------------------------------------- experiment

inline constexpr std::string_view kBaselineId = "All";

struct ModelEntry {
  std::string id;
  ClassifierSpec spec;  // seed is replaced per repetition
};

struct HarnessOptions {
  int delta_months = 1;
  YearMonth test_start{2014, 2};
  Date train_start{2011, 1, 1};
  int repetitions = 5;
  int epochs = 10;
  int evaluate_every = 1;
  std::uint64_t base_seed = 0;
  ThresholdMode threshold_mode = ThresholdMode::all_samples;
  WeightMode weight_mode = WeightMode::absolute;
  std::vector<ModelEntry> models;
  int threads = 0;  // 0: one per hardware thread
};

struct Prediction {
  std::size_t sample_id = 0;
  Date trade_date;
  double probability = 0.0;
  int decision = 0;
  int label = 0;
  double profit = 0.0;
};

struct WindowResult {
  std::size_t iteration = 0;
  std::string model_id;
  int repetition = 0;
  Window test;
  std::optional<double> threshold;  // empty for the baseline
  double validation_avg_profit = 0.0;
  /// Validation average profit at the optimized threshold after each
  /// evaluated epoch.
  std::vector<double> epoch_validation_avg_profit;
  std::vector<Prediction> predictions;
  MetricRow metrics;
};

struct ExperimentResult {
  std::vector<PrequentialIteration> splits;
  std::vector<WindowResult> windows;
  std::vector<std::string> warnings;
};

namespace detail {

struct Slice {
  Matrix X;
  std::vector<int> y;
  std::vector<double> profit;
  std::vector<const TradeSampleRecord*> records;
};

template <typename Pred>
Slice slice_samples(const SampleSet& set, Pred&& keep) {
  std::vector<const TradeSampleRecord*> rows;
  for (const auto& r : set.records)
    if (keep(r.trade_date)) rows.push_back(&r);
  Slice s;
  s.X = Matrix(rows.size(), set.feature_names.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::copy(rows[i]->features.values.begin(), rows[i]->features.values.end(), s.X.row(i).begin());
    s.y.push_back(rows[i]->label);
    s.profit.push_back(rows[i]->profit);
  }
  s.records = std::move(rows);
  return s;
}

inline WindowResult score_window(const PrequentialIteration& it, std::string id, int repetition,
                                 const Slice& test, std::span<const double> probs, std::optional<double> threshold,
                                 WeightMode weight_mode) {
  WindowResult w;
  w.iteration = it.index;
  w.model_id = std::move(id);
  w.repetition = repetition;
  w.test = it.test;
  w.threshold = threshold;
  const auto decisions = decide(probs, threshold.value_or(-1.0));
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto& r = *test.records[i];
    w.predictions.push_back({r.sample_id, r.trade_date, probs[i], decisions[i], r.label, r.profit});
  }
  w.metrics = compute_metric_row(test.y, decisions, probs, test.profit, weight_mode);
  return w;
}

}  // namespace detail

/// Fits every model on every split, picks its threshold on the validation
/// window and scores the test window. Adds the always-trade baseline
/// ("All", probability 1) once per split. Results are ordered by
/// (iteration, model in config order, repetition), baseline last.
inline ExperimentResult run_experiment(const HarnessOptions& opt, const SampleSet& samples) {
  ExperimentResult out;
  std::vector<Date> dates;
  for (const auto& r : samples.records) dates.push_back(r.trade_date);
  auto plan = make_splits(dates, opt.delta_months, opt.test_start, opt.train_start);
  out.splits = plan.iterations;
  out.warnings = plan.warnings;

  const std::size_t n_iter = out.splits.size();
  const std::size_t n_models = opt.models.size();
  const int reps = std::max(opt.repetitions, 1);
  // cells[iteration][model][repetition]
  std::vector<std::vector<std::vector<std::optional<WindowResult>>>> cells(
      n_iter, std::vector<std::vector<std::optional<WindowResult>>>(n_models, std::vector<std::optional<WindowResult>>(std::size_t(reps))));
  std::vector<WindowResult> baseline(n_iter);

  std::vector<detail::Slice> train(n_iter), val(n_iter), test(n_iter);
  for (std::size_t i = 0; i < n_iter; ++i) {
    const auto& it = out.splits[i];
    train[i] = detail::slice_samples(samples, [&](Date d) { return it.in_train(d); });
    val[i] = detail::slice_samples(samples, [&](Date d) { return it.validation.contains(d); });
    test[i] = detail::slice_samples(samples, [&](Date d) { return it.test.contains(d); });
    const std::vector<double> ones(test[i].y.size(), 1.0);
    baseline[i] = detail::score_window(it, std::string(kBaselineId), 0, test[i], ones, std::nullopt, opt.weight_mode);
  }

  // Each (model, repetition) chain is independent: it warm-starts only from
  // its own previous iteration.
  struct Job {
    std::size_t m;
    int r;
    std::vector<std::string> warnings;
  };
  std::vector<Job> jobs;
  for (std::size_t m = 0; m < n_models; ++m)
    for (int r = 0; r < reps; ++r)
      if (r == 0 || is_seed_dependent(opt.models[m].spec.kind)) jobs.push_back({m, r, {}});

  auto run_job = [&](Job& job) {
    const auto& entry = opt.models[job.m];
    const int r = job.r;
    ClassifierSpec spec = entry.spec;
    spec.seed = opt.base_seed + std::uint64_t(r);
    std::optional<TrainedModel> previous;
    for (std::size_t i = 0; i < n_iter; ++i) {
      const auto& it = out.splits[i];
      const auto& tr = train[i];
      const bool two_classes = std::count(tr.y.begin(), tr.y.end(), 1) > 0 &&
                               std::count(tr.y.begin(), tr.y.end(), 0) > 0;
      if (!two_classes || tr.y.size() < 2) {
        job.warnings.push_back("iteration " + std::to_string(i) + " model " + entry.id + " repetition " +
                               std::to_string(r) + ": single-class training window, skipped");
        continue;
      }
      std::vector<double> epoch_trace;
      FitOptions fo;
      fo.warm = previous ? &*previous : nullptr;
      fo.epochs = std::max(opt.epochs, 1);
      fo.on_epoch = [&](int e, const TrainedModel& partial) {
        if ((e + 1) % std::max(opt.evaluate_every, 1) != 0) return;
        const auto vp = predict_proba(partial, val[i].X);
        epoch_trace.push_back(optimize_threshold(vp, val[i].profit, opt.threshold_mode).achieved_validation_avg_profit);
      };
      TrainedModel model = fit(spec, tr.X, tr.y, fo);
      const auto val_probs = predict_proba(model, val[i].X);
      const auto choice = optimize_threshold(val_probs, val[i].profit, opt.threshold_mode);
      const auto test_probs = predict_proba(model, test[i].X);
      auto w = detail::score_window(it, entry.id, r, test[i], test_probs, choice.threshold, opt.weight_mode);
      w.validation_avg_profit = choice.achieved_validation_avg_profit;
      w.epoch_validation_avg_profit = std::move(epoch_trace);
      cells[i][job.m][std::size_t(r)] = std::move(w);
      previous = std::move(model);
    }
  };

  const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t n_threads = std::min<std::size_t>(opt.threads > 0 ? std::size_t(opt.threads) : hw, jobs.size());
  if (n_threads <= 1) {
    for (auto& job : jobs) run_job(job);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < n_threads; ++t) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < jobs.size();) {
          try {
            run_job(jobs[k]);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }
  for (auto& job : jobs) out.warnings.insert(out.warnings.end(), job.warnings.begin(), job.warnings.end());

  // Seed-independent kinds produce identical fits for every repetition.
  for (std::size_t m = 0; m < n_models; ++m) {
    if (is_seed_dependent(opt.models[m].spec.kind)) continue;
    for (int r = 1; r < reps; ++r)
      for (std::size_t i = 0; i < n_iter; ++i) {
        if (!cells[i][m][0]) continue;
        auto copy = *cells[i][m][0];
        copy.repetition = r;
        cells[i][m][std::size_t(r)] = std::move(copy);
      }
  }

  for (std::size_t i = 0; i < n_iter; ++i) {
    for (std::size_t m = 0; m < n_models; ++m)
      for (auto& c : cells[i][m])
        if (c) out.windows.push_back(std::move(*c));
    out.windows.push_back(std::move(baseline[i]));
  }
  return out;
}

}  // namespace straddle
