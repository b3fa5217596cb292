#include <gtest/gtest.h>

#include <set>

#include "oracles.hpp"
#include "straddle/prequential.hpp"
#include "straddle/random.hpp"
#include "straddle/results_io.hpp"
#include "support.hpp"

using namespace straddle;

namespace {

/// Weekday samples from `from` to `to` with one informative feature.
SampleSet toy_samples(Date from, Date to, std::uint64_t seed = 1) {
  Rng rng(seed);
  SampleSet s;
  s.feature_names = {Feature::vix0, Feature::strike};
  for (Date d = from; d <= to; d = d.plus_days(1)) {
    if (d.is_weekend()) continue;
    TradeSampleRecord r;
    r.sample_id = s.records.size();
    r.trade_date = d;
    const double signal = rng.normal();
    r.features = {s.feature_names, {signal, rng.normal()}};
    r.label = signal + 0.8 * rng.normal() > 0 ? 1 : 0;
    r.profit = r.label ? 5 + 10 * rng.uniform() : -(5 + 30 * rng.uniform());
    s.records.push_back(r);
  }
  return s;
}

std::vector<Date> dates_of(const SampleSet& s) {
  std::vector<Date> d;
  for (const auto& r : s.records) d.push_back(r.trade_date);
  return d;
}

HarnessOptions two_model_options() {
  HarnessOptions o;
  o.test_start = {2014, 2};
  o.train_start = Date(2013, 9, 1);
  o.repetitions = 5;
  o.epochs = 3;
  o.threads = 2;
  ClassifierSpec lr{ClassifierKind::logistic_regression, LogisticParams{}, 0};
  ClassifierSpec rf{ClassifierKind::random_forest, ForestParams{}, 0};
  set_estimator_count(rf, 11);
  o.models = {{"LR", lr}, {"RF", rf}};
  return o;
}

}  // namespace

TEST(MakeSplits, MonthlyExample) {
  const auto s = toy_samples(Date(2011, 11, 1), Date(2014, 4, 30));
  const auto plan = make_splits(dates_of(s), 1, {2014, 2}, Date(2011, 11, 1));
  ASSERT_EQ(plan.iterations.size(), 3u);
  const auto& it = plan.iterations[0];
  EXPECT_EQ(it.train_start, Date(2011, 11, 1));
  EXPECT_EQ(it.train_end, Date(2013, 12, 31));
  EXPECT_EQ(it.validation, (Window{Date(2013, 12, 31), Date(2014, 1, 31)}));
  EXPECT_EQ(it.test, (Window{Date(2014, 1, 31), Date(2014, 2, 28)}));
  EXPECT_EQ(plan.iterations[2].test.through, Date(2014, 4, 30));
}

TEST(MakeSplits, QuarterlyExample) {
  const auto s = toy_samples(Date(2011, 11, 1), Date(2014, 4, 30));
  const auto plan = make_splits(dates_of(s), 3, {2014, 2}, Date(2011, 11, 1));
  ASSERT_EQ(plan.iterations.size(), 1u);
  EXPECT_EQ(plan.iterations[0].test, (Window{Date(2014, 1, 31), Date(2014, 4, 30)}));
  EXPECT_EQ(plan.iterations[0].validation, (Window{Date(2013, 10, 31), Date(2014, 1, 31)}));
}

TEST(MakeSplits, DisjointConsecutiveAndGrowing) {
  const auto s = toy_samples(Date(2011, 11, 1), Date(2016, 8, 15));
  const auto dates = dates_of(s);
  for (int delta : {1, 2, 3}) {
    const auto plan = make_splits(dates, delta, {2013, 1}, Date(2011, 11, 1));
    ASSERT_GT(plan.iterations.size(), 2u);
    for (std::size_t i = 0; i < plan.iterations.size(); ++i) {
      const auto& it = plan.iterations[i];
      EXPECT_EQ(it.train_end, it.validation.after);
      EXPECT_EQ(it.validation.through, it.test.after);
      for (Date d : dates) {
        const int owners = int(it.in_train(d)) + int(it.validation.contains(d)) + int(it.test.contains(d));
        EXPECT_LE(owners, 1);
        if (it.test.contains(d)) { EXPECT_GT(d, it.train_end); }
      }
      if (i > 0) {
        const auto& prev = plan.iterations[i - 1];
        EXPECT_EQ(YearMonth::of(prev.train_end).plus_months(delta), YearMonth::of(it.train_end));
        EXPECT_EQ(it.train_end, prev.validation.through);
        EXPECT_EQ(it.validation, prev.test);
      }
    }
  }
}

TEST(MakeSplits, Errors) {
  const auto s = toy_samples(Date(2013, 1, 1), Date(2013, 6, 30));
  EXPECT_THROW(make_splits(dates_of(s), 1, {2013, 2}, Date(2013, 1, 1)), ConfigError);
  EXPECT_THROW(make_splits(dates_of(s), 0, {2013, 4}, Date(2013, 1, 1)), ConfigError);
  EXPECT_THROW(make_splits(dates_of(s), 1, {2014, 4}, Date(2013, 1, 1)), DataError);
}

TEST(MakeSplits, EmptyWindowDroppedWithWarning) {
  auto s = toy_samples(Date(2013, 1, 1), Date(2013, 8, 31));
  std::erase_if(s.records, [](const auto& r) { return r.trade_date.month() == 5; });
  const auto plan = make_splits(dates_of(s), 1, {2013, 4}, Date(2013, 1, 1));
  EXPECT_FALSE(plan.warnings.empty());
  for (const auto& it : plan.iterations) {
    EXPECT_NE(it.validation.through, Date(2013, 5, 31));
    EXPECT_NE(it.test.through, Date(2013, 5, 31));
  }
}

TEST(OptimizeThreshold, Examples) {
  const std::vector<double> p{0.2, 0.8}, pr{-10, 10};
  const auto c = optimize_threshold(p, pr);
  EXPECT_DOUBLE_EQ(c.threshold, 0.2);
  EXPECT_DOUBLE_EQ(c.achieved_validation_avg_profit, 5.0);

  EXPECT_EQ(optimize_threshold(std::vector<double>{0.1, 0.5, 0.9}, std::vector<double>{1, 2, 3}).threshold, 0.0);
  const auto neg = optimize_threshold(std::vector<double>{0.1, 0.5, 0.9}, std::vector<double>{-1, -2, -3});
  EXPECT_DOUBLE_EQ(neg.threshold, 0.9);
  EXPECT_EQ(neg.achieved_validation_avg_profit, 0.0);
}

TEST(OptimizeThreshold, MatchesExhaustiveGrid) {
  Rng rng(77);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t n = 1 + rng.index(40);
    std::vector<double> p, pr;
    for (std::size_t i = 0; i < n; ++i) {
      p.push_back(rng.uniform() < 0.3 ? 0.1 * double(rng.index(11)) : rng.uniform());
      pr.push_back(std::round(60 * rng.uniform() - 35));
    }
    const auto c = optimize_threshold(p, pr);
    EXPECT_EQ(c.threshold, oracle::best_threshold(p, pr));
    bool on_grid = false;
    for (double g : kThresholdGrid) on_grid |= g == c.threshold;
    EXPECT_TRUE(on_grid);
  }
}

TEST(OptimizeThreshold, PerTradeMode) {
  const std::vector<double> p{0.3, 0.95}, pr{1, 10};
  EXPECT_DOUBLE_EQ(optimize_threshold(p, pr, ThresholdMode::per_trade).threshold, 0.3);
  EXPECT_DOUBLE_EQ(optimize_threshold(p, pr, ThresholdMode::per_trade).achieved_validation_avg_profit, 10.0);
  EXPECT_DOUBLE_EQ(optimize_threshold(p, pr, ThresholdMode::all_samples).threshold, 0.0);
}

TEST(RunExperiment, CardinalityOrderAndBaseline) {
  const auto s = toy_samples(Date(2013, 9, 1), Date(2014, 4, 30));
  const auto res = run_experiment(two_model_options(), s);
  ASSERT_EQ(res.splits.size(), 3u);
  ASSERT_EQ(res.windows.size(), 2u * 3u * 5u + 3u);

  std::size_t k = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    for (const char* id : {"LR", "RF"})
      for (int r = 0; r < 5; ++r, ++k) {
        EXPECT_EQ(res.windows[k].iteration, i);
        EXPECT_EQ(res.windows[k].model_id, id);
        EXPECT_EQ(res.windows[k].repetition, r);
        ASSERT_TRUE(res.windows[k].threshold);
      }
    const auto& all = res.windows[k++];
    EXPECT_EQ(all.model_id, "All");
    EXPECT_FALSE(all.threshold);
    EXPECT_EQ(all.metrics[Metric::avg_trades].value(), 1.0);
    EXPECT_EQ(all.metrics[Metric::recall].value(), 1.0);
    double pos = 0;
    for (const auto& p : all.predictions) pos += p.label;
    EXPECT_DOUBLE_EQ(all.metrics[Metric::accuracy].value(), pos / double(all.predictions.size()));
    EXPECT_DOUBLE_EQ(all.metrics[Metric::balanced_accuracy].value(), 0.5);
  }
}

TEST(RunExperiment, PredictionsCoverExactlyTestWindow) {
  const auto s = toy_samples(Date(2013, 9, 1), Date(2014, 4, 30));
  const auto res = run_experiment(two_model_options(), s);
  for (const auto& w : res.windows) {
    std::set<std::size_t> expected, got;
    for (const auto& r : s.records)
      if (w.test.contains(r.trade_date)) expected.insert(r.sample_id);
    for (const auto& p : w.predictions) got.insert(p.sample_id);
    EXPECT_EQ(got, expected);
    EXPECT_EQ(got.size(), w.predictions.size());
  }
}

TEST(RunExperiment, DeterministicAcrossThreadCounts) {
  const auto s = toy_samples(Date(2013, 9, 1), Date(2014, 4, 30));
  auto o = two_model_options();
  o.threads = 1;
  const auto a = run_experiment(o, s);
  o.threads = 3;
  const auto b = run_experiment(o, s);
  ASSERT_EQ(a.windows.size(), b.windows.size());
  for (std::size_t i = 0; i < a.windows.size(); ++i)
    EXPECT_EQ(window_to_json(a.windows[i]).dump(), window_to_json(b.windows[i]).dump());
}

TEST(RunExperiment, EpochTraceHasOneEntryPerEvaluation) {
  const auto s = toy_samples(Date(2013, 9, 1), Date(2014, 4, 30));
  auto o = two_model_options();
  o.epochs = 4;
  o.evaluate_every = 2;
  o.repetitions = 1;
  for (const auto& w : run_experiment(o, s).windows)
    if (w.model_id != "All") { EXPECT_EQ(w.epoch_validation_avg_profit.size(), 2u); }
}

TEST(RunExperiment, SingleClassTrainingWindowSkipped) {
  auto s = toy_samples(Date(2013, 9, 1), Date(2014, 4, 30));
  for (auto& r : s.records)
    if (r.trade_date < Date(2014, 1, 1)) r.label = 1;
  auto o = two_model_options();
  o.repetitions = 1;
  const auto res = run_experiment(o, s);
  EXPECT_FALSE(res.warnings.empty());
  for (const auto& w : res.windows)
    if (w.model_id != "All") { EXPECT_NE(w.iteration, 0u); }
}

TEST(ResultsIo, JsonlRoundTrip) {
  testing_support::TempDir dir("results");
  const auto s = toy_samples(Date(2013, 9, 1), Date(2014, 4, 30));
  auto o = two_model_options();
  o.repetitions = 2;
  const auto res = run_experiment(o, s);
  write_results_jsonl(dir.file("r.jsonl"), res.windows);
  const auto back = read_results_jsonl(dir.file("r.jsonl"));
  ASSERT_EQ(back.size(), res.windows.size());
  for (std::size_t i = 0; i < back.size(); ++i)
    EXPECT_EQ(window_to_json(back[i]).dump(), window_to_json(res.windows[i]).dump());

  testing_support::write_file(dir.file("bad.jsonl"), window_to_json(res.windows[0]).dump() + "\n{not json\n");
  try {
    read_results_jsonl(dir.file("bad.jsonl"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}
