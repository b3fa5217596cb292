#include <gtest/gtest.h>

#include "straddle/features.hpp"
#include "straddle/synth.hpp"
#include "support.hpp"

using namespace straddle;

namespace {

const std::vector<std::string> kExp11{"putPrice", "callPrice", "strike", "spx1", "spx2", "spx3", "spx4", "spx5",
                                      "vix0",     "vix1",      "vix2",   "vix3", "vix4", "vix5", "daysToExpiry"};

std::vector<std::string> exp21() {
  auto f = kExp11;
  for (const char* s : {"spxHigh", "spxLow", "vixHigh", "vixLow", "pmSettled", "daysToExpiry"}) f.emplace_back(s);
  return f;
}

/// Flat market: every close equal, quotes for a 7-day straddle every day.
MarketDataset flat_market(int n_days, double level = 4000.0, double scale = 1.0) {
  const auto days = testing_support::weekdays(Date(2019, 1, 7), n_days + 10);
  std::vector<OptionQuote> q;
  std::vector<DailyBar> spx, vix;
  for (std::size_t i = 0; i < days.size(); ++i) {
    const double close = level * scale * (1.0 + 0.001 * double(i % 3));
    spx.push_back({days[i], close, close * 1.01, close * 0.99, close});
    vix.push_back({days[i], 15, 16, 14, 15.5});
    const Date e = days[i].plus_days(7);
    q.push_back(testing_support::quote(days[i], e, OptionRight::put, close, 10, 10.4));
    q.push_back(testing_support::quote(days[i], e, OptionRight::call, close, 12, 12.4));
  }
  return align_calendar(q, spx, vix).dataset;
}

}  // namespace

TEST(RelativeSpx, Examples) {
  EXPECT_EQ(relative_spx(std::vector<double>{1, 1, 1, 1, 4000, 4000}, 1), 1.0);
  EXPECT_DOUBLE_EQ(relative_spx(std::vector<double>{1, 1, 3800, 1, 1, 4000}, 3), 0.95);
  EXPECT_THROW(relative_spx(std::vector<double>{1, 1, 1, 1, 1}, 1), SampleSkipped);
}

TEST(ResolveFeatures, ExperimentListsAndDedup) {
  const auto a = resolve_features(kExp11);
  ASSERT_EQ(a.size(), 15u);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(feature_name(a[i]), kExp11[i]);
  const auto b = resolve_features(exp21());
  ASSERT_EQ(b.size(), 20u);
  EXPECT_EQ(feature_name(b[15]), "spxHigh");
  EXPECT_EQ(feature_name(b[19]), "pmSettled");
  EXPECT_THROW(resolve_features(std::vector<std::string>{"bogus"}), std::invalid_argument);
}

TEST(BuildSample, FlatMarketRelativesAreOne) {
  const Date base(2019, 1, 7);
  const auto days = testing_support::weekdays(base, 20);
  std::vector<OptionQuote> q;
  std::vector<DailyBar> spx, vix;
  for (Date d : days) {
    spx.push_back(testing_support::flat_bar(d, 4000));
    vix.push_back(testing_support::flat_bar(d, 15));
    q.push_back(testing_support::quote(d, d.plus_days(7), OptionRight::put, 4000, 10, 10.4));
    q.push_back(testing_support::quote(d, d.plus_days(7), OptionRight::call, 4000, 12, 12.4));
  }
  const auto ds = align_calendar(q, spx, vix).dataset;
  const auto features = resolve_features(kExp11);
  const auto rec = build_sample(ds, days[6], 7, features);
  for (const char* name : {"spx1", "spx2", "spx3", "spx4", "spx5"})
    EXPECT_EQ(rec.features.get(*parse_feature(name)).value(), 1.0) << name;
  EXPECT_EQ(rec.features.values.size(), 15u);
  EXPECT_NEAR(rec.features.get(Feature::putPrice).value(), 10.1, 1e-12);
  EXPECT_EQ(rec.features.get(Feature::strike).value(), 4000);
  EXPECT_EQ(rec.features.get(Feature::daysToExpiry).value(), 7);
  EXPECT_NEAR(rec.profit, 22.2, 1e-12);
  EXPECT_EQ(rec.label, 1);
}

TEST(BuildSample, ArityAndOrderFollowConfig) {
  const auto ds = flat_market(30);
  const auto f = resolve_features(exp21());
  const auto rec = build_sample(ds, ds.dates()[10], 7, f);
  ASSERT_EQ(rec.features.values.size(), f.size());
  EXPECT_EQ(rec.features.names, f);
  for (double v : rec.features.values) EXPECT_TRUE(std::isfinite(v));
  EXPECT_EQ(rec.features.get(Feature::pmSettled).value(), 1.0);
  EXPECT_EQ(rec.features.get(Feature::vixHigh).value(), 16.0);
}

TEST(BuildSample, SpxRelativesScaleInvariant) {
  const auto f = resolve_features(kExp11);
  const auto a = flat_market(30, 4000.0, 1.0);
  const auto b = flat_market(30, 4000.0, 2.5);
  for (std::size_t i = 6; i < 20; ++i) {
    const auto ra = build_sample(a, a.dates()[i], 7, f);
    const auto rb = build_sample(b, b.dates()[i], 7, f);
    for (const char* name : {"spx1", "spx2", "spx3", "spx4", "spx5"}) {
      const auto feat = *parse_feature(name);
      EXPECT_NEAR(ra.features.get(feat).value(), rb.features.get(feat).value(), 1e-15);
    }
  }
}

TEST(BuildDataset, CountsIdsAndSkips) {
  const auto ds = flat_market(40);
  const auto f = resolve_features(kExp11);
  std::vector<Date> ten(ds.dates().begin() + 10, ds.dates().begin() + 20);
  const auto a = build_dataset(ds, ten, 7, f);
  ASSERT_EQ(a.records.size(), 10u);
  for (std::size_t i = 0; i < 10; ++i) EXPECT_EQ(a.records[i].sample_id, i);

  std::vector<Date> with_early(ds.dates().begin() + 3, ds.dates().begin() + 13);
  const auto b = build_dataset(ds, with_early, 7, f);
  EXPECT_EQ(b.records.size(), 8u);
  EXPECT_EQ(b.warnings.size(), 2u);
}

TEST(BuildDataset, Deterministic) {
  SynthConfig cfg;
  cfg.n_days = 200;
  const auto ds = generate_market(cfg);
  const auto f = resolve_features(exp21());
  const auto a = build_dataset(ds, ds.dates(), 7, f);
  const auto b = build_dataset(ds, ds.dates(), 7, f);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) EXPECT_EQ(a.records[i].features.values, b.records[i].features.values);
}

TEST(FridaySchedule, OneYearRoughlyFortyEightWeeks) {
  // March 2019 to February 2020 on an exchange calendar.
  const auto days = market_days(Date(2019, 1, 2), 320);
  const auto fridays = friday_schedule(days, Date(2019, 3, 1), Date(2020, 2, 28));
  EXPECT_GE(fridays.size(), 40u);
  EXPECT_LE(fridays.size(), 52u);
  for (Date f : fridays) EXPECT_EQ(f.weekday(), 5u);
  // Thanksgiving week and Good Friday are omitted.
  EXPECT_EQ(std::count(fridays.begin(), fridays.end(), Date(2019, 11, 29)), 0);
  EXPECT_EQ(std::count(fridays.begin(), fridays.end(), Date(2019, 4, 19)), 0);
  EXPECT_EQ(std::count(fridays.begin(), fridays.end(), Date(2019, 3, 1)), 1);
}

TEST(SamplesCsv, RoundTrip) {
  testing_support::TempDir dir("samples");
  const auto ds = flat_market(30);
  const auto set = build_dataset(ds, ds.dates(), 7, resolve_features(exp21()));
  write_samples_csv(dir.file("s.csv"), set);
  const auto back = read_samples_csv(dir.file("s.csv"));
  ASSERT_EQ(back.records.size(), set.records.size());
  EXPECT_EQ(back.feature_names, set.feature_names);
  for (std::size_t i = 0; i < set.records.size(); ++i) {
    EXPECT_EQ(back.records[i].features.values, set.records[i].features.values);
    EXPECT_EQ(back.records[i].profit, set.records[i].profit);
    EXPECT_EQ(back.records[i].trade_date, set.records[i].trade_date);
  }
}
