#include <gtest/gtest.h>

#include <cmath>

#include "straddle/random.hpp"
#include "straddle/strategy.hpp"
#include "support.hpp"

using namespace straddle;
using testing_support::flat_bar;
using testing_support::quote;

namespace {

/// One trade date with a straddle chain per expiry offset, and flat SPX
/// bars on every listed expiry.
MarketDataset chain_dataset(const std::vector<int>& expiry_offsets, double spot = 4002.0) {
  const Date t(2019, 3, 1);
  std::vector<OptionQuote> q;
  std::vector<DailyBar> bars{flat_bar(t, spot)};
  for (int off : expiry_offsets) {
    const Date e = t.plus_days(off);
    for (double k : {3990.0, 4000.0, 4010.0}) {
      q.push_back(quote(t, e, OptionRight::put, k, 10.0, 10.4));
      q.push_back(quote(t, e, OptionRight::call, k, 12.0, 12.4, off != 7));
      q.push_back(quote(e, e.plus_days(30), OptionRight::call, k, 1, 2));
    }
    bars.push_back(flat_bar(e, 4000.0));
  }
  return align_calendar(q, bars, bars).dataset;
}

StraddleTrade trade(double premium, double strike) {
  StraddleTrade t;
  t.strike = strike;
  t.premium = premium;
  return t;
}

}  // namespace

TEST(SelectAtmStrike, Examples) {
  const std::vector<double> a{3990, 4000, 4010};
  EXPECT_EQ(select_atm_strike(a, 4002), 4000);
  const std::vector<double> b{3995, 4005};
  EXPECT_EQ(select_atm_strike(b, 4000), 3995);
  const std::vector<double> c{4000};
  EXPECT_EQ(select_atm_strike(c, 3500), 4000);
  EXPECT_THROW(select_atm_strike(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST(SelectAtmStrike, NeverFartherThanAnyListed) {
  Rng rng(11);
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<double> strikes;
    const auto n = 1 + rng.index(12);
    for (std::uint64_t i = 0; i < n; ++i) strikes.push_back(double(3900 + 5 * rng.index(40)));
    const double spot = 3900 + 200 * rng.uniform();
    const double k = select_atm_strike(strikes, spot);
    for (double s : strikes) EXPECT_LE(std::abs(k - spot), std::abs(s - spot));
  }
}

TEST(SellPrice, Examples) {
  auto a = sell_price(10.0, 10.4);
  EXPECT_NEAR(a.price, 10.1, 1e-12);
  EXPECT_TRUE(a.tradable);
  auto b = sell_price(0.0, 0.1);
  EXPECT_NEAR(b.price, -0.05, 1e-12);
  EXPECT_FALSE(b.tradable);
  auto c = sell_price(12.0, 12.0);
  EXPECT_NEAR(c.price, 11.9, 1e-12);
  EXPECT_TRUE(c.tradable);
}

TEST(BuildStraddle, PicksFirstExpiryAtLeastTenor) {
  auto t7 = build_straddle(chain_dataset({5, 7, 14}), Date(2019, 3, 1), 7);
  EXPECT_EQ(t7.expiry_date, Date(2019, 3, 8));
  EXPECT_EQ(t7.days_to_expiry, 7);
  EXPECT_EQ(t7.strike, 4000);
  EXPECT_NEAR(t7.put_sell_price, 10.1, 1e-12);
  EXPECT_NEAR(t7.call_sell_price, 12.1, 1e-12);
  EXPECT_NEAR(t7.premium, 22.2, 1e-12);

  auto t9 = build_straddle(chain_dataset({5, 9}), Date(2019, 3, 1), 7);
  EXPECT_EQ(t9.expiry_date, Date(2019, 3, 10));
  EXPECT_THROW(build_straddle(chain_dataset({5}), Date(2019, 3, 1), 7), SampleSkipped);
}

TEST(BuildStraddle, UntradableLegSkips) {
  const Date t(2019, 3, 1), e(2019, 3, 8);
  std::vector<OptionQuote> q{quote(t, e, OptionRight::put, 4000, 0.0, 0.1), quote(t, e, OptionRight::call, 4000, 5, 6)};
  std::vector<DailyBar> bars{flat_bar(t, 4000), flat_bar(e, 4000)};
  q.push_back(quote(e, e.plus_days(7), OptionRight::call, 4000, 1, 2));
  auto ds = align_calendar(q, bars, bars).dataset;
  EXPECT_THROW(build_straddle(ds, t, 7), SampleSkipped);
}

TEST(BuildStraddle, MissingLegSkips) {
  const Date t(2019, 3, 1), e(2019, 3, 8);
  std::vector<OptionQuote> q{quote(t, e, OptionRight::call, 4000, 5, 6),
                             quote(e, e.plus_days(7), OptionRight::call, 4000, 1, 2)};
  std::vector<DailyBar> bars{flat_bar(t, 4000), flat_bar(e, 4000)};
  auto ds = align_calendar(q, bars, bars).dataset;
  EXPECT_THROW(build_straddle(ds, t, 7), SampleSkipped);
}

TEST(TradeAndSettle, UsesSpxCloseAtExpiry) {
  auto s = trade_and_settle(chain_dataset({7}), Date(2019, 3, 1), 7);
  EXPECT_EQ(s.settlement, 4000.0);
  EXPECT_NEAR(s.profit, 22.2, 1e-12);
  EXPECT_EQ(s.label, 1);
}

TEST(SettleStraddle, Examples) {
  auto apex = settle_straddle(trade(22.2, 4000), 4000);
  EXPECT_NEAR(apex.profit, 22.2, 1e-12);
  EXPECT_EQ(apex.label, 1);
  auto loss = settle_straddle(trade(22.2, 4000), 4050);
  EXPECT_NEAR(loss.profit, -27.8, 1e-12);
  EXPECT_EQ(loss.label, 0);
  auto even = settle_straddle(trade(22.2, 4000), 3977.8);
  EXPECT_NEAR(even.profit, 0.0, 1e-9);
  EXPECT_EQ(settle_straddle(trade(0.5, 10), 10.5).label, 0);  // exactly zero is not a win
}

TEST(SettleStraddle, PayoffShapeProperties) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    // Dyadic values keep every difference exact.
    const double m = double(32 + rng.index(3840)) / 64.0;
    const double k = 1000 + 5 * double(rng.index(800));
    const double d = double(rng.index(19200)) / 64.0;
    const auto up = settle_straddle(trade(m, k), k + d);
    const auto down = settle_straddle(trade(m, k), k - d);
    EXPECT_EQ(settle_straddle(trade(m, k), k).profit, m);
    EXPECT_EQ(up.profit, down.profit);
    EXPECT_EQ(up.profit, m - d);
    EXPECT_EQ(up.label, up.profit > 0 ? 1 : 0);
  }
}
