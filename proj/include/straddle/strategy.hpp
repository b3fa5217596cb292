#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "straddle/data_ingest.hpp"
#include "straddle/date.hpp"
#include "straddle/error.hpp"

namespace straddle {

/// A decision date that cannot produce a trade sample (no qualifying
/// expiry, missing leg, untradable price, missing settlement or history).
/// Dataset builders catch it and record a warning.
class SampleSkipped : public DataError {
 public:
  using DataError::DataError;
};

/// Haircut applied to the mid price of each sold leg.
inline constexpr double kSellHaircut = 0.1;

/// Short ATM put + short ATM call, one contract each.
struct StraddleTrade {
  Date trade_date;
  Date expiry_date;
  double strike = 0.0;
  double put_sell_price = 0.0;
  double call_sell_price = 0.0;
  double premium = 0.0;  // put_sell_price + call_sell_price
  long days_to_expiry = 0;
  bool pm_settled = true;
};

struct SettledTrade {
  StraddleTrade trade;
  double settlement = 0.0;  // SPX close on the expiry date
  double profit = 0.0;
  int label = 0;  // 1 = trade, 0 = don't trade
};

/// Strike nearest to `spot`; the lower strike wins an exact tie.
/// `strikes` must be sorted ascending.
inline double select_atm_strike(std::span<const double> strikes, double spot) {
  if (strikes.empty()) throw std::invalid_argument("select_atm_strike: empty strike list");
  double best = strikes.front();
  double best_dist = std::abs(best - spot);
  for (double k : strikes.subspan(1)) {
    const double dist = std::abs(k - spot);
    if (dist < best_dist) {
      best = k;
      best_dist = dist;
    }
  }
  return best;
}

struct LegPrice {
  double price = 0.0;
  bool tradable = false;
};

/// Mid price less the haircut. A non-positive result marks the leg untradable.
inline LegPrice sell_price(double bid, double ask) {
  const double price = (bid + ask) / 2.0 - kSellHaircut;
  return {price, price > 0.0};
}

/// Builds the straddle for `trade_date` on the earliest expiry at least
/// `target_tenor` calendar days away.
inline StraddleTrade build_straddle(const MarketDataset& dataset, Date trade_date, long target_tenor) {
  const DailyBar* spx = dataset.spx_on(trade_date);
  if (!spx) throw SampleSkipped(trade_date.iso() + ": not a dataset trade date");
  const auto quotes = dataset.quotes_on(trade_date);

  const Date min_expiry = trade_date.plus_days(target_tenor);
  std::optional<Date> expiry;
  for (const auto& q : quotes)
    if (q.expiry_date >= min_expiry && (!expiry || q.expiry_date < *expiry)) expiry = q.expiry_date;
  if (!expiry)
    throw SampleSkipped(trade_date.iso() + ": no expiry with tenor >= " + std::to_string(target_tenor) + "d");

  std::vector<double> strikes;
  for (const auto& q : quotes)
    if (q.expiry_date == *expiry) strikes.push_back(q.strike);
  std::sort(strikes.begin(), strikes.end());
  strikes.erase(std::unique(strikes.begin(), strikes.end()), strikes.end());
  const double strike = select_atm_strike(strikes, spx->close);

  const OptionQuote* put = nullptr;
  const OptionQuote* call = nullptr;
  for (const auto& q : quotes) {
    if (q.expiry_date != *expiry || q.strike != strike) continue;
    (q.right == OptionRight::put ? put : call) = &q;
  }
  if (!put || !call)
    throw SampleSkipped(trade_date.iso() + ": missing " + (put ? "call" : "put") + " at strike " +
                        csv::format_number(strike));

  const auto put_price = sell_price(put->bid, put->ask);
  const auto call_price = sell_price(call->bid, call->ask);
  if (!put_price.tradable || !call_price.tradable)
    throw SampleSkipped(trade_date.iso() + ": untradable leg price at strike " + csv::format_number(strike));

  StraddleTrade t;
  t.trade_date = trade_date;
  t.expiry_date = *expiry;
  t.strike = strike;
  t.put_sell_price = put_price.price;
  t.call_sell_price = call_price.price;
  t.premium = put_price.price + call_price.price;
  t.days_to_expiry = trade_date.days_until(*expiry);
  t.pm_settled = put->pm_settled;
  return t;
}

/// Settles a held-to-expiry straddle at `settlement`. Label is 1 only for a
/// strictly positive profit.
inline SettledTrade settle_straddle(const StraddleTrade& trade, double settlement) {
  if (!(settlement > 0.0)) throw std::invalid_argument("settle_straddle: settlement must be positive");
  SettledTrade s;
  s.trade = trade;
  s.settlement = settlement;
  s.profit = trade.premium - std::max(0.0, trade.strike - settlement) - std::max(0.0, settlement - trade.strike);
  s.label = s.profit > 0.0 ? 1 : 0;
  return s;
}

/// Builds and settles against the SPX close on the expiry date.
inline SettledTrade trade_and_settle(const MarketDataset& dataset, Date trade_date, long target_tenor) {
  const auto trade = build_straddle(dataset, trade_date, target_tenor);
  const DailyBar* at_expiry = dataset.spx_on(trade.expiry_date);
  if (!at_expiry) throw SampleSkipped(trade_date.iso() + ": no SPX close on expiry " + trade.expiry_date.iso());
  return settle_straddle(trade, at_expiry->close);
}

}  // namespace straddle
