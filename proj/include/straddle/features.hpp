#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "straddle/csv.hpp"
#include "straddle/data_ingest.hpp"
#include "straddle/date.hpp"
#include "straddle/error.hpp"
#include "straddle/strategy.hpp"

namespace straddle {

enum class Feature {
  putPrice,
  callPrice,
  strike,
  spx1,
  spx2,
  spx3,
  spx4,
  spx5,
  vix0,
  vix1,
  vix2,
  vix3,
  vix4,
  vix5,
  daysToExpiry,
  spxHigh,
  spxLow,
  vixHigh,
  vixLow,
  pmSettled,
};

inline constexpr std::array<std::string_view, 20> kFeatureNames = {
    "putPrice", "callPrice", "strike", "spx1",         "spx2",    "spx3",   "spx4",
    "spx5",     "vix0",      "vix1",   "vix2",         "vix3",    "vix4",   "vix5",
    "daysToExpiry", "spxHigh", "spxLow", "vixHigh", "vixLow", "pmSettled"};

inline std::string_view feature_name(Feature f) { return kFeatureNames[std::size_t(f)]; }

inline std::optional<Feature> parse_feature(std::string_view name) {
  for (std::size_t i = 0; i < kFeatureNames.size(); ++i)
    if (kFeatureNames[i] == name) return Feature(i);
  return std::nullopt;
}

/// Maps configured names to features, keeping the first occurrence of any
/// repeated name. Throws std::invalid_argument on an unknown name.
inline std::vector<Feature> resolve_features(std::span<const std::string> names) {
  std::vector<Feature> out;
  for (const auto& n : names) {
    auto f = parse_feature(n);
    if (!f) throw std::invalid_argument("unknown feature '" + n + "'");
    if (std::find(out.begin(), out.end(), *f) == out.end()) out.push_back(*f);
  }
  return out;
}

struct FeatureVector {
  std::vector<Feature> names;
  std::vector<double> values;

  std::optional<double> get(Feature f) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == f) return values[i];
    return std::nullopt;
  }
};

struct TradeSampleRecord {
  std::size_t sample_id = 0;
  Date trade_date;
  FeatureVector features;
  double profit = 0.0;
  int label = 0;
};

/// Records built for one feature configuration, ordered by trade date.
struct SampleSet {
  std::vector<Feature> feature_names;
  std::vector<TradeSampleRecord> records;
  std::vector<std::string> warnings;
};

/// close(t-lag) / close(t). `closes` holds the last six closes, oldest first.
inline double relative_spx(std::span<const double> closes, int lag) {
  if (closes.size() < 6) throw SampleSkipped("need 6 SPX closes for relative features");
  if (lag < 1 || lag > 5) throw std::invalid_argument("relative_spx: lag must be in 1..5");
  const std::size_t now = closes.size() - 1;
  return closes[now - std::size_t(lag)] / closes[now];
}

/// Builds one labeled sample. Throws SampleSkipped when the trade or any
/// requested feature is unavailable.
inline TradeSampleRecord build_sample(const MarketDataset& dataset, Date trade_date, long tenor,
                                      std::span<const Feature> features) {
  const auto idx = dataset.index_of(trade_date);
  if (!idx) throw SampleSkipped(trade_date.iso() + ": not a dataset trade date");
  const auto& spx = dataset.spx_bars();
  const auto& vix = dataset.vix_bars();
  const bool has_history = *idx >= 5;

  const SettledTrade settled = trade_and_settle(dataset, trade_date, tenor);
  const StraddleTrade& trade = settled.trade;

  std::array<double, 6> spx_closes{};
  if (has_history)
    for (std::size_t k = 0; k < 6; ++k) spx_closes[k] = spx[*idx - 5 + k].close;

  auto vix_lag = [&](int lag) {
    if (!has_history) throw SampleSkipped(trade_date.iso() + ": fewer than 5 prior trading days");
    return vix[*idx - std::size_t(lag)].close;
  };
  auto spx_lag = [&](int lag) {
    if (!has_history) throw SampleSkipped(trade_date.iso() + ": fewer than 5 prior trading days");
    return relative_spx(spx_closes, lag);
  };

  TradeSampleRecord rec;
  rec.trade_date = trade_date;
  rec.profit = settled.profit;
  rec.label = settled.label;
  rec.features.names.assign(features.begin(), features.end());
  rec.features.values.reserve(features.size());
  for (Feature f : features) {
    double v = 0.0;
    switch (f) {
      case Feature::putPrice: v = trade.put_sell_price; break;
      case Feature::callPrice: v = trade.call_sell_price; break;
      case Feature::strike: v = trade.strike; break;
      case Feature::spx1: v = spx_lag(1); break;
      case Feature::spx2: v = spx_lag(2); break;
      case Feature::spx3: v = spx_lag(3); break;
      case Feature::spx4: v = spx_lag(4); break;
      case Feature::spx5: v = spx_lag(5); break;
      case Feature::vix0: v = vix[*idx].close; break;
      case Feature::vix1: v = vix_lag(1); break;
      case Feature::vix2: v = vix_lag(2); break;
      case Feature::vix3: v = vix_lag(3); break;
      case Feature::vix4: v = vix_lag(4); break;
      case Feature::vix5: v = vix_lag(5); break;
      case Feature::daysToExpiry: v = double(trade.days_to_expiry); break;
      case Feature::spxHigh: v = spx[*idx].high; break;
      case Feature::spxLow: v = spx[*idx].low; break;
      case Feature::vixHigh: v = vix[*idx].high; break;
      case Feature::vixLow: v = vix[*idx].low; break;
      case Feature::pmSettled: v = trade.pm_settled ? 1.0 : 0.0; break;
    }
    if (!std::isfinite(v))
      throw SampleSkipped(trade_date.iso() + ": non-finite " + std::string(feature_name(f)));
    rec.features.values.push_back(v);
  }
  return rec;
}

/// One record per constructible date in `schedule`; skipped dates become warnings.
inline SampleSet build_dataset(const MarketDataset& dataset, std::span<const Date> schedule, long tenor,
                               std::span<const Feature> features) {
  std::vector<Date> dates(schedule.begin(), schedule.end());
  std::sort(dates.begin(), dates.end());
  dates.erase(std::unique(dates.begin(), dates.end()), dates.end());

  SampleSet set;
  set.feature_names.assign(features.begin(), features.end());
  for (Date d : dates) {
    try {
      auto rec = build_sample(dataset, d, tenor, features);
      rec.sample_id = set.records.size();
      set.records.push_back(std::move(rec));
    } catch (const SampleSkipped& e) {
      set.warnings.push_back(e.what());
    }
  }
  if (set.records.empty()) throw DataError("no constructible samples in schedule");
  return set;
}

/// Every dataset trade date in [from, to].
inline std::vector<Date> daily_schedule(const MarketDataset& dataset, Date from, Date to) {
  std::vector<Date> out;
  for (Date d : dataset.dates())
    if (d >= from && d <= to) out.push_back(d);
  return out;
}

/// Fridays in [from, to] whose Monday-to-Friday week has five trading days
/// in `trading_days` (ascending). Weeks with a market holiday are omitted.
inline std::vector<Date> friday_schedule(std::span<const Date> trading_days, Date from, Date to) {
  std::vector<Date> out;
  auto is_trading = [&](Date d) { return std::binary_search(trading_days.begin(), trading_days.end(), d); };
  Date friday = from.plus_days((5 - long(from.weekday()) + 7) % 7);
  for (; friday <= to; friday = friday.plus_days(7)) {
    bool full_week = true;
    for (long back = 0; back < 5 && full_week; ++back) full_week = is_trading(friday.plus_days(-back));
    if (full_week) out.push_back(friday);
  }
  return out;
}

inline void write_samples_csv(const std::string& path, const SampleSet& set) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << "sample_id,trade_date";
  for (Feature f : set.feature_names) out << ',' << feature_name(f);
  out << ",profit,label\n";
  for (const auto& r : set.records) {
    out << r.sample_id << ',' << r.trade_date.iso();
    for (double v : r.features.values) out << ',' << csv::format_number(v);
    out << ',' << csv::format_number(r.profit) << ',' << r.label << '\n';
  }
}

inline SampleSet read_samples_csv(const std::string& path) {
  csv::Reader reader(path);
  std::string line;
  if (!reader.next(line)) throw ParseError("missing header", 1);
  const auto header = csv::split(line);
  if (header.size() < 4 || header[0] != "sample_id" || header[1] != "trade_date" ||
      header[header.size() - 2] != "profit" || header.back() != "label") {
    throw ParseError("bad sample header", 1);
  }
  SampleSet set;
  for (std::size_t i = 2; i + 2 < header.size(); ++i) {
    auto f = parse_feature(header[i]);
    if (!f) throw ParseError("unknown feature column '" + std::string(header[i]) + "'", 1);
    set.feature_names.push_back(*f);
  }
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto fields = csv::split(line);
    const auto ln = reader.line_number();
    if (fields.size() != header.size()) throw ParseError("wrong field count", ln);
    TradeSampleRecord r;
    auto id = csv::parse_integer(fields[0]);
    auto date = Date::parse(fields[1]);
    auto profit = csv::parse_number(fields[fields.size() - 2]);
    auto label = csv::parse_integer(fields.back());
    if (!id || !date || !profit || !label || (*label != 0 && *label != 1)) throw ParseError("bad value", ln);
    r.sample_id = std::size_t(*id);
    r.trade_date = *date;
    r.profit = *profit;
    r.label = int(*label);
    r.features.names = set.feature_names;
    for (std::size_t i = 2; i + 2 < fields.size(); ++i) {
      auto v = csv::parse_number(fields[i]);
      if (!v) throw ParseError("bad feature value", ln);
      r.features.values.push_back(*v);
    }
    set.records.push_back(std::move(r));
  }
  return set;
}

}  // namespace straddle
