#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "straddle/csv.hpp"
#include "straddle/date.hpp"
#include "straddle/error.hpp"

namespace straddle {

enum class OptionRight { put, call };

/// End-of-day record for a single SPX option contract.
struct OptionQuote {
  Date trade_date;
  Date expiry_date;
  OptionRight right = OptionRight::call;
  double strike = 0.0;
  double bid = 0.0;
  double ask = 0.0;
  long long volume = 0;
  long long open_interest = 0;
  bool pm_settled = true;

  friend bool operator==(const OptionQuote&, const OptionQuote&) = default;
};

struct DailyBar {
  Date date;
  double open = 0.0;
  double high = 0.0;
  double low = 0.0;
  double close = 0.0;

  friend bool operator==(const DailyBar&, const DailyBar&) = default;
};

inline constexpr std::string_view kOptionCsvHeader =
    "trade_date,expiry_date,right,strike,bid,ask,volume,open_interest,pm_settled";
inline constexpr std::string_view kBarCsvHeader = "date,open,high,low,close";

/// Empty when the quote is valid, otherwise the reason it is not.
inline std::optional<std::string> check_quote(const OptionQuote& q) {
  if (!(q.bid >= 0.0)) return "negative bid";
  if (q.bid > q.ask) return "bid " + csv::format_number(q.bid) + " exceeds ask " + csv::format_number(q.ask);
  if (!(q.strike > 0.0)) return "non-positive strike";
  if (q.expiry_date < q.trade_date) return "expiry before trade date";
  if (q.volume < 0 || q.open_interest < 0) return "negative volume or open interest";
  return std::nullopt;
}

inline std::optional<std::string> check_bar(const DailyBar& b) {
  if (!(b.low > 0.0)) return "non-positive low";
  if (b.low > b.high) return "low exceeds high";
  if (b.low > std::min(b.open, b.close) || b.high < std::max(b.open, b.close))
    return "open/close outside [low, high]";
  return std::nullopt;
}

/// Loads an option chain CSV; rows are returned in file order.
inline std::vector<OptionQuote> load_option_chain(const std::string& path) {
  csv::Reader reader(path);
  reader.expect_header(kOptionCsvHeader);
  std::vector<OptionQuote> quotes;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto line_no = reader.line_number();
    const auto f = csv::split(line);
    if (f.size() != 9) throw ParseError("expected 9 fields, got " + std::to_string(f.size()), line_no);

    OptionQuote q;
    auto trade = Date::parse(f[0]);
    auto expiry = Date::parse(f[1]);
    if (!trade || !expiry) throw ParseError("bad date", line_no);
    q.trade_date = *trade;
    q.expiry_date = *expiry;
    if (f[2] == "P") {
      q.right = OptionRight::put;
    } else if (f[2] == "C") {
      q.right = OptionRight::call;
    } else {
      throw ParseError("right must be P or C", line_no);
    }
    auto strike = csv::parse_number(f[3]);
    auto bid = csv::parse_number(f[4]);
    auto ask = csv::parse_number(f[5]);
    auto volume = csv::parse_integer(f[6]);
    auto oi = csv::parse_integer(f[7]);
    if (!strike || !bid || !ask || !volume || !oi) throw ParseError("unparsable number", line_no);
    if (f[8] != "0" && f[8] != "1") throw ParseError("pm_settled must be 0 or 1", line_no);
    q.strike = *strike;
    q.bid = *bid;
    q.ask = *ask;
    q.volume = *volume;
    q.open_interest = *oi;
    q.pm_settled = f[8] == "1";
    if (auto err = check_quote(q)) throw ValidationError("line " + std::to_string(line_no) + ": " + *err);
    quotes.push_back(q);
  }
  return quotes;
}

/// Loads a daily bar CSV. Dates must be strictly increasing.
inline std::vector<DailyBar> load_daily_bars(const std::string& path) {
  csv::Reader reader(path);
  reader.expect_header(kBarCsvHeader);
  std::vector<DailyBar> bars;
  std::string line;
  while (reader.next(line)) {
    if (line.empty()) continue;
    const auto line_no = reader.line_number();
    const auto f = csv::split(line);
    if (f.size() != 5) throw ParseError("expected 5 fields, got " + std::to_string(f.size()), line_no);
    auto date = Date::parse(f[0]);
    if (!date) throw ParseError("bad date", line_no);
    auto open = csv::parse_number(f[1]);
    auto high = csv::parse_number(f[2]);
    auto low = csv::parse_number(f[3]);
    auto close = csv::parse_number(f[4]);
    if (!open || !high || !low || !close) throw ParseError("unparsable number", line_no);
    DailyBar bar{*date, *open, *high, *low, *close};
    if (!bars.empty()) {
      if (bar.date == bars.back().date) throw ValidationError("duplicate date " + bar.date.iso());
      if (bar.date < bars.back().date) throw ValidationError("out-of-order date " + bar.date.iso());
    }
    if (auto err = check_bar(bar))
      throw ValidationError("line " + std::to_string(line_no) + " (" + bar.date.iso() + "): " + *err);
    bars.push_back(bar);
  }
  return bars;
}

inline void write_option_chain(const std::string& path, std::span<const OptionQuote> quotes) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << kOptionCsvHeader << '\n';
  for (const auto& q : quotes) {
    out << q.trade_date.iso() << ',' << q.expiry_date.iso() << ','
        << (q.right == OptionRight::put ? 'P' : 'C') << ',' << csv::format_number(q.strike) << ','
        << csv::format_number(q.bid) << ',' << csv::format_number(q.ask) << ',' << q.volume << ','
        << q.open_interest << ',' << (q.pm_settled ? 1 : 0) << '\n';
  }
}

inline void write_daily_bars(const std::string& path, std::span<const DailyBar> bars) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  out << kBarCsvHeader << '\n';
  for (const auto& b : bars) {
    out << b.date.iso() << ',' << csv::format_number(b.open) << ',' << csv::format_number(b.high) << ','
        << csv::format_number(b.low) << ',' << csv::format_number(b.close) << '\n';
  }
}

/// Immutable, calendar-aligned market data. Every trade date carries an
/// SPX bar, a VIX bar and at least one option quote.
class MarketDataset {
 public:
  MarketDataset() = default;

  const std::vector<Date>& dates() const { return dates_; }
  const std::vector<DailyBar>& spx_bars() const { return spx_; }
  const std::vector<DailyBar>& vix_bars() const { return vix_; }

  /// Index of `d` in dates(), if present.
  std::optional<std::size_t> index_of(Date d) const {
    auto it = std::lower_bound(dates_.begin(), dates_.end(), d);
    if (it == dates_.end() || *it != d) return std::nullopt;
    return std::size_t(it - dates_.begin());
  }

  bool contains(Date d) const { return index_of(d).has_value(); }

  std::span<const OptionQuote> quotes_on(Date d) const {
    auto it = quotes_.find(d);
    if (it == quotes_.end()) return {};
    return it->second;
  }

  std::vector<OptionQuote> all_quotes() const {
    std::vector<OptionQuote> out;
    for (const auto& [date, qs] : quotes_) out.insert(out.end(), qs.begin(), qs.end());
    return out;
  }

  const DailyBar* spx_on(Date d) const {
    auto i = index_of(d);
    return i ? &spx_[*i] : nullptr;
  }
  const DailyBar* vix_on(Date d) const {
    auto i = index_of(d);
    return i ? &vix_[*i] : nullptr;
  }

 private:
  friend struct AlignResult align_calendar(std::span<const OptionQuote>, std::span<const DailyBar>,
                                           std::span<const DailyBar>);

  std::vector<Date> dates_;
  std::vector<DailyBar> spx_;
  std::vector<DailyBar> vix_;
  std::map<Date, std::vector<OptionQuote>> quotes_;
};

struct AlignResult {
  MarketDataset dataset;
  /// Dates present in some source but not in all three, ascending.
  std::vector<Date> dropped;
};

/// Restricts all three sources to their common trade dates.
inline AlignResult align_calendar(std::span<const OptionQuote> quotes, std::span<const DailyBar> spx,
                                  std::span<const DailyBar> vix) {
  std::set<Date> quote_dates;
  for (const auto& q : quotes) quote_dates.insert(q.trade_date);
  std::set<Date> spx_dates, vix_dates;
  for (const auto& b : spx) spx_dates.insert(b.date);
  for (const auto& b : vix) vix_dates.insert(b.date);

  std::set<Date> all;
  all.insert(quote_dates.begin(), quote_dates.end());
  all.insert(spx_dates.begin(), spx_dates.end());
  all.insert(vix_dates.begin(), vix_dates.end());

  AlignResult result;
  auto& ds = result.dataset;
  for (Date d : all) {
    if (quote_dates.count(d) && spx_dates.count(d) && vix_dates.count(d)) {
      ds.dates_.push_back(d);
    } else {
      result.dropped.push_back(d);
    }
  }
  if (ds.dates_.empty()) throw DataError("option, SPX and VIX data share no trade dates");

  auto keep = [&](std::span<const DailyBar> bars, std::vector<DailyBar>& out) {
    out.reserve(ds.dates_.size());
    for (const auto& b : bars)
      if (std::binary_search(ds.dates_.begin(), ds.dates_.end(), b.date)) out.push_back(b);
    std::sort(out.begin(), out.end(), [](const DailyBar& a, const DailyBar& b) { return a.date < b.date; });
  };
  keep(spx, ds.spx_);
  keep(vix, ds.vix_);
  for (const auto& q : quotes)
    if (std::binary_search(ds.dates_.begin(), ds.dates_.end(), q.trade_date)) ds.quotes_[q.trade_date].push_back(q);
  return result;
}

}  // namespace straddle
