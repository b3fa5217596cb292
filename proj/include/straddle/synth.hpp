#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "straddle/data_ingest.hpp"
#include "straddle/date.hpp"
#include "straddle/random.hpp"

namespace straddle {

struct SynthConfig {
  std::uint64_t seed = 1;
  Date start{2011, 11, 1};
  int n_days = 2220;  // trading days
  double spx0 = 1250.0;
  double vix0 = 20.0;
  double vix_mean = 18.0;
  double reversion_speed = 4.0;  // per year
  double vol_of_vol = 0.9;       // proportional, per sqrt(year)
  double spx_vix_correlation = -0.7;
  double annual_drift = 0.07;
  double strike_step = 5.0;
  int strikes_per_side = 8;
  std::vector<int> tenors{7, 14, 28};
};

/// Empty when valid, otherwise the offending field.
inline std::optional<std::string> check_synth_config(const SynthConfig& c) {
  if (c.n_days < 10) return "n_days must be at least 10";
  if (!(c.spx0 > 0.0)) return "spx0 must be positive";
  if (!(c.vix0 >= 0.0) || !(c.vix_mean >= 0.0)) return "vix0 and vix_mean must be non-negative";
  if (!(c.reversion_speed >= 0.0) || !(c.vol_of_vol >= 0.0)) return "reversion_speed and vol_of_vol must be non-negative";
  if (!(c.spx_vix_correlation >= -1.0 && c.spx_vix_correlation <= 0.0)) return "spx_vix_correlation must lie in [-1, 0]";
  if (!(c.strike_step > 0.0)) return "strike_step must be positive";
  if (c.strikes_per_side < 0) return "strikes_per_side must be non-negative";
  if (c.tenors.empty()) return "tenors must not be empty";
  for (int t : c.tenors)
    if (t < 1) return "tenors must be positive day counts";
  return std::nullopt;
}

// ------------------------------------------------------------ calendar

namespace detail {

inline Date nth_weekday(int year, unsigned month, unsigned weekday, int n) {
  Date d(year, month, 1);
  while (d.weekday() != weekday) d = d.plus_days(1);
  return d.plus_days(7L * (n - 1));
}

inline Date last_weekday(int year, unsigned month, unsigned weekday) {
  Date d = YearMonth{year, month}.last_day();
  while (d.weekday() != weekday) d = d.plus_days(-1);
  return d;
}

/// Gregorian Easter Sunday (anonymous algorithm).
inline Date easter(int y) {
  const int a = y % 19, b = y / 100, c = y % 100, d = b / 4, e = b % 4;
  const int f = (b + 8) / 25, g = (b - f + 1) / 3, h = (19 * a + b - d - g + 15) % 30;
  const int i = c / 4, k = c % 4, l = (32 + 2 * e + 2 * i - h - k) % 7;
  const int m = (a + 11 * h + 22 * l) / 451;
  const int month = (h + l - 7 * m + 114) / 31, day = ((h + l - 7 * m + 114) % 31) + 1;
  return Date(y, unsigned(month), unsigned(day));
}

inline Date observed(Date d) {
  if (d.weekday() == 6) return d.plus_days(-1);
  if (d.weekday() == 0) return d.plus_days(1);
  return d;
}

}  // namespace detail

/// NYSE-style full-day holidays of one year.
inline std::set<Date> market_holidays(int year) {
  using detail::nth_weekday;
  std::set<Date> h;
  const Date new_year(year, 1, 1);
  if (new_year.weekday() != 6) h.insert(detail::observed(new_year));
  h.insert(nth_weekday(year, 1, 1, 3));   // Martin Luther King Jr. Day
  h.insert(nth_weekday(year, 2, 1, 3));   // Washington's Birthday
  h.insert(detail::easter(year).plus_days(-2));
  h.insert(detail::last_weekday(year, 5, 1));
  h.insert(detail::observed(Date(year, 7, 4)));
  h.insert(nth_weekday(year, 9, 1, 1));
  h.insert(nth_weekday(year, 11, 4, 4));  // Thanksgiving
  h.insert(detail::observed(Date(year, 12, 25)));
  return h;
}

inline bool is_market_day(Date d) {
  if (d.is_weekend()) return false;
  return !market_holidays(d.year()).count(d);
}

/// `n` consecutive market days starting on or after `start`.
inline std::vector<Date> market_days(Date start, int n) {
  std::vector<Date> out;
  out.reserve(std::size_t(std::max(n, 0)));
  for (Date d = start; int(out.size()) < n; d = d.plus_days(1))
    if (is_market_day(d)) out.push_back(d);
  return out;
}

inline bool is_third_friday(Date d) { return d.weekday() == 5 && d.day() >= 15 && d.day() <= 21; }

// ------------------------------------------------------------- pricing

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// European option value with zero rate and zero dividend yield.
inline double black_scholes(OptionRight right, double spot, double strike, double years, double vol) {
  const double intrinsic =
      right == OptionRight::call ? std::max(spot - strike, 0.0) : std::max(strike - spot, 0.0);
  const double sd = vol * std::sqrt(std::max(years, 0.0));
  if (!(sd > 0.0)) return intrinsic;
  const double d1 = (std::log(spot / strike) + 0.5 * sd * sd) / sd;
  const double d2 = d1 - sd;
  if (right == OptionRight::call) return spot * normal_cdf(d1) - strike * normal_cdf(d2);
  return strike * normal_cdf(-d2) - spot * normal_cdf(-d1);
}

inline double round_cents(double x) { return std::round(x * 100.0) / 100.0; }

// ------------------------------------------------------------ generator

struct SynthMarket {
  std::vector<OptionQuote> quotes;
  std::vector<DailyBar> spx;
  std::vector<DailyBar> vix;
};

/// SPX follows a geometric Brownian motion whose volatility is the VIX
/// proxy / 100; the proxy mean-reverts with proportional shocks correlated
/// with the SPX shocks. Chains list, per trade date and tenor, the first
/// market day at least `tenor` calendar days out.
inline SynthMarket generate_raw_market(const SynthConfig& cfg) {
  if (auto err = check_synth_config(cfg)) throw std::invalid_argument("synth: " + *err);
  constexpr double dt = 1.0 / 252.0;
  const double sq = std::sqrt(dt);
  const double rho = cfg.spx_vix_correlation;
  const double rho_c = std::sqrt(std::max(0.0, 1.0 - rho * rho));

  // Extra days so late trade dates still have listed expiries.
  const int horizon = *std::max_element(cfg.tenors.begin(), cfg.tenors.end());
  const auto days = market_days(cfg.start, cfg.n_days);
  std::vector<Date> listing = market_days(cfg.start, cfg.n_days + horizon);

  Rng rng(mix_seed(cfg.seed, 0));
  Rng book(mix_seed(cfg.seed, 1));
  SynthMarket m;
  double s = cfg.spx0, v = cfg.vix0;
  for (std::size_t t = 0; t < days.size(); ++t) {
    const double s_open = s, v_open = v;
    if (t > 0) {
      const double zv = rng.normal(), zi = rng.normal();
      const double zs = rho * zv + rho_c * zi;
      const double sigma = v / 100.0;
      s *= std::exp((cfg.annual_drift - 0.5 * sigma * sigma) * dt + sigma * sq * zs);
      v = std::max(0.0, v + cfg.reversion_speed * (cfg.vix_mean - v) * dt + cfg.vol_of_vol * v * sq * zv);
    }
    const double sigma = v / 100.0;
    const double s_range = std::abs(rng.normal()) * sigma * sq * 0.5;
    const double v_range = std::abs(rng.normal()) * cfg.vol_of_vol * sq * 0.5;
    DailyBar sb{days[t], round_cents(s_open), 0, 0, round_cents(s)};
    sb.high = round_cents(std::max(s_open, s) * (1.0 + s_range));
    sb.low = round_cents(std::min(s_open, s) * (1.0 - s_range));
    DailyBar vb{days[t], round_cents(v_open), 0, 0, round_cents(v)};
    vb.high = round_cents(std::max(v_open, v) * (1.0 + v_range));
    vb.low = round_cents(std::min(v_open, v) * std::max(0.0, 1.0 - v_range));
    m.spx.push_back(sb);
    m.vix.push_back(vb);

    std::set<Date> expiries;
    for (int tenor : cfg.tenors) {
      const Date target = days[t].plus_days(tenor);
      auto it = std::lower_bound(listing.begin(), listing.end(), target);
      if (it != listing.end()) expiries.insert(*it);
    }
    const double spot = sb.close;
    const double centre = std::round(spot / cfg.strike_step) * cfg.strike_step;
    for (Date expiry : expiries) {
      const double years = double(days[t].days_until(expiry)) / 365.0;
      for (int k = -cfg.strikes_per_side; k <= cfg.strikes_per_side; ++k) {
        const double strike = centre + k * cfg.strike_step;
        if (!(strike > 0.0)) continue;
        for (OptionRight right : {OptionRight::put, OptionRight::call}) {
          const double mid = black_scholes(right, spot, strike, years, sigma);
          const double half = std::max(0.2, 0.01 * mid) / 2.0;
          OptionQuote q;
          q.trade_date = days[t];
          q.expiry_date = expiry;
          q.right = right;
          q.strike = strike;
          q.bid = std::max(0.0, round_cents(mid - half));
          q.ask = round_cents(mid + half);
          q.volume = (long long)book.index(5000);
          q.open_interest = (long long)book.index(50000);
          q.pm_settled = !is_third_friday(expiry);
          m.quotes.push_back(q);
        }
      }
    }
  }
  return m;
}

inline MarketDataset generate_market(const SynthConfig& cfg) {
  auto raw = generate_raw_market(cfg);
  return align_calendar(raw.quotes, raw.spx, raw.vix).dataset;
}

/// Writes options.csv, spx.csv and vix.csv in the ingest formats.
inline void write_synth_csv(const SynthMarket& m, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError("cannot create " + dir.string() + ": " + ec.message());
  write_option_chain((dir / "options.csv").string(), m.quotes);
  write_daily_bars((dir / "spx.csv").string(), m.spx);
  write_daily_bars((dir / "vix.csv").string(), m.vix);
}

}  // namespace straddle
