#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

namespace straddle {

/// Calendar date without time of day.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}
  constexpr Date(int y, unsigned m, unsigned d)
      : days_(std::chrono::year_month_day{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}}) {}

  /// Parses strict ISO-8601 `YYYY-MM-DD`.
  static std::optional<Date> parse(std::string_view text) {
    if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0, d = 0;
    if (!parse_digits(text.substr(0, 4), y) || !parse_digits(text.substr(5, 2), m) ||
        !parse_digits(text.substr(8, 2), d)) {
      return std::nullopt;
    }
    std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
    if (!ymd.ok()) return std::nullopt;
    return Date(std::chrono::sys_days{ymd});
  }

  std::string iso() const {
    const auto ymd = this->ymd();
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(ymd.year()), unsigned(ymd.month()),
                  unsigned(ymd.day()));
    return buf;
  }

  constexpr std::chrono::sys_days sys_days() const { return days_; }
  constexpr std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  constexpr int year() const { return int(ymd().year()); }
  constexpr unsigned month() const { return unsigned(ymd().month()); }
  constexpr unsigned day() const { return unsigned(ymd().day()); }
  /// 0 = Sunday ... 6 = Saturday.
  constexpr unsigned weekday() const { return std::chrono::weekday{days_}.c_encoding(); }
  constexpr bool is_weekend() const { return weekday() == 0 || weekday() == 6; }
  constexpr long serial() const { return days_.time_since_epoch().count(); }

  constexpr Date plus_days(long n) const { return Date(days_ + std::chrono::days{n}); }
  constexpr long days_until(Date later) const { return (later.days_ - days_).count(); }

  friend constexpr bool operator==(Date, Date) = default;
  friend constexpr auto operator<=>(Date a, Date b) { return a.days_ <=> b.days_; }

 private:
  template <typename Int>
  static bool parse_digits(std::string_view s, Int& out) {
    for (char c : s)
      if (c < '0' || c > '9') return false;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
  }

  std::chrono::sys_days days_{};
};

/// A calendar month, used for prequential window boundaries.
struct YearMonth {
  int year = 1970;
  unsigned month = 1;  // 1..12

  static std::optional<YearMonth> parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') return std::nullopt;
    int y = 0;
    unsigned m = 0;
    auto r1 = std::from_chars(text.data(), text.data() + 4, y);
    auto r2 = std::from_chars(text.data() + 5, text.data() + 7, m);
    if (r1.ec != std::errc{} || r1.ptr != text.data() + 4 || r2.ec != std::errc{} ||
        r2.ptr != text.data() + 7 || m < 1 || m > 12) {
      return std::nullopt;
    }
    return YearMonth{y, m};
  }

  static constexpr YearMonth of(Date d) { return {d.year(), d.month()}; }

  constexpr YearMonth plus_months(int n) const {
    const int index = year * 12 + int(month) - 1 + n;
    const int y = index >= 0 ? index / 12 : (index - 11) / 12;
    return {y, unsigned(index - y * 12 + 1)};
  }

  constexpr Date first_day() const { return Date(year, month, 1); }
  constexpr Date last_day() const {
    return Date(std::chrono::sys_days{std::chrono::year{year} / std::chrono::month{month} /
                                      std::chrono::last});
  }

  std::string iso() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u", year, month);
    return buf;
  }

  friend constexpr bool operator==(YearMonth, YearMonth) = default;
  friend constexpr auto operator<=>(YearMonth, YearMonth) = default;
};

}  // namespace straddle
