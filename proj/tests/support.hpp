#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "straddle/data_ingest.hpp"

namespace testing_support {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("straddle_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline straddle::DailyBar flat_bar(straddle::Date d, double close) { return {d, close, close, close, close}; }

inline straddle::OptionQuote quote(straddle::Date trade, straddle::Date expiry, straddle::OptionRight right,
                                   double strike, double bid, double ask, bool pm = true) {
  straddle::OptionQuote q;
  q.trade_date = trade;
  q.expiry_date = expiry;
  q.right = right;
  q.strike = strike;
  q.bid = bid;
  q.ask = ask;
  q.volume = 10;
  q.open_interest = 100;
  q.pm_settled = pm;
  return q;
}

/// Business days (Mon-Fri) starting at `start`.
inline std::vector<straddle::Date> weekdays(straddle::Date start, int n) {
  std::vector<straddle::Date> out;
  for (straddle::Date d = start; int(out.size()) < n; d = d.plus_days(1))
    if (!d.is_weekend()) out.push_back(d);
  return out;
}

}  // namespace testing_support
