#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace straddle {

/// Anything wrong with input data: unreadable files, malformed rows,
/// invariant violations, or market data that cannot support a trade.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed CSV row. `line()` is 1-based and counts the header.
class ParseError : public DataError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A record parsed fine but violates a domain invariant.
class ValidationError : public DataError {
 public:
  using DataError::DataError;
};

/// Invalid experiment configuration (bad field, unknown key, wrong type).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace straddle
