#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sensorplace {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or configuration. Carries the offending location
/// when one is known (1-based row/column, 0 when not applicable).
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::size_t row = 0,
                      std::size_t column = 0)
      : Error(decorate(what, row, column)), row_(row), column_(column) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string decorate(const std::string& what, std::size_t row,
                              std::size_t column) {
    if (row == 0 && column == 0) return what;
    std::string out = what + " (row " + std::to_string(row);
    if (column != 0) out += ", column " + std::to_string(column);
    return out + ")";
  }

  std::size_t row_;
  std::size_t column_;
};

/// Arguments violate an operation's preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Constraints (or rank collapse) leave fewer candidates than requested.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, std::size_t placed)
      : Error(what), placed_(placed) {}

  /// Number of sensors successfully placed before the search ran dry.
  std::size_t placed() const noexcept { return placed_; }

 private:
  std::size_t placed_;
};

/// Fewer measurements than unknowns in a gappy reconstruction.
class UnderdeterminedError : public Error {
 public:
  using Error::Error;
};

/// Measurement matrix too close to singular to invert.
class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, double condition)
      : Error(what), condition_(condition) {}

  double condition() const noexcept { return condition_; }

 private:
  double condition_;
};

}  // namespace sensorplace
