#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcs {

// Argument errors use std::invalid_argument directly; the types below cover
// the remaining failure classes.

/// Malformed input file (CSV, dictionary or matrix container).
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(what), line_(line) {}

  /// 1-based line number for text inputs, 0 when not applicable.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A request whose projected size exceeds a hard budget.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An internal structural invariant does not hold.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mcs
