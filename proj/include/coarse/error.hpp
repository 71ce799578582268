#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace coarse {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Elements or spaces from different descriptors were combined.
class DescriptorMismatch : public Error {
 public:
  using Error::Error;
};

/// Checked 64-bit arithmetic would have wrapped.
class ArithmeticOverflow : public Error {
 public:
  using Error::Error;
};

/// Descriptor / JSON text could not be parsed.
class ParseError : public Error {
 public:
  ParseError(std::string message, std::size_t position, std::string expected)
      : Error(message + " at position " + std::to_string(position) +
              " (expected " + expected + ")"),
        position_(position),
        expected_(std::move(expected)) {}

  std::size_t position() const noexcept { return position_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::size_t position_;
  std::string expected_;
};

/// A search or enumeration hit its element budget. Carries the best lower
/// bound known at the moment of failure (for norm searches) and the limit.
class BudgetExceeded : public Error {
 public:
  BudgetExceeded(std::string what, std::int64_t limit, double lower_bound = 0)
      : Error("budget exceeded: " + what + " (limit " + std::to_string(limit) +
              ")"),
        limit_(limit),
        lower_bound_(lower_bound) {}

  std::int64_t limit() const noexcept { return limit_; }
  double lower_bound() const noexcept { return lower_bound_; }

 private:
  std::int64_t limit_;
  double lower_bound_;
};

/// An element does not lie in any level of the exhaustion below the bound.
class LevelOverflow : public Error {
 public:
  explicit LevelOverflow(std::int64_t bound)
      : Error("level overflow: element not reached within level bound " +
              std::to_string(bound)),
        bound_(bound) {}

  std::int64_t bound() const noexcept { return bound_; }

 private:
  std::int64_t bound_;
};

/// A construction's hypotheses fail (no transversal in S, bad chain, ...).
class ConstructionError : public Error {
 public:
  using Error::Error;
};

}  // namespace coarse
