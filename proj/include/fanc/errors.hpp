#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fanc {

/// Caller broke a precondition (shape mismatch, out-of-range argument).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Bad or unusable input data: malformed CSV rows, corrupt checkpoints.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// A computation produced NaN/Inf or otherwise failed numerically.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IntegrationError : public NumericError {
 public:
  explicit IntegrationError(std::size_t step)
      : NumericError("non-finite state at integration step " + std::to_string(step)),
        step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

#define FANC_REQUIRE(cond, msg)                          \
  do {                                                   \
    if (!(cond)) throw ::fanc::ContractViolation(msg);   \
  } while (0)

}  // namespace fanc
