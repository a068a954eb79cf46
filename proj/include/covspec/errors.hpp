#pragma once

#include <stdexcept>
#include <string>

namespace covspec {

/// Bad caller input: malformed expression text, wrong arity, invalid parameter.
struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Problem exceeds the configured dense-matrix budget (or overflows index space).
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Expression violates a model assumption, e.g. a covariance that is not PSD,
/// or a spectral truncation too coarse for the requested accuracy.
struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite data or a failed numeric routine.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Syntax error in DSL text, with byte offset into the source.
struct ParseError : ArgumentError {
  ParseError(const std::string& msg, std::size_t pos)
      : ArgumentError(msg + " (at offset " + std::to_string(pos) + ")"), position(pos) {}
  std::size_t position;
};

}  // namespace covspec
