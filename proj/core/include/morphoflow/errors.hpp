#pragma once

#include <stdexcept>
#include <string>

namespace morphoflow {

/// File could not be opened, read or written.
class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File opened but its contents do not conform to the declared format.
class ParseError : public std::runtime_error {
public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Caller violated a documented precondition.
class InvalidArgument : public std::invalid_argument {
public:
  explicit InvalidArgument(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Computation left its valid numeric regime (divergence, non-convergence,
/// internal consistency check failed).
class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace morphoflow
