#pragma once

#include <stdexcept>
#include <string>

namespace qcert {

/// Input data violates a structural requirement (dimensions, symmetry,
/// positivity of constants).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Configuration document could not be parsed or violates the schema.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine produced a non-finite value or failed to converge.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qcert
