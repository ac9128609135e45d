#pragma once

#include <stdexcept>
#include <string>

namespace lambda4wm {

/// Bad user input: missing or non-physical configuration values, malformed files.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Inputs outside the domain where a closed form is defined.
class DomainError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// A numerical procedure failed: non-convergence, non-finite intermediate values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lambda4wm
