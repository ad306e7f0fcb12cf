#pragma once

#include <stdexcept>
#include <string>

namespace dacrank {

/// Malformed input: a parameter outside its valid range, a bad file, a
/// schema violation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation (e.g. a
/// probability not strictly inside (0, 1)).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Failure of a numerical computation on otherwise valid input.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The benchmark divergence is zero (or not finite), so no agreement ratio
/// can be formed.
class UndefinedRatioError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace dacrank
