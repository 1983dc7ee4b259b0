#pragma once

#include <stdexcept>
#include <string>

namespace fibid {

/// Caller violated an operation's precondition (dimension mismatch, missing
/// variable, non-invertible change of variables, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The input is well-formed but outside the mathematical domain of the
/// operation (backward extension with a0 = 0, a seed that is not an F-triple).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The expression is syntactically valid but the recurrence algebra has no
/// rule for it (e.g. a sum whose body mentions its own limit variable).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fibid
