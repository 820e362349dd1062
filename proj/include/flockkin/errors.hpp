#pragma once

#include <stdexcept>
#include <string>

namespace flockkin {

/// Input outside the mathematical domain of an operation (non-finite values,
/// dimension mismatch, size caps).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A model or configuration violates a structural assumption.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Solver invariant broken (e.g. the pivot guard of the transport solver).
class InternalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flockkin
