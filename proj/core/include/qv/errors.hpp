#pragma once

#include <stdexcept>
#include <string>

namespace qv {

/// Bad user-supplied configuration (file contents, CLI arguments, spec fields).
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A stated precondition does not hold (e.g. monotonicity certification failed).
struct PreconditionError : std::logic_error {
  using std::logic_error::logic_error;
};

/// Numerical failure at runtime: divergence, degeneracy, non-finite state.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace qv
