#pragma once

#include <stdexcept>
#include <string>

namespace multispin {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model: bad scope index, table length mismatch, bad probabilities,
/// or a Lipschitz violation on a path that requires an admissible system.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A complex parameter lies outside the disc where the bounds apply.
class InadmissibleError : public Error {
 public:
  using Error::Error;
};

/// Estimated work exceeds a configured ceiling.
class BudgetError : public Error {
 public:
  using Error::Error;
};

/// Input document could not be parsed into a model.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Iterative numerical procedure failed to converge.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace multispin
