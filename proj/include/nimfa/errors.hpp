#pragma once

#include <stdexcept>
#include <string>

namespace nimfa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed hypergraph: vertex index out of range, loop where forbidden, bad weight.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Invalid model, generator or reduction parameters.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A rate function returned a negative, non-finite or out-of-bound value.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent inputs handed between modules (horizons, instance mismatch, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A request exceeds a hard size guard.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the given model or hypergraph.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// Integration failed (step size underflow). Carries the time where it happened.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, double time)
      : Error(what + " at t=" + std::to_string(time)), time_(time) {}
  double time() const { return time_; }

 private:
  double time_;
};

}  // namespace nimfa
