#pragma once

#include <stdexcept>
#include <string>

namespace qcdmdp {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed model: non-stochastic kernel, empty action set, mismatched spaces.
class ModelError : public Error {
 public:
  using Error::Error;
};

// Caller passed a value outside an operation's domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Iteration failed to converge or a linear system was singular.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Operation invoked on an object in the wrong state (e.g. stepping a stopped detector).
class StateError : public Error {
 public:
  using Error::Error;
};

}  // namespace qcdmdp
