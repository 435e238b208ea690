#pragma once

#include <stdexcept>
#include <string>

namespace nucleitrace {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An argument violates an operation's precondition (bad sigma, radius, dims).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed, missing or unsupported.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A histogram has a single populated value, so no threshold separates it.
class DegenerateHistogram : public DataError {
 public:
  using DataError::DataError;
};

/// An internal structural invariant was violated (e.g. a broken lineage).
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace nucleitrace
