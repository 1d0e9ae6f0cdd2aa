#pragma once

#include <stdexcept>
#include <string>

namespace epca {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a value-domain precondition (non-finite entry, negative loss, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Shapes or counts do not line up.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A weighted reduction was requested with weights summing to zero.
class DegenerateWeightsError : public Error {
 public:
  using Error::Error;
};

/// A property the algorithms guarantee did not hold at runtime.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message carries the row/column location.
class IngestionError : public Error {
 public:
  using Error::Error;
};

}  // namespace epca
