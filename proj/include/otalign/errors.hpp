#pragma once

#include <stdexcept>
#include <string>

namespace otalign {

// Error taxonomy shared by the library and the CLI. The CLI maps these onto
// its exit-code contract: 2 for input/IO problems, 3 for shape/validation
// problems, 1 for failed checks.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Numeric data violates a value constraint: non-finite entry, out-of-range
// entry, zero-norm token.
class InputError : public Error {
 public:
  using Error::Error;
};

// A configuration parameter violates its own invariant.
class ParamError : public Error {
 public:
  using Error::Error;
};

// Instance exceeds a hard size bound (exact oracle only).
class CapacityError : public Error {
 public:
  using Error::Error;
};

// File or stream failure; message names the offending file and location.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace otalign
