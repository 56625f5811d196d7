#pragma once

#include <stdexcept>
#include <string>

namespace gibbs {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Working precision was not enough to certify a result; retry with more bits.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

// A cached table is too small for the requested entry.
class CapacityError : public Error {
 public:
  using Error::Error;
};

// Parameters outside the range an algorithm is implemented for.
class UnsupportedParameter : public Error {
 public:
  using Error::Error;
};

// Iterative numerics (quadrature, root finding) failed to converge.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gibbs
