#pragma once

#include <stdexcept>
#include <string>

namespace lgl {

// Base for all library errors. The C API maps each subclass to a status code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A caller broke an operation precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN, divergence, or a degenerate normalization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace lgl
