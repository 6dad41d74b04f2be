#pragma once

#include <stdexcept>
#include <string>

namespace sflr {

/// Bad caller input: out-of-range parameters, mismatched dimensions.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent data (files, grids, labels).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A linear system or iteration produced non-finite values.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sflr
