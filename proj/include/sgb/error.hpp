#pragma once

#include <stdexcept>
#include <string>

namespace sgb {

/// Invalid grid, basis or experiment configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Bad argument to a numerical routine (empty ensemble, wrong lag set, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Kernel evaluation requested below the resolution of the auxiliary grid.
class SingularityError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

/// Operation that is only defined on some grids (spectral calculus on periodic grids).
class UnsupportedError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A coefficient or parameter violates the standing assumptions of the equation.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Linear algebra failure inside the time stepper.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sgb
