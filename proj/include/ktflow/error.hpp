#pragma once

#include <stdexcept>
#include <string>

namespace ktflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (bad degree, non-finite samples, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Metric data fails r > 0, s > 0 or rs - |u|^2 > 0.
class PositivityError : public Error {
 public:
  using Error::Error;
};

/// A 2-form is not of the shape r e12 + s e34 + u1 (e13 + e24) + u2 (e14 - e23).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Operation requires a pluriclosed metric (spatially constant s).
class NotPluriclosed : public Error {
 public:
  using Error::Error;
};

/// Configuration, snapshot or profile file could not be used.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ktflow
