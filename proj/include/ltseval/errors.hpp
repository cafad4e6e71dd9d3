#pragma once

#include <stdexcept>
#include <string>

namespace ltseval {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Interpolation requested outside the sampled time range.
class ExtrapolationError : public Error {
 public:
  using Error::Error;
};

// Velocity (or another interior-only quantity) requested at or beyond a
// trajectory boundary.
class BoundaryError : public Error {
 public:
  using Error::Error;
};

// Point configuration does not determine the requested transform.
class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

// Time-offset objective is flat; the data cannot constrain the offset.
class UnobservableOffsetError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

// Malformed file contents (CSV/YAML schema violations).
class SchemaError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ltseval
