#pragma once

#include <stdexcept>
#include <string>

namespace bamesh {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition (bad sizes, non-positive h, ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Non-conforming or otherwise inconsistent mesh connectivity.
class TopologyError : public Error {
 public:
  using Error::Error;
};

/// Degenerate geometry: zero-area triangles, singular patch systems.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. The message carries the offending line number.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

/// Breakdown inside a numerical kernel (NaN, rank deficiency, failed bracket).
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid experiment configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace bamesh
