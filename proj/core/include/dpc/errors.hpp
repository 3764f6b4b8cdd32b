#pragma once

#include <stdexcept>
#include <string>

namespace dpc {

// Base class for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Incompatible matrix/vector dimensions.
class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(what) {}
};

// Bad data: non-finite cells, malformed CSV, empty input.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what) {}
};

// Invalid options: negative tolerances, impossible lag counts, unknown names.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(what) {}
};

// Singular or near-singular systems, rank deficiency, exact-fit collapse.
class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& what) : Error(what) {}
};

// Failures inside numerical routines (eigensolvers and the like).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what) {}
};

}  // namespace dpc
