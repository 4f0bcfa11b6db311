#pragma once

#include <stdexcept>
#include <string>

namespace gvarsv {

// Base for everything thrown by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// An invariant of a domain type was violated at construction.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent input data (CSV parse failures, missing series).
class DataError : public Error {
 public:
  explicit DataError(const std::string& msg) : Error(msg) {}
};

// Bad user configuration (missing files, inconsistent settings).
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Numerical failure during estimation or simulation (non-finite state,
// singular contemporaneous matrix, rejection cap breached).
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

}  // namespace gvarsv
