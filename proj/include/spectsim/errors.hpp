#pragma once

#include <stdexcept>
#include <string>

namespace spectsim {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid arguments, inconsistent shapes, or malformed configuration.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// A file on disk does not match its header (truncated, wrong size, bad version).
class CorruptFileError : public Error {
public:
  using Error::Error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) {
    throw ValidationError(message);
  }
}

}  // namespace spectsim
