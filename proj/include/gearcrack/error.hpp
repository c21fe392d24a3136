#pragma once

#include <stdexcept>
#include <string>

namespace gearcrack {

// Base of every error raised by the library. Callers that only need to know
// "something in gearcrack failed" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the region where an operation is defined (e.g. a contact
// position outside the engagement window).
class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

// Invalid numeric input: non-positive masses, zero-power signals, non-finite
// samples and the like.
class DomainError : public Error {
 public:
  using Error::Error;
};

class SingularGeometryError : public Error {
 public:
  using Error::Error;
};

// Integration produced a non-finite state.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace gearcrack
