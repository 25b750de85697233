#pragma once

#include <stdexcept>
#include <string>

namespace dispersim {

/// Base class of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Degenerate extents, holes touching the cell boundary, disconnected fluid
/// regions, non-periodic boundary discretizations.
class InvalidGeometry : public Error {
 public:
  using Error::Error;
};

/// Zero or near-zero pivot after partial pivoting.
class SingularSystem : public Error {
 public:
  using Error::Error;
};

/// A caller broke a documented precondition (bad axis, size mismatch, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace dispersim
