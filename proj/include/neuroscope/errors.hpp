#pragma once

#include <stdexcept>
#include <string>

namespace neuroscope {

// Every error raised by the library derives from Error. The CLI maps the
// three concrete kinds onto its exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a format or domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read, or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Caller passed an argument outside the operation's preconditions.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace neuroscope
