#pragma once

#include <stdexcept>
#include <string>

namespace clipope {

/// Base of every error raised by the library. `what()` is a one-line diagnostic.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent arguments (length mismatch, empty dataset, bad dimensions).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Logging propensity is zero where the target policy puts mass.
class OverlapError : public Error {
 public:
  using Error::Error;
};

/// Non-finite intermediate values.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration values (clip constants, repetitions, environment parameters).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Parse failure in a dataset or config file; carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + message), line_(line) {}
  explicit ParseError(const std::string& message) : Error(message), line_(0) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Requested operation is not defined for the given environment kind.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace clipope
