#pragma once

#include <stdexcept>
#include <string>

namespace odesel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Model-file or expression syntax error, with 1-based source position.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, int line, int column)
      : Error("parse error at line " + std::to_string(line) + ", column " +
              std::to_string(column) + ": " + message),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// Numerical integration failure; carries the time at which the step failed.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& message, double time)
      : Error(message + " (at t = " + std::to_string(time) + ")"), time_(time) {}

  double time() const { return time_; }

 private:
  double time_;
};

/// Maximum-likelihood fit failure (no usable starting point, bad inputs).
class FitError : public Error {
 public:
  using Error::Error;
};

/// A fitted noise variance collapsed to (numerical) zero; downstream test
/// statistics divide by variance estimates and would be meaningless.
class DegenerateFitError : public FitError {
 public:
  using FitError::FitError;
};

/// File reading/writing problems; the message names the offending path.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid user-supplied configuration (bad flag values, dimension mismatch).
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace odesel
