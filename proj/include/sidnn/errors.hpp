#pragma once

#include <stdexcept>
#include <string>

namespace sidnn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand dimensions do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A configuration value is outside its valid domain.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An operation was invoked on an object in the wrong state (empty tape,
/// empty dataset, ...).
class StateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. Carries the 1-based line number when known.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t line = 0)
      : Error(line == 0 ? message : "line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Training produced a non-finite loss.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

/// Fit percentage is undefined because an output channel is constant.
class UndefinedFitError : public Error {
 public:
  UndefinedFitError(std::size_t channel)
      : Error("fit is undefined for constant output channel " + std::to_string(channel)),
        channel_(channel) {}
  std::size_t channel() const { return channel_; }

 private:
  std::size_t channel_;
};

}  // namespace sidnn
