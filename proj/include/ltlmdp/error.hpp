#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ltlmdp {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (model document, formula, HOA file).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0, std::size_t column = 0)
      : Error(format(what, line, column)), line_(line), column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& what, std::size_t line, std::size_t column) {
    if (line == 0) return what;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what;
  }

  std::size_t line_;
  std::size_t column_;
};

/// A well-formed model that violates a modeling invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A size limit (enumeration cap, automaton state budget) was exceeded.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver did not converge.
class SolverError : public Error {
 public:
  SolverError(const std::string& what, double residual) : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Arguments that do not match the object they are applied to.
class InputError : public Error {
 public:
  using Error::Error;
};

/// A feature of an interchange format that this library does not handle.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

/// A runtime observation that the model says cannot happen.
class ObservationError : public Error {
 public:
  using Error::Error;
};

}  // namespace ltlmdp
