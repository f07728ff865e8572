#ifndef SHIQ_ERRORS_HPP_
#define SHIQ_ERRORS_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shiq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A role, atom or individual that is not part of the relevant signature.
class SignatureError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a syntactic restriction (non-simple role
// under a number restriction, reserved name, negative number, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Raised by the engine when a resource budget or a termination bound is
// exceeded. Never a verdict.
class BudgetError : public Error {
 public:
  using Error::Error;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace shiq

#endif  // SHIQ_ERRORS_HPP_
