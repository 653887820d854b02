#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eqcsp {

/// Base class for every error raised by the library.  Input errors (bad
/// syntax, unknown names, kind mismatches) derive from InputError so the CLI
/// can map them onto a distinct exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : InputError("line " + std::to_string(line) + ", column " + std::to_string(column) +
                   ": " + message),
        line_(line),
        column_(column) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Raised when a search-based procedure runs out of its step budget.  Never
/// conflated with unsatisfiability.
class BudgetExhausted : public Error {
 public:
  using Error::Error;
};

}  // namespace eqcsp
