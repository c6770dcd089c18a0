#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nws {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parse failure; offset is the byte position in the input text.
struct SyntaxError : Error {
  SyntaxError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at byte " + std::to_string(offset) + ")"), offset(offset) {}
  std::size_t offset;
};

struct UndeclaredVariableError : Error {
  UndeclaredVariableError(const std::string& name, std::size_t offset)
      : Error("undeclared variable '" + name + "' (at byte " + std::to_string(offset) + ")"),
        name(name) {}
  std::string name;
};

// Raised when a sampling-based test cannot reach a verdict (e.g. nearly all
// draws landed on poles).
struct InconclusiveError : Error {
  using Error::Error;
};

struct DomainError : Error {
  using Error::Error;
};

struct QuadratureError : Error {
  using Error::Error;
};

struct InversionError : Error {
  using Error::Error;
};

struct InvariantViolation : Error {
  using Error::Error;
};

struct SignMismatchError : Error {
  using Error::Error;
};

struct StepSizeUnderflow : Error {
  StepSizeUnderflow(const std::string& msg, double t_fail)
      : Error(msg + " (t = " + std::to_string(t_fail) + ")"), t_fail(t_fail) {}
  double t_fail;
};

}  // namespace nws
