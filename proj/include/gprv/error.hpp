#pragma once

#include <stdexcept>
#include <string>

namespace gprv {

/// Failure categories. The CLI maps each category onto an exit code.
enum class ErrorKind {
  invalid_input,
  degenerate_projection,
  zero_communality,
  degenerate_variable,
  invalid_correlation,
  insufficient_cases,
  undefined_congruence,
  domain,
  io,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::invalid_input: return "invalid input";
    case ErrorKind::degenerate_projection: return "degenerate projection";
    case ErrorKind::zero_communality: return "zero communality";
    case ErrorKind::degenerate_variable: return "degenerate variable";
    case ErrorKind::invalid_correlation: return "invalid correlation";
    case ErrorKind::insufficient_cases: return "insufficient cases";
    case ErrorKind::undefined_congruence: return "undefined congruence";
    case ErrorKind::domain: return "domain error";
    case ErrorKind::io: return "i/o error";
  }
  return "unknown error";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

  /// 1 = invalid input/config, 2 = numerical failure, 3 = I/O failure.
  int exit_code() const noexcept {
    switch (kind_) {
      case ErrorKind::invalid_input:
      case ErrorKind::insufficient_cases: return 1;
      case ErrorKind::io: return 3;
      default: return 2;
    }
  }

 private:
  ErrorKind kind_;
};

}  // namespace gprv
