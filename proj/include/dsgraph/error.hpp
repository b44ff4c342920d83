#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsgraph {

enum class ErrorKind {
  IndexOutOfRange,
  SelfLoop,
  InfeasibleSpec,
  ParseError,
  NoConvergence,
  NegativeEigenvalue,
  EmptySpace,
  ConditionMismatch,
  SpectrumOutOfRange,
  SingularPoint,
  TooLarge,
  RelaxationInfeasible,
  InvalidArgument,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorKind::SelfLoop: return "SelfLoop";
    case ErrorKind::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::NegativeEigenvalue: return "NegativeEigenvalue";
    case ErrorKind::EmptySpace: return "EmptySpace";
    case ErrorKind::ConditionMismatch: return "ConditionMismatch";
    case ErrorKind::SpectrumOutOfRange: return "SpectrumOutOfRange";
    case ErrorKind::SingularPoint: return "SingularPoint";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::RelaxationInfeasible: return "RelaxationInfeasible";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Parse failure; `line()` is 1-based.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorKind::ParseError, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dsgraph
