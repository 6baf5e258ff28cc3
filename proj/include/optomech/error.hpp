#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optomech {

/// Failure categories raised by the library. The CLI maps each category
/// onto a process exit code (see `exit_code_for`).
enum class ErrorKind {
  InvalidParams,
  InvalidDrive,
  DegenerateModel,
  SingularResponse,
  NoConvergence,
  UnstableState,
  IntegrationFailure,
  UndefinedMetric,
  DegenerateGrid,
  Config,
  Io,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidParams: return "invalid-params";
    case ErrorKind::InvalidDrive: return "invalid-drive";
    case ErrorKind::DegenerateModel: return "degenerate-model";
    case ErrorKind::SingularResponse: return "singular-response";
    case ErrorKind::NoConvergence: return "no-convergence";
    case ErrorKind::UnstableState: return "unstable-state";
    case ErrorKind::IntegrationFailure: return "integration-failure";
    case ErrorKind::UndefinedMetric: return "undefined-metric";
    case ErrorKind::DegenerateGrid: return "degenerate-grid";
    case ErrorKind::Config: return "config";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when time integration cannot continue; carries the last time at
/// which the state was still finite.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& message, double last_valid_time)
      : Error(ErrorKind::IntegrationFailure, message), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

/// Configuration problem with an optional 1-based source line (0 = none).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& message, int line = 0)
      : Error(ErrorKind::Config, line > 0 ? "line " + std::to_string(line) + ": " + message : message),
        line_(line) {}

  int line() const noexcept { return line_; }

 private:
  int line_;
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::InvalidParams:
    case ErrorKind::InvalidDrive:
    case ErrorKind::DegenerateGrid:
      return 2;
    case ErrorKind::Io:
      return 4;
    default:
      return 3;
  }
}

}  // namespace optomech
