#pragma once

#include <functional>
#include <iostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace sindy {

enum class ErrorCode {
  NonMonotonicTime,
  NonFinite,
  ShapeMismatch,
  DimensionMismatch,
  TooFewSamples,
  WindowTooLarge,
  InvalidArgument,
  ArityExceedsDimension,
  NonFiniteFeature,
  DuplicateFeatureName,
  IntegrationBlowup,
  UnserializableLibrary,
  VersionMismatch,
  MissingTime,
  ParseError,
  IoError,
  Unsupported,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonMonotonicTime: return "NonMonotonicTime";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::WindowTooLarge: return "WindowTooLarge";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ArityExceedsDimension: return "ArityExceedsDimension";
    case ErrorCode::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorCode::DuplicateFeatureName: return "DuplicateFeatureName";
    case ErrorCode::IntegrationBlowup: return "IntegrationBlowup";
    case ErrorCode::UnserializableLibrary: return "UnserializableLibrary";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::MissingTime: return "MissingTime";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Unsupported: return "Unsupported";
  }
  return "Unknown";
}

/// Base exception for every failure raised by the library. The code is
/// stable and meant for programmatic dispatch; the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class IntegrationBlowup : public Error {
 public:
  IntegrationBlowup(double last_valid_time, const std::string& message)
      : Error(ErrorCode::IntegrationBlowup, message), last_valid_time_(last_valid_time) {}

  double last_valid_time() const noexcept { return last_valid_time_; }

 private:
  double last_valid_time_;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message)
      : Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + message), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Non-fatal diagnostics (ill-conditioning, SR3 not converged). The default
// sink writes to stderr; tests and embedders may replace it.
using WarningHandler = std::function<void(std::string_view)>;

inline WarningHandler& warning_handler() {
  static WarningHandler handler = [](std::string_view msg) {
    std::cerr << "warning: " << msg << '\n';
  };
  return handler;
}

inline void set_warning_handler(WarningHandler handler) { warning_handler() = std::move(handler); }

inline void warn(std::string_view msg) {
  if (warning_handler()) warning_handler()(msg);
}

/// Swaps the warning handler for the lifetime of the guard.
class ScopedWarningHandler {
 public:
  explicit ScopedWarningHandler(WarningHandler handler) : previous_(warning_handler()) {
    warning_handler() = std::move(handler);
  }
  ~ScopedWarningHandler() { warning_handler() = std::move(previous_); }
  ScopedWarningHandler(const ScopedWarningHandler&) = delete;
  ScopedWarningHandler& operator=(const ScopedWarningHandler&) = delete;

 private:
  WarningHandler previous_;
};

}  // namespace sindy
