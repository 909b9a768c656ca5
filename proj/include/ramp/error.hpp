#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ramp {

enum class ErrorCode {
  // goal io
  ParseError,
  SchemaError,
  SemanticError,
  MissingFile,
  IoError,
  // world state
  IllegalEvent,
  // action language
  SortError,
  UndeclaredSymbol,
  NonStratified,
  EmptySort,
  NotApplicable,
  AmbiguousClosure,
  Inconsistent,
  // planning
  NoPlan,
  InvalidInit,
  RefinementFailed,
  StateSpaceTooLarge,
  // execution / harness
  ConfigError,
  MalformedTrace,
  GridError,
  ProtocolError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::SchemaError: return "SCHEMA_ERROR";
    case ErrorCode::SemanticError: return "SEMANTIC_ERROR";
    case ErrorCode::MissingFile: return "MISSING_FILE";
    case ErrorCode::IoError: return "IO_ERROR";
    case ErrorCode::IllegalEvent: return "ILLEGAL_EVENT";
    case ErrorCode::SortError: return "SORT_ERROR";
    case ErrorCode::UndeclaredSymbol: return "UNDECLARED_SYMBOL";
    case ErrorCode::NonStratified: return "NON_STRATIFIED";
    case ErrorCode::EmptySort: return "EMPTY_SORT";
    case ErrorCode::NotApplicable: return "NOT_APPLICABLE";
    case ErrorCode::AmbiguousClosure: return "AMBIGUOUS_CLOSURE";
    case ErrorCode::Inconsistent: return "INCONSISTENT";
    case ErrorCode::NoPlan: return "NO_PLAN";
    case ErrorCode::InvalidInit: return "INVALID_INIT";
    case ErrorCode::RefinementFailed: return "REFINEMENT_FAILED";
    case ErrorCode::StateSpaceTooLarge: return "STATE_SPACE_TOO_LARGE";
    case ErrorCode::ConfigError: return "CONFIG_ERROR";
    case ErrorCode::MalformedTrace: return "MALFORMED_TRACE";
    case ErrorCode::GridError: return "GRID_ERROR";
    case ErrorCode::ProtocolError: return "PROTOCOL_ERROR";
  }
  return "UNKNOWN";
}

/// Exception carrying a stable error code. what() is "<CODE>: <message>".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message) {}

  ErrorCode code() const noexcept { return code_; }
  const std::string& message() const noexcept { return message_; }

  /// True for failures caused by filesystem access rather than bad content.
  bool is_io() const noexcept {
    return code_ == ErrorCode::MissingFile || code_ == ErrorCode::IoError;
  }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace ramp
