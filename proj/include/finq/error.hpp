#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace finq {

enum class ErrorKind {
  // market-store
  MalformedHeader,
  MalformedRow,
  DuplicateKey,
  UnknownTicker,
  UnknownMetric,
  InsufficientData,
  EmptyRange,
  PreconditionViolated,
  StoreError,
  // query-library
  UnknownFunction,
  MissingParameter,
  InvalidParameter,
  RegistrationError,
  UnknownCompany,
  // llm-protocol
  LlmProtocolError,
  Timeout,
  MalformedToolCall,
  UnknownModel,
  MockUnmatched,
  // assistant-router
  ToolRoundLimitExceeded,
  // sql-baseline
  NoSqlFound,
  MultipleStatements,
  SandboxViolation,
  SqlError,
  // eval-harness
  ParseFailure,
  CountMismatch,
  ZeroMse,
  LengthMismatch,
  DegenerateVariance,
  // cli
  ConfigError,
  UsageError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a kind so callers can classify
/// it without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string message);

  ErrorKind kind() const noexcept { return kind_; }
  /// Offending parameter for MissingParameter / InvalidParameter, else empty.
  const std::string& subject() const noexcept { return subject_; }

  static Error missing_parameter(std::string name);
  static Error invalid_parameter(std::string name, std::string reason);

 private:
  ErrorKind kind_;
  std::string subject_;
};

}  // namespace finq
