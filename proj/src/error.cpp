#include "finq/error.hpp"

#include <fmt/format.h>

namespace finq {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::DuplicateKey: return "DuplicateKey";
    case ErrorKind::UnknownTicker: return "UnknownTicker";
    case ErrorKind::UnknownMetric: return "UnknownMetric";
    case ErrorKind::InsufficientData: return "InsufficientData";
    case ErrorKind::EmptyRange: return "EmptyRange";
    case ErrorKind::PreconditionViolated: return "PreconditionViolated";
    case ErrorKind::StoreError: return "StoreError";
    case ErrorKind::UnknownFunction: return "UnknownFunction";
    case ErrorKind::MissingParameter: return "MissingParameter";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::RegistrationError: return "RegistrationError";
    case ErrorKind::UnknownCompany: return "UnknownCompany";
    case ErrorKind::LlmProtocolError: return "LlmProtocolError";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::MalformedToolCall: return "MalformedToolCall";
    case ErrorKind::UnknownModel: return "UnknownModel";
    case ErrorKind::MockUnmatched: return "MockUnmatched";
    case ErrorKind::ToolRoundLimitExceeded: return "ToolRoundLimitExceeded";
    case ErrorKind::NoSqlFound: return "NoSqlFound";
    case ErrorKind::MultipleStatements: return "MultipleStatements";
    case ErrorKind::SandboxViolation: return "SandboxViolation";
    case ErrorKind::SqlError: return "SqlError";
    case ErrorKind::ParseFailure: return "ParseFailure";
    case ErrorKind::CountMismatch: return "CountMismatch";
    case ErrorKind::ZeroMse: return "ZeroMse";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::DegenerateVariance: return "DegenerateVariance";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::UsageError: return "UsageError";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorKind kind, std::string message)
    : std::runtime_error(std::move(message)), kind_(kind) {}

Error Error::missing_parameter(std::string name) {
  Error e(ErrorKind::MissingParameter, fmt::format("missing required parameter '{}'", name));
  e.subject_ = std::move(name);
  return e;
}

Error Error::invalid_parameter(std::string name, std::string reason) {
  Error e(ErrorKind::InvalidParameter, fmt::format("invalid parameter '{}': {}", name, reason));
  e.subject_ = std::move(name);
  return e;
}

}  // namespace finq
