#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include "finq/json.hpp"
#include "finq/llm_protocol.hpp"

namespace finq::llm {

/// Conditions on the request; every present field must hold. Text
/// conditions look at the content of the last message.
struct MockMatcher {
  std::optional<Role> role;
  std::optional<std::string> equals;
  std::optional<std::string> contains;
  std::optional<std::string> regex_source;
  std::optional<bool> has_tools;
  std::optional<std::string> model;
  std::optional<std::regex> regex;
};

struct MockToolCall {
  std::string name;
  Json arguments;                            // serialized onto the wire
  std::optional<std::string> arguments_raw;  // sent verbatim, may be malformed
};

struct MockResponse {
  enum class Kind { Text, ToolCalls, HttpError, RawBody };
  Kind kind = Kind::Text;
  std::string text;
  std::vector<MockToolCall> calls;
  int status = 0;  // HttpError
  Json body;       // RawBody
};

struct MockRule {
  std::string name;
  MockMatcher match;
  MockResponse response;
  std::optional<TokenUsage> usage;  // estimated from sizes when absent
  std::int64_t latency_ms = 0;
};

/// Scripted chat backend: the first rule whose matcher accepts the request
/// answers it. Unmatched requests raise MockUnmatched; there is no fallback.
/// Identical requests always produce identical responses.
class MockBackend : public ChatBackend {
 public:
  explicit MockBackend(std::vector<MockRule> rules);
  static MockBackend from_json(const Json& script);
  static MockBackend load_file(const std::filesystem::path& path);

  BackendReply send(const Json& request) override;
  bool simulated_timing() const override { return true; }

  const std::vector<MockRule>& rules() const { return rules_; }

 private:
  std::vector<MockRule> rules_;
};

/// FNV-1a 64-bit, used for deterministic ids.
std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);

}  // namespace finq::llm
