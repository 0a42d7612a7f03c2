#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finq/decimal.hpp"
#include "finq/json.hpp"

namespace finq::llm {

enum class Role { System, User, Assistant, Tool };
std::string_view to_string(Role r);
std::optional<Role> parse_role(std::string_view text);

/// Wire form of a tool call: the arguments stay the raw string the model
/// produced until parse_tool_calls turns them into a document.
struct ToolCall {
  std::string id;
  std::string name;
  std::string arguments;
  friend bool operator==(const ToolCall&, const ToolCall&) = default;
};

struct ChatMessage {
  Role role = Role::User;
  std::string content;
  std::optional<std::string> tool_call_id;  // role == Tool
  std::vector<ToolCall> tool_calls;         // role == Assistant

  static ChatMessage system(std::string text);
  static ChatMessage user(std::string text);
  static ChatMessage assistant(std::string text, std::vector<ToolCall> calls = {});
  static ChatMessage tool(std::string call_id, std::string text);
  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct ToolSpec {
  std::string name;
  std::string description;
  Json parameters;
  friend bool operator==(const ToolSpec&, const ToolSpec&) = default;
};

enum class ToolChoice { Auto, None, Required };
std::string_view to_string(ToolChoice c);

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  std::vector<ToolSpec> tools;
  ToolChoice tool_choice = ToolChoice::Auto;
  std::optional<double> temperature = 0.0;
  friend bool operator==(const ChatRequest&, const ChatRequest&) = default;
};

struct TokenUsage {
  std::int64_t prompt_tokens = 0;
  std::int64_t completion_tokens = 0;

  std::int64_t total() const { return prompt_tokens + completion_tokens; }
  TokenUsage& operator+=(const TokenUsage& o) {
    prompt_tokens += o.prompt_tokens;
    completion_tokens += o.completion_tokens;
    return *this;
  }
  friend TokenUsage operator+(TokenUsage a, const TokenUsage& b) { return a += b; }
  friend bool operator==(const TokenUsage&, const TokenUsage&) = default;
};

struct ToolCallRequest {
  std::string id;
  std::string function;
  Json arguments;
  friend bool operator==(const ToolCallRequest&, const ToolCallRequest&) = default;
};

struct CompletionResult {
  ChatMessage message;
  TokenUsage usage;
  std::chrono::nanoseconds latency{0};
  std::string finish_reason;
  Json raw;  // the decoded response document

  bool has_tool_calls() const { return !message.tool_calls.empty(); }
};

// Wire codec shared by the live client, the mock and the service. Encoding
// and decoding are inverse on valid documents.
Json encode_message(const ChatMessage& m);
ChatMessage decode_message(const Json& doc);
Json encode_request(const ChatRequest& r);
ChatRequest decode_request(const Json& doc);
Json encode_response(const ChatMessage& message, const TokenUsage& usage, std::string_view model,
                     std::string_view response_id);
/// Throws LlmProtocolError when the document is not a chat completion.
CompletionResult decode_response(const Json& doc);

/// One request per tool_calls entry of choices[0].message, with the argument
/// string parsed. Throws MalformedToolCall on unparseable arguments.
std::vector<ToolCallRequest> parse_tool_calls(const Json& response);
std::vector<ToolCallRequest> parse_tool_calls(const ChatMessage& message);

struct BackendReply {
  Json body;
  /// Set by scripted backends so that recorded latencies are reproducible;
  /// live backends leave it empty and the measured time is used.
  std::optional<std::chrono::nanoseconds> simulated_latency;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  /// Sends one encoded request and returns the response document.
  virtual BackendReply send(const Json& request) = 0;
  /// True when latencies come from a script rather than a clock.
  virtual bool simulated_timing() const { return false; }
};

struct ChatOptions {
  ToolChoice tool_choice = ToolChoice::Auto;
  std::optional<double> temperature = 0.0;
};

CompletionResult chat_complete(ChatBackend& backend, std::string_view model,
                               const std::vector<ChatMessage>& messages,
                               const std::vector<ToolSpec>& tools, const ChatOptions& options = {});

/// Usage and latency totals of one experiment worker.
class UsageSession {
 public:
  void add(const TokenUsage& usage, std::chrono::nanoseconds latency = {});
  const TokenUsage& totals() const { return totals_; }
  std::chrono::nanoseconds latency() const { return latency_; }
  std::size_t calls() const { return calls_; }

 private:
  TokenUsage totals_;
  std::chrono::nanoseconds latency_{0};
  std::size_t calls_ = 0;
};

const TokenUsage& accumulate_usage(UsageSession& session, const TokenUsage& usage);

/// Prices per one million tokens.
struct ModelRates {
  Decimal input_per_1m;
  Decimal output_per_1m;
};

class RateCard {
 public:
  RateCard() = default;
  explicit RateCard(std::map<std::string, ModelRates, std::less<>> rates);
  /// CSV with header model_id,input_rate_per_1m,output_rate_per_1m.
  static RateCard load(std::istream& csv);
  static RateCard load_file(const std::filesystem::path& path);

  /// Throws UnknownModel.
  const ModelRates& rates(std::string_view model) const;
  bool contains(std::string_view model) const;
  const std::map<std::string, ModelRates, std::less<>>& entries() const { return rates_; }

 private:
  std::map<std::string, ModelRates, std::less<>> rates_;
};

/// prompt_tokens * input rate + completion_tokens * output rate, exact.
Money cost(const TokenUsage& usage, const RateCard& card, std::string_view model);
Money cost(const TokenUsage& usage, const ModelRates& rates);

/// Rough token estimate used when a script omits usage: ceil(bytes / 4).
std::int64_t estimate_tokens(std::string_view text);

}  // namespace finq::llm
