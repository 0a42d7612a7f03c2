#include "finq/llm_protocol.hpp"

#include <fstream>

#include <fmt/format.h>

#include "finq/csv.hpp"
#include "finq/error.hpp"

namespace finq::llm {
namespace {

[[noreturn]] void protocol_error(const std::string& what) {
  throw Error(ErrorKind::LlmProtocolError, what);
}

const Json& require(const Json& doc, std::string_view key, std::string_view where) {
  if (!doc.is_object() || !doc.contains(key)) {
    protocol_error(fmt::format("{} lacks '{}'", where, key));
  }
  return doc.at(std::string(key));
}

std::int64_t usage_field(const Json& usage, const char* key) {
  if (!usage.contains(key) || usage.at(key).is_null()) return 0;
  const auto& v = usage.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) {
    protocol_error(fmt::format("usage.{} is not a non-negative integer", key));
  }
  return v.get<std::int64_t>();
}

}  // namespace

std::string_view to_string(Role r) {
  switch (r) {
    case Role::System: return "system";
    case Role::User: return "user";
    case Role::Assistant: return "assistant";
    case Role::Tool: return "tool";
  }
  return "user";
}

std::optional<Role> parse_role(std::string_view text) {
  if (text == "system") return Role::System;
  if (text == "user") return Role::User;
  if (text == "assistant") return Role::Assistant;
  if (text == "tool") return Role::Tool;
  return std::nullopt;
}

std::string_view to_string(ToolChoice c) {
  switch (c) {
    case ToolChoice::Auto: return "auto";
    case ToolChoice::None: return "none";
    case ToolChoice::Required: return "required";
  }
  return "auto";
}

ChatMessage ChatMessage::system(std::string text) { return {Role::System, std::move(text), {}, {}}; }
ChatMessage ChatMessage::user(std::string text) { return {Role::User, std::move(text), {}, {}}; }
ChatMessage ChatMessage::assistant(std::string text, std::vector<ToolCall> calls) {
  return {Role::Assistant, std::move(text), {}, std::move(calls)};
}
ChatMessage ChatMessage::tool(std::string call_id, std::string text) {
  return {Role::Tool, std::move(text), std::move(call_id), {}};
}

Json encode_message(const ChatMessage& m) {
  Json doc;
  doc["role"] = to_string(m.role);
  if (m.role == Role::Assistant && !m.tool_calls.empty() && m.content.empty()) {
    doc["content"] = nullptr;
  } else {
    doc["content"] = m.content;
  }
  if (m.tool_call_id) doc["tool_call_id"] = *m.tool_call_id;
  if (!m.tool_calls.empty()) {
    auto& calls = doc["tool_calls"] = Json::array();
    for (const auto& c : m.tool_calls) {
      Json call;
      call["id"] = c.id;
      call["type"] = "function";
      call["function"] = {{"name", c.name}, {"arguments", c.arguments}};
      calls.push_back(std::move(call));
    }
  }
  return doc;
}

ChatMessage decode_message(const Json& doc) {
  ChatMessage m;
  const auto& role = require(doc, "role", "message");
  if (!role.is_string()) protocol_error("message role is not a string");
  auto r = parse_role(role.get<std::string>());
  if (!r) protocol_error(fmt::format("unknown role '{}'", role.get<std::string>()));
  m.role = *r;
  if (doc.contains("content")) {
    const auto& c = doc.at("content");
    if (c.is_string()) {
      m.content = c.get<std::string>();
    } else if (!c.is_null()) {
      protocol_error("message content is neither text nor null");
    }
  }
  if (doc.contains("tool_call_id") && !doc.at("tool_call_id").is_null()) {
    m.tool_call_id = doc.at("tool_call_id").get<std::string>();
  }
  if (doc.contains("tool_calls") && !doc.at("tool_calls").is_null()) {
    const auto& calls = doc.at("tool_calls");
    if (!calls.is_array()) protocol_error("tool_calls is not an array");
    for (const auto& c : calls) {
      const auto& fn = require(c, "function", "tool call");
      ToolCall call;
      call.id = c.contains("id") && c.at("id").is_string() ? c.at("id").get<std::string>() : "";
      const auto& name = require(fn, "name", "tool call function");
      if (!name.is_string()) protocol_error("tool call name is not a string");
      call.name = name.get<std::string>();
      if (fn.contains("arguments")) {
        const auto& a = fn.at("arguments");
        // Some servers send the arguments as an object instead of a string.
        call.arguments = a.is_string() ? a.get<std::string>() : a.dump();
      }
      m.tool_calls.push_back(std::move(call));
    }
  }
  if (m.role == Role::Tool && !m.tool_call_id) protocol_error("tool message lacks tool_call_id");
  return m;
}

Json encode_request(const ChatRequest& r) {
  Json doc;
  doc["model"] = r.model;
  auto& msgs = doc["messages"] = Json::array();
  for (const auto& m : r.messages) msgs.push_back(encode_message(m));
  if (!r.tools.empty()) {
    auto& tools = doc["tools"] = Json::array();
    for (const auto& t : r.tools) {
      Json fn;
      fn["name"] = t.name;
      fn["description"] = t.description;
      fn["parameters"] = t.parameters;
      tools.push_back(Json{{"type", "function"}, {"function", std::move(fn)}});
    }
    doc["tool_choice"] = to_string(r.tool_choice);
  }
  if (r.temperature) doc["temperature"] = *r.temperature;
  return doc;
}

ChatRequest decode_request(const Json& doc) {
  ChatRequest r;
  const auto& model = require(doc, "model", "request");
  if (!model.is_string()) protocol_error("request model is not a string");
  r.model = model.get<std::string>();
  const auto& msgs = require(doc, "messages", "request");
  if (!msgs.is_array()) protocol_error("request messages is not an array");
  for (const auto& m : msgs) r.messages.push_back(decode_message(m));
  if (doc.contains("tools")) {
    for (const auto& t : doc.at("tools")) {
      const auto& fn = require(t, "function", "tool");
      ToolSpec spec;
      spec.name = require(fn, "name", "tool function").get<std::string>();
      if (fn.contains("description")) spec.description = fn.at("description").get<std::string>();
      if (fn.contains("parameters")) spec.parameters = fn.at("parameters");
      r.tools.push_back(std::move(spec));
    }
  }
  if (doc.contains("tool_choice") && doc.at("tool_choice").is_string()) {
    const auto c = doc.at("tool_choice").get<std::string>();
    if (c == "none") r.tool_choice = ToolChoice::None;
    if (c == "required") r.tool_choice = ToolChoice::Required;
  }
  if (doc.contains("temperature") && doc.at("temperature").is_number()) {
    r.temperature = doc.at("temperature").get<double>();
  } else {
    r.temperature = std::nullopt;
  }
  return r;
}

Json encode_response(const ChatMessage& message, const TokenUsage& usage, std::string_view model,
                     std::string_view response_id) {
  Json doc;
  doc["id"] = response_id;
  doc["object"] = "chat.completion";
  doc["model"] = model;
  Json choice;
  choice["index"] = 0;
  choice["message"] = encode_message(message);
  choice["finish_reason"] = message.tool_calls.empty() ? "stop" : "tool_calls";
  doc["choices"] = Json::array({std::move(choice)});
  doc["usage"] = {{"prompt_tokens", usage.prompt_tokens},
                  {"completion_tokens", usage.completion_tokens},
                  {"total_tokens", usage.total()}};
  return doc;
}

CompletionResult decode_response(const Json& doc) {
  if (!doc.is_object()) protocol_error("response body is not a JSON object");
  if (doc.contains("error") && !doc.at("error").is_null()) {
    protocol_error(fmt::format("backend reported an error: {}", doc.at("error").dump()));
  }
  const auto& choices = require(doc, "choices", "response");
  if (!choices.is_array() || choices.empty()) protocol_error("response has no choices");
  const auto& first = choices.at(0);
  CompletionResult out;
  out.message = decode_message(require(first, "message", "choice"));
  if (out.message.role != Role::Assistant) protocol_error("choice message is not from the assistant");
  if (first.contains("finish_reason") && first.at("finish_reason").is_string()) {
    out.finish_reason = first.at("finish_reason").get<std::string>();
  }
  if (doc.contains("usage") && doc.at("usage").is_object()) {
    const auto& u = doc.at("usage");
    out.usage.prompt_tokens = usage_field(u, "prompt_tokens");
    out.usage.completion_tokens = usage_field(u, "completion_tokens");
  }
  out.raw = doc;
  return out;
}

std::vector<ToolCallRequest> parse_tool_calls(const ChatMessage& message) {
  std::vector<ToolCallRequest> out;
  for (const auto& c : message.tool_calls) {
    ToolCallRequest req;
    req.id = c.id;
    req.function = c.name;
    try {
      req.arguments = c.arguments.empty() ? Json::object() : Json::parse(c.arguments);
    } catch (const Json::parse_error& e) {
      throw Error(ErrorKind::MalformedToolCall,
                  fmt::format("arguments of {} are not valid JSON: {}", c.name, e.what()));
    }
    out.push_back(std::move(req));
  }
  return out;
}

std::vector<ToolCallRequest> parse_tool_calls(const Json& response) {
  return parse_tool_calls(decode_response(response).message);
}

CompletionResult chat_complete(ChatBackend& backend, std::string_view model,
                               const std::vector<ChatMessage>& messages,
                               const std::vector<ToolSpec>& tools, const ChatOptions& options) {
  if (messages.empty()) {
    throw Error(ErrorKind::PreconditionViolated, "chat_complete needs at least one message");
  }
  ChatRequest request;
  request.model = std::string(model);
  request.messages = messages;
  request.tools = tools;
  request.tool_choice = options.tool_choice;
  request.temperature = options.temperature;
  const auto body = encode_request(request);

  const auto started = std::chrono::steady_clock::now();
  auto reply = backend.send(body);
  const auto measured = std::chrono::steady_clock::now() - started;

  auto result = decode_response(reply.body);
  result.latency = reply.simulated_latency
                       ? *reply.simulated_latency
                       : std::chrono::duration_cast<std::chrono::nanoseconds>(measured);
  return result;
}

void UsageSession::add(const TokenUsage& usage, std::chrono::nanoseconds latency) {
  totals_ += usage;
  latency_ += latency;
  ++calls_;
}

const TokenUsage& accumulate_usage(UsageSession& session, const TokenUsage& usage) {
  session.add(usage);
  return session.totals();
}

RateCard::RateCard(std::map<std::string, ModelRates, std::less<>> rates)
    : rates_(std::move(rates)) {}

RateCard RateCard::load(std::istream& csv) {
  CsvReader reader(csv);
  std::vector<std::string> fields;
  if (!reader.next(fields) ||
      fields != std::vector<std::string>{"model_id", "input_rate_per_1m", "output_rate_per_1m"}) {
    throw Error(ErrorKind::MalformedHeader,
                "rate card header must be model_id,input_rate_per_1m,output_rate_per_1m");
  }
  std::map<std::string, ModelRates, std::less<>> rates;
  while (reader.next(fields)) {
    if (fields.size() != 3) {
      throw Error(ErrorKind::MalformedRow,
                  fmt::format("rate card line {}: expected 3 fields", reader.line_number()));
    }
    auto in = Decimal::parse(fields[1]);
    auto out = Decimal::parse(fields[2]);
    if (fields[0].empty() || !in || !out || *in < Decimal{} || *out < Decimal{}) {
      throw Error(ErrorKind::MalformedRow,
                  fmt::format("rate card line {}: bad entry", reader.line_number()));
    }
    if (!rates.emplace(fields[0], ModelRates{*in, *out}).second) {
      throw Error(ErrorKind::DuplicateKey,
                  fmt::format("rate card lists '{}' twice", fields[0]));
    }
  }
  return RateCard(std::move(rates));
}

RateCard RateCard::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read {}", path.string()));
  return load(in);
}

const ModelRates& RateCard::rates(std::string_view model) const {
  auto it = rates_.find(model);
  if (it == rates_.end()) {
    throw Error(ErrorKind::UnknownModel, fmt::format("no rate card entry for model '{}'", model));
  }
  return it->second;
}

bool RateCard::contains(std::string_view model) const { return rates_.find(model) != rates_.end(); }

Money cost(const TokenUsage& usage, const ModelRates& rates) {
  // A rate of r per 1e6 tokens is r.scaled() micro-units per 1e6 tokens, so
  // each token costs r.scaled() picodollars.
  __int128 pico = static_cast<__int128>(usage.prompt_tokens) * rates.input_per_1m.scaled() +
                  static_cast<__int128>(usage.completion_tokens) * rates.output_per_1m.scaled();
  if (pico > INT64_MAX || pico < INT64_MIN) {
    throw Error(ErrorKind::PreconditionViolated, "cost exceeds the representable range");
  }
  return Money::from_pico(static_cast<std::int64_t>(pico));
}

Money cost(const TokenUsage& usage, const RateCard& card, std::string_view model) {
  return cost(usage, card.rates(model));
}

std::int64_t estimate_tokens(std::string_view text) {
  return static_cast<std::int64_t>((text.size() + 3) / 4);
}

}  // namespace finq::llm
