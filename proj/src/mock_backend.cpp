#include "finq/mock_backend.hpp"

#include <fstream>

#include <fmt/format.h>

#include "finq/error.hpp"

namespace finq::llm {
namespace {

[[noreturn]] void script_error(const std::string& what) {
  throw Error(ErrorKind::ConfigError, fmt::format("mock script: {}", what));
}

std::optional<std::string> opt_string(const Json& doc, const char* key) {
  if (!doc.contains(key) || doc.at(key).is_null()) return std::nullopt;
  if (!doc.at(key).is_string()) script_error(fmt::format("'{}' must be a string", key));
  return doc.at(key).get<std::string>();
}

MockMatcher parse_matcher(const Json& doc) {
  MockMatcher m;
  if (!doc.is_object()) script_error("'match' must be an object");
  for (const auto& [key, value] : doc.items()) {
    if (key != "role" && key != "equals" && key != "contains" && key != "regex" &&
        key != "has_tools" && key != "model") {
      script_error(fmt::format("unknown matcher field '{}'", key));
    }
  }
  if (auto role = opt_string(doc, "role")) {
    m.role = parse_role(*role);
    if (!m.role) script_error(fmt::format("unknown role '{}'", *role));
  }
  m.equals = opt_string(doc, "equals");
  m.contains = opt_string(doc, "contains");
  m.model = opt_string(doc, "model");
  if (auto re = opt_string(doc, "regex")) {
    m.regex_source = *re;
    try {
      m.regex.emplace(*re, std::regex::ECMAScript);
    } catch (const std::regex_error& e) {
      script_error(fmt::format("bad regex '{}': {}", *re, e.what()));
    }
  }
  if (doc.contains("has_tools")) m.has_tools = doc.at("has_tools").get<bool>();
  return m;
}

MockResponse parse_response(const Json& doc) {
  if (!doc.is_object()) script_error("'response' must be an object");
  MockResponse r;
  if (doc.contains("http_error")) {
    r.kind = MockResponse::Kind::HttpError;
    r.status = doc.at("http_error").get<int>();
    return r;
  }
  if (doc.contains("body")) {
    r.kind = MockResponse::Kind::RawBody;
    r.body = doc.at("body");
    return r;
  }
  if (auto text = opt_string(doc, "text")) r.text = *text;
  if (doc.contains("tool_calls")) {
    r.kind = MockResponse::Kind::ToolCalls;
    for (const auto& c : doc.at("tool_calls")) {
      MockToolCall call;
      call.name = c.at("name").get<std::string>();
      if (c.contains("arguments_raw")) {
        call.arguments_raw = c.at("arguments_raw").get<std::string>();
      } else {
        call.arguments = c.contains("arguments") ? c.at("arguments") : Json::object();
      }
      r.calls.push_back(std::move(call));
    }
    if (r.calls.empty()) script_error("'tool_calls' is empty");
  } else if (!doc.contains("text")) {
    script_error("response needs text, tool_calls, http_error or body");
  }
  return r;
}

bool matches(const MockMatcher& m, const ChatRequest& req) {
  const auto& last = req.messages.back();
  if (m.role && last.role != *m.role) return false;
  if (m.model && req.model != *m.model) return false;
  if (m.has_tools && req.tools.empty() == *m.has_tools) return false;
  if (m.equals && last.content != *m.equals) return false;
  if (m.contains && last.content.find(*m.contains) == std::string::npos) return false;
  if (m.regex && !std::regex_search(last.content, *m.regex)) return false;
  return true;
}

std::string hex8(std::uint64_t h) { return fmt::format("{:016x}", h).substr(0, 12); }

}  // namespace

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

MockBackend::MockBackend(std::vector<MockRule> rules) : rules_(std::move(rules)) {}

MockBackend MockBackend::from_json(const Json& script) {
  if (!script.is_object() || !script.contains("rules") || !script.at("rules").is_array()) {
    script_error("expected an object with a 'rules' array");
  }
  std::vector<MockRule> rules;
  for (const auto& doc : script.at("rules")) {
    MockRule rule;
    rule.name = doc.contains("name") ? doc.at("name").get<std::string>()
                                     : fmt::format("rule-{}", rules.size() + 1);
    rule.match = parse_matcher(doc.contains("match") ? doc.at("match") : Json::object());
    if (!doc.contains("response")) script_error(fmt::format("rule '{}' has no response", rule.name));
    rule.response = parse_response(doc.at("response"));
    if (doc.contains("usage")) {
      const auto& u = doc.at("usage");
      rule.usage = TokenUsage{u.at("prompt_tokens").get<std::int64_t>(),
                              u.at("completion_tokens").get<std::int64_t>()};
      if (rule.usage->prompt_tokens < 0 || rule.usage->completion_tokens < 0) {
        script_error(fmt::format("rule '{}' has negative usage", rule.name));
      }
    }
    if (doc.contains("latency_ms")) rule.latency_ms = doc.at("latency_ms").get<std::int64_t>();
    if (rule.latency_ms < 0) script_error(fmt::format("rule '{}' has negative latency", rule.name));
    rules.push_back(std::move(rule));
  }
  return MockBackend(std::move(rules));
}

MockBackend MockBackend::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, fmt::format("cannot read mock script {}", path.string()));
  try {
    return from_json(Json::parse(in));
  } catch (const Json::exception& e) {
    script_error(fmt::format("{}: {}", path.string(), e.what()));
  }
}

BackendReply MockBackend::send(const Json& request) {
  const auto req = decode_request(request);
  if (req.messages.empty()) throw Error(ErrorKind::LlmProtocolError, "request has no messages");
  const MockRule* rule = nullptr;
  for (const auto& r : rules_) {
    if (matches(r.match, req)) {
      rule = &r;
      break;
    }
  }
  if (rule == nullptr) {
    const auto& last = req.messages.back();
    throw Error(ErrorKind::MockUnmatched,
                fmt::format("no mock rule matches the last {} message: \"{}\"", to_string(last.role),
                            last.content.substr(0, 200)));
  }
  const auto& resp = rule->response;
  if (resp.kind == MockResponse::Kind::HttpError) {
    throw Error(ErrorKind::LlmProtocolError,
                fmt::format("backend returned HTTP {} (scripted by '{}')", resp.status, rule->name));
  }
  BackendReply reply;
  reply.simulated_latency = std::chrono::milliseconds(rule->latency_ms);
  if (resp.kind == MockResponse::Kind::RawBody) {
    reply.body = resp.body;
    return reply;
  }

  const auto request_text = request.dump();
  ChatMessage message = ChatMessage::assistant(resp.text);
  for (std::size_t i = 0; i < resp.calls.size(); ++i) {
    const auto& c = resp.calls[i];
    ToolCall call;
    call.name = c.name;
    call.arguments = c.arguments_raw ? *c.arguments_raw : c.arguments.dump();
    call.id = "call_" + hex8(fnv1a(fmt::format("{}|{}|{}|{}", rule->name, i, call.arguments,
                                               fnv1a(request_text))));
    message.tool_calls.push_back(std::move(call));
  }
  TokenUsage usage;
  if (rule->usage) {
    usage = *rule->usage;
  } else {
    usage.prompt_tokens = estimate_tokens(request_text);
    usage.completion_tokens = estimate_tokens(encode_message(message).dump());
  }
  reply.body = encode_response(message, usage, req.model,
                               "mock-" + hex8(fnv1a(request_text)));
  return reply;
}

}  // namespace finq::llm
