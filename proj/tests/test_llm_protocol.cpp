#include <gtest/gtest.h>
#include <httplib.h>

#include <random>
#include <sstream>
#include <thread>

#include "finq/error.hpp"
#include "finq/http_backend.hpp"
#include "finq/llm_protocol.hpp"
#include "finq/mock_backend.hpp"

using namespace finq;
using namespace finq::llm;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::StoreError;
}

MockBackend scripted() {
  return MockBackend::from_json(Json::parse(R"({"rules": [
    {"name": "answer", "match": {"role": "user", "equals": "What is six times seven?"},
     "response": {"text": "42"}, "usage": {"prompt_tokens": 10, "completion_tokens": 1},
     "latency_ms": 250},
    {"name": "nvda", "match": {"role": "user", "contains": "NVIDIA", "has_tools": true},
     "response": {"tool_calls": [{"name": "get_stock_price", "arguments": {"ticker": "NVDA", "n_days": 10}}]},
     "usage": {"prompt_tokens": 300, "completion_tokens": 20}},
    {"name": "broken", "match": {"regex": "^broken"},
     "response": {"tool_calls": [{"name": "get_stock_price", "arguments_raw": "{\"ticker\": \"NVDA\""}]}},
    {"name": "down", "match": {"equals": "fail"}, "response": {"http_error": 500}},
    {"name": "estimate", "match": {"equals": "estimate me"}, "response": {"text": "ok"}}
  ]})"));
}

ToolSpec price_tool() {
  return {"get_stock_price", "prices",
          Json::parse(R"({"type":"object","properties":{"ticker":{"type":"string"}},"required":["ticker"]})")};
}

}  // namespace

TEST(Mock, ScriptedTextAndUsage) {
  auto mock = scripted();
  const auto r = chat_complete(mock, "mock-model", {ChatMessage::user("What is six times seven?")}, {});
  EXPECT_EQ(r.message.content, "42");
  EXPECT_FALSE(r.has_tool_calls());
  EXPECT_EQ(r.usage, (TokenUsage{10, 1}));
  EXPECT_EQ(r.latency, std::chrono::milliseconds(250));
}

TEST(Mock, ScriptedToolCallParses) {
  auto mock = scripted();
  const auto r = chat_complete(mock, "mock-model",
                               {ChatMessage::system("s"), ChatMessage::user("Latest NVIDIA closes?")},
                               {price_tool()});
  const auto calls = parse_tool_calls(r.message);
  ASSERT_EQ(calls.size(), 1u);
  EXPECT_EQ(calls[0].function, "get_stock_price");
  EXPECT_EQ(calls[0].arguments, Json::parse(R"({"ticker":"NVDA","n_days":10})"));
  EXPECT_FALSE(calls[0].id.empty());
  // has_tools=true does not match a request without tools.
  EXPECT_EQ(kind_of([&] { chat_complete(mock, "m", {ChatMessage::user("NVIDIA?")}, {}); }),
            ErrorKind::MockUnmatched);
}

TEST(Mock, ErrorsAndMalformedArguments) {
  auto mock = scripted();
  EXPECT_EQ(kind_of([&] { chat_complete(mock, "m", {ChatMessage::user("fail")}, {}); }),
            ErrorKind::LlmProtocolError);
  EXPECT_EQ(kind_of([&] { chat_complete(mock, "m", {ChatMessage::user("unscripted")}, {}); }),
            ErrorKind::MockUnmatched);
  const auto r = chat_complete(mock, "m", {ChatMessage::user("broken call")}, {});
  EXPECT_EQ(kind_of([&] { parse_tool_calls(r.message); }), ErrorKind::MalformedToolCall);
  EXPECT_EQ(kind_of([&] { parse_tool_calls(r.raw); }), ErrorKind::MalformedToolCall);
}

TEST(Mock, UsageEstimatedWhenUnscripted) {
  auto mock = scripted();
  const std::vector<ChatMessage> msgs{ChatMessage::user("estimate me")};
  const auto request = encode_request(ChatRequest{"m", msgs, {}, ToolChoice::Auto, 0.0});
  const auto reply = mock.send(request);
  const auto r = decode_response(reply.body);
  EXPECT_EQ(r.usage.prompt_tokens, static_cast<std::int64_t>((request.dump().size() + 3) / 4));
  EXPECT_GT(r.usage.completion_tokens, 0);
}

TEST(Mock, BadScriptsAreConfigErrors) {
  EXPECT_EQ(kind_of([] { MockBackend::from_json(Json::parse(R"({"rules": [{"match": {"colour": "red"}, "response": {"text": "x"}}]})")); }),
            ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { MockBackend::from_json(Json::parse(R"({"rules": [{"match": {"regex": "("}, "response": {"text": "x"}}]})")); }),
            ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { MockBackend::from_json(Json::parse(R"({"rules": [{"match": {"role": "robot"}, "response": {"text": "x"}}]})")); }),
            ErrorKind::ConfigError);
  EXPECT_EQ(kind_of([] { MockBackend::load_file("/nonexistent/mock.json"); }), ErrorKind::ConfigError);
}

TEST(MockProperty, IdenticalRequestsGiveIdenticalBytes) {
  auto a = scripted();
  auto b = scripted();
  const std::vector<std::vector<ChatMessage>> convs{
      {ChatMessage::user("What is six times seven?")},
      {ChatMessage::system("x"), ChatMessage::user("Show NVIDIA")},
      {ChatMessage::user("estimate me")},
      {ChatMessage::user("broken again")}};
  for (const auto& c : convs) {
    const auto tools = c.size() > 1 ? std::vector<ToolSpec>{price_tool()} : std::vector<ToolSpec>{};
    const auto req = encode_request(ChatRequest{"m", c, tools, ToolChoice::Auto, 0.0});
    for (int i = 0; i < 5; ++i) {
      const auto x = a.send(req);
      const auto y = b.send(req);
      EXPECT_EQ(x.body.dump(), y.body.dump());
      EXPECT_EQ(x.simulated_latency, y.simulated_latency);
    }
  }
}

TEST(Codec, ParseToolCallsOnRawDocuments) {
  Json none = encode_response(ChatMessage::assistant("hi"), {1, 1}, "m", "r1");
  EXPECT_TRUE(parse_tool_calls(none).empty());
  Json one = encode_response(
      ChatMessage::assistant("", {{"c1", "get_stock_price", R"({"ticker":"NVDA","n_days":10})"}}), {1, 1}, "m", "r2");
  const auto calls = parse_tool_calls(one);
  ASSERT_EQ(calls.size(), 1u);
  EXPECT_EQ(calls[0].arguments.at("n_days"), 10);
  EXPECT_EQ(calls[0].id, "c1");
  EXPECT_EQ(kind_of([] { decode_response(Json::parse(R"({"choices": []})")); }), ErrorKind::LlmProtocolError);
  EXPECT_EQ(kind_of([] { decode_response(Json::parse(R"({"error": "x"})")); }), ErrorKind::LlmProtocolError);
}

TEST(CodecProperty, RequestAndMessageRoundTrip) {
  std::mt19937 rng(5);
  auto text = [&] {
    static const std::vector<std::string> pieces{"a", "bc", "XYZ", " ", "0123", "{}", "\"", "\\", "\n",
                                                 "\t", "'", "é", "€", "🙂"};
    std::string s;
    const int n = std::uniform_int_distribution<int>(0, 30)(rng);
    for (int i = 0; i < n; ++i) s += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
    return s;
  };
  for (int i = 0; i < 300; ++i) {
    ChatRequest req;
    req.model = "model-" + std::to_string(i % 7);
    req.temperature = i % 4 == 0 ? std::optional<double>{} : std::optional<double>{0.0};
    req.messages.push_back(ChatMessage::system(text()));
    req.messages.push_back(ChatMessage::user(text()));
    std::vector<ToolCall> calls;
    for (int k = 0; k < i % 3; ++k) calls.push_back({"id" + std::to_string(k), "fn" + std::to_string(k), R"({"a":1})"});
    req.messages.push_back(ChatMessage::assistant(text(), calls));
    for (const auto& c : calls) req.messages.push_back(ChatMessage::tool(c.id, text()));
    // tool_choice is only meaningful, and only sent, alongside tools
    if (i % 2) {
      req.tools.push_back(price_tool());
      req.tool_choice = static_cast<ToolChoice>(i % 3);
    }
    const auto doc = encode_request(req);
    EXPECT_EQ(decode_request(doc), req);
    EXPECT_EQ(encode_request(decode_request(doc)), doc);
    for (const auto& m : req.messages) EXPECT_EQ(decode_message(encode_message(m)), m);
    const auto resp = encode_response(req.messages[2], {i, 2 * i}, req.model, "r");
    const auto back = decode_response(resp);
    EXPECT_EQ(back.message, req.messages[2]);
    EXPECT_EQ(back.usage, (TokenUsage{i, 2 * i}));
  }
}

TEST(Usage, Accumulation) {
  UsageSession s;
  EXPECT_EQ(accumulate_usage(s, {100, 20}), (TokenUsage{100, 20}));
  EXPECT_EQ(accumulate_usage(s, {50, 5}), (TokenUsage{150, 25}));
  EXPECT_EQ(s.calls(), 2u);
}

TEST(UsageProperty, SumsAreExact) {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<std::int64_t> tok(0, 2'000'000);
  std::uniform_int_distribution<std::int64_t> ms(0, 5'000);
  for (int trial = 0; trial < 50; ++trial) {
    UsageSession s;
    std::int64_t p = 0, c = 0, lat = 0;
    for (int i = 0; i < 200; ++i) {
      const TokenUsage u{tok(rng), tok(rng)};
      const auto l = ms(rng);
      p += u.prompt_tokens;
      c += u.completion_tokens;
      lat += l;
      s.add(u, std::chrono::milliseconds(l));
      EXPECT_GE(s.latency().count(), 0);
    }
    EXPECT_EQ(s.totals(), (TokenUsage{p, c}));
    EXPECT_EQ(s.latency(), std::chrono::milliseconds(lat));
  }
}

TEST(Cost, ExactRates) {
  std::istringstream csv("model_id,input_rate_per_1m,output_rate_per_1m\ngpt-4o,2.50,10.00\n");
  const auto card = RateCard::load(csv);
  EXPECT_EQ(cost({1'000'000, 0}, card, "gpt-4o"), *Money::parse("2.50"));
  EXPECT_EQ(cost({1000, 500}, card, "gpt-4o"), *Money::parse("0.0075"));
  EXPECT_EQ(cost({1, 0}, card, "gpt-4o"), Money::from_pico(2'500'000));
  EXPECT_EQ(kind_of([&] { cost({1, 1}, card, "claude-x"); }), ErrorKind::UnknownModel);
  EXPECT_FALSE(card.contains("claude-x"));
  std::istringstream bad("model,in,out\nx,1,1\n");
  EXPECT_THROW(RateCard::load(bad), Error);
}

// cost in picodollars is prompt*in + completion*out with rates in micro-dollars
// per million tokens, i.e. exactly one picodollar per token per micro-unit.
TEST(CostProperty, MatchesIntegerOracle) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::int64_t> tok(0, 50'000'000);
  std::uniform_int_distribution<std::int64_t> rate(0, 100'000'000);  // up to 100.000000 per 1M
  for (int i = 0; i < 5000; ++i) {
    const ModelRates r{Decimal::from_scaled(rate(rng)), Decimal::from_scaled(rate(rng))};
    const TokenUsage u{tok(rng), tok(rng)};
    const std::int64_t expected = u.prompt_tokens * r.input_per_1m.scaled() + u.completion_tokens * r.output_per_1m.scaled();
    ASSERT_EQ(cost(u, r).pico(), expected);
  }
}

TEST(Tokens, Estimate) {
  EXPECT_EQ(estimate_tokens(""), 0);
  EXPECT_EQ(estimate_tokens("abcd"), 1);
  EXPECT_EQ(estimate_tokens("abcde"), 2);
  EXPECT_EQ(fnv1a("a"), fnv1a("a"));
  EXPECT_NE(fnv1a("a"), fnv1a("b"));
}

class LocalServer : public ::testing::Test {
 protected:
  void SetUp() override {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      const auto doc = Json::parse(req.body);
      const auto& text = doc.at("messages").back().at("content").get_ref<const std::string&>();
      if (text == "boom") {
        res.status = 500;
        res.set_content("{\"error\":\"down\"}", "application/json");
      } else if (text == "garbage") {
        res.set_content("not json", "text/plain");
      } else if (text == "slow") {
        std::this_thread::sleep_for(std::chrono::milliseconds(800));
        res.set_content("{}", "application/json");
      } else {
        res.set_content(encode_response(ChatMessage::assistant("echo: " + text), {7, 3},
                                        doc.at("model").get<std::string>(), "r")
                            .dump(),
                        "application/json");
      }
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  void TearDown() override {
    server_.stop();
    thread_.join();
  }
  HttpBackend backend(std::chrono::milliseconds timeout = std::chrono::milliseconds(5000)) {
    return HttpBackend({"http://127.0.0.1:" + std::to_string(port_) + "/v1/", "sk-test", timeout, 1});
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::string last_auth_;
};

TEST_F(LocalServer, RoundTripOverHttp) {
  auto b = backend();
  const auto r = chat_complete(b, "gpt-4o", {ChatMessage::user("hello")}, {});
  EXPECT_EQ(r.message.content, "echo: hello");
  EXPECT_EQ(r.usage, (TokenUsage{7, 3}));
  EXPECT_GT(r.latency.count(), 0);
  EXPECT_EQ(last_auth_, "Bearer sk-test");
}

TEST_F(LocalServer, FailuresAreTyped) {
  auto b = backend();
  EXPECT_EQ(kind_of([&] { chat_complete(b, "m", {ChatMessage::user("boom")}, {}); }), ErrorKind::LlmProtocolError);
  EXPECT_EQ(kind_of([&] { chat_complete(b, "m", {ChatMessage::user("garbage")}, {}); }),
            ErrorKind::LlmProtocolError);
  auto quick = backend(std::chrono::milliseconds(200));
  EXPECT_EQ(kind_of([&] { chat_complete(quick, "m", {ChatMessage::user("slow")}, {}); }), ErrorKind::Timeout);
}

TEST(Http, UnreachableHostIsProtocolError) {
  HttpBackend b({"http://127.0.0.1:1", "", std::chrono::milliseconds(500), 1});
  const auto k = kind_of([&] { chat_complete(b, "m", {ChatMessage::user("x")}, {}); });
  EXPECT_TRUE(k == ErrorKind::LlmProtocolError || k == ErrorKind::Timeout);
  EXPECT_EQ(kind_of([] { HttpBackend({"no-scheme", "", std::chrono::milliseconds(1), 0}); }), ErrorKind::ConfigError);
}
