#include <gtest/gtest.h>

#include <random>

#include "finq/assistant_router.hpp"
#include "finq/error.hpp"
#include "finq/judge.hpp"
#include "finq/mock_backend.hpp"
#include "finq/ticker_resolver.hpp"
#include "support.hpp"

using namespace finq;
using finq::test::TempDir;

namespace {

const std::string kNvidiaQuestion = "What are the latest 10 daily closing prices for NVIDIA?";

Json call_rule(const std::string& name, Json match, Json arguments, const std::string& fn = "get_stock_price") {
  return {{"name", name},
          {"match", std::move(match)},
          {"response", {{"tool_calls", Json::array({{{"name", fn}, {"arguments", std::move(arguments)}}})}}},
          {"usage", {{"prompt_tokens", 420}, {"completion_tokens", 24}}},
          {"latency_ms", 700}};
}

Json text_rule(const std::string& name, Json match, const std::string& text) {
  return {{"name", name},
          {"match", std::move(match)},
          {"response", {{"text", text}}},
          {"usage", {{"prompt_tokens", 900}, {"completion_tokens", 40}}},
          {"latency_ms", 500}};
}

class Router : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    path_ = test::make_synthetic_store(*dir_);
    store_ = new MarketStore(MarketStore::open_read_only(path_));
    library_ = new QueryLibrary(QueryLibrary::standard(store_->vocabulary()));
    registry_ = new LocalRegistry(LocalRegistry::from_store(*store_));
    rates_ = new llm::RateCard(llm::RateCard::load_file(test::source_dir() / "data" / "rate_card.csv"));
  }
  static void TearDownTestSuite() {
    delete rates_;
    delete registry_;
    delete library_;
    delete store_;
    delete dir_;
  }

  static AnswerResult ask(const Json& rules, const std::string& question, int self_corrections = 1,
                          int max_rounds = 3) {
    auto mock = llm::MockBackend::from_json(Json{{"rules", rules}});
    RouterConfig cfg;
    cfg.model = "mock-model";
    cfg.self_corrections = self_corrections;
    cfg.max_tool_rounds = max_rounds;
    AssistantRouter router(*library_, *store_, *registry_, mock, *rates_, cfg);
    return router.answer(question);
  }

  static ExpectedResult nvda10() {
    return ExpectedResult::from_json(
        Json{{"kind", "price"}, {"ticker", "NVDA"}, {"n_days", 10}, {"fields", {"close"}}});
  }

  static void expect_accounting(const AnswerResult& r) {
    llm::TokenUsage u;
    std::chrono::nanoseconds lat{0};
    for (const auto& s : r.trace) {
      u += s.usage;
      lat += s.latency;
      EXPECT_GE(s.latency.count(), 0);
    }
    EXPECT_EQ(r.usage, u);
    EXPECT_EQ(r.latency, lat);
    EXPECT_EQ(r.cost, llm::cost(u, *rates_, "mock-model"));
    // scripted timing: the loop is sequential so wall time is the step sum
    EXPECT_EQ(r.wall_time, lat);
  }

  static inline TempDir* dir_ = nullptr;
  static inline std::filesystem::path path_;
  static inline MarketStore* store_ = nullptr;
  static inline QueryLibrary* library_ = nullptr;
  static inline LocalRegistry* registry_ = nullptr;
  static inline llm::RateCard* rates_ = nullptr;
};

}  // namespace

TEST_F(Router, NvidiaLatestTenCloses) {
  const Json rules = Json::array(
      {call_rule("route", {{"role", "user"}, {"equals", kNvidiaQuestion}, {"has_tools", true}},
                 {{"ticker", "NVIDIA"}, {"n_days", 10}}),
       text_rule("summary", {{"role", "tool"}}, "Here are the ten most recent closes.")});
  const auto r = ask(rules, kNvidiaQuestion);
  ASSERT_TRUE(r.ok()) << r.failure_message;
  ASSERT_EQ(r.tables.size(), 1u);
  EXPECT_EQ(r.tables[0].ticker, "NVDA");
  EXPECT_EQ(r.tables[0].table.row_count(), 10u);
  const auto oracle = oracle_table(nvda10(), *store_);
  EXPECT_EQ(r.tables[0].table, to_table(store_->last_n_trading_days("NVDA", 10)));
  const auto j = judge_success(nvda10(), oracle, r);
  EXPECT_TRUE(j.success) << j.detail;

  ASSERT_EQ(r.trace.size(), 3u);
  EXPECT_EQ(r.trace[0].kind, StepKind::ModelCall);
  EXPECT_EQ(r.trace[1].kind, StepKind::ToolExecution);
  EXPECT_EQ(r.trace[1].outcome, "ok");
  EXPECT_EQ(r.trace[1].rows, 10u);
  EXPECT_EQ(r.trace[2].outcome, "text");
  EXPECT_EQ(r.usage, (llm::TokenUsage{1320, 64}));
  // 1320 * 1.00 + 64 * 4.00 per million
  EXPECT_EQ(r.cost, *Money::parse("0.001576"));
  EXPECT_EQ(r.latency, std::chrono::milliseconds(1200));
  expect_accounting(r);

  // The machine-readable block carries the executed table verbatim.
  const auto parsed = parse_tables_block(r.answer_text);
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0].table, r.tables[0].table);
  EXPECT_EQ(parsed[0].ticker, "NVDA");

  const auto doc = r.to_json(true);
  EXPECT_EQ(doc.at("question"), kNvidiaQuestion);
  EXPECT_TRUE(doc.contains("trace"));
  EXPECT_FALSE(r.to_json(false).contains("trace"));
}

TEST_F(Router, InvalidArgumentsAreRejectedAndRecorded) {
  const Json rules = Json::array({call_rule("route", {{"role", "user"}, {"has_tools", true}},
                                            {{"ticker", "NVDA"}, {"n_days", 0}}),
                                  text_rule("summary", {{"role", "tool"}}, "done")});
  const auto r = ask(rules, kNvidiaQuestion, 0);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.failure, ErrorKind::InvalidParameter);
  ASSERT_EQ(r.trace.size(), 2u);
  EXPECT_EQ(r.trace[1].outcome, "rejected");
  EXPECT_EQ(*r.trace[1].error, ErrorKind::InvalidParameter);
  EXPECT_FALSE(r.trace[1].validated.has_value());
  EXPECT_TRUE(r.tables.empty());
  const auto j = judge_success(nvda10(), oracle_table(nvda10(), *store_), r);
  EXPECT_FALSE(j.success);
  EXPECT_EQ(j.failure, FailureClass::Error);
  expect_accounting(r);
}

TEST_F(Router, OneSelfCorrectionAfterRejection) {
  const Json rules = Json::array(
      {call_rule("route", {{"role", "user"}, {"has_tools", true}}, {{"ticker", "NVDA"}, {"n_days", 0}}),
       call_rule("retry", {{"role", "tool"}, {"contains", "InvalidParameter"}}, {{"ticker", "NVDA"}, {"n_days", 10}}),
       text_rule("summary", {{"role", "tool"}}, "done")});
  const auto r = ask(rules, kNvidiaQuestion, 1);
  ASSERT_TRUE(r.ok()) << r.failure_message;
  EXPECT_TRUE(judge_success(nvda10(), oracle_table(nvda10(), *store_), r).success);
  EXPECT_EQ(r.trace.size(), 5u);

  // without a correction budget the same script fails
  EXPECT_FALSE(ask(rules, kNvidiaQuestion, 0).ok());
}

TEST_F(Router, ProseAnswerIsNoToolCall) {
  const Json rules = Json::array({text_rule("prose", {{"role", "user"}}, "NVIDIA closed higher recently.")});
  const auto r = ask(rules, kNvidiaQuestion);
  EXPECT_TRUE(r.ok());
  EXPECT_FALSE(r.called_tools());
  const auto j = judge_success(nvda10(), oracle_table(nvda10(), *store_), r);
  EXPECT_FALSE(j.success);
  EXPECT_EQ(j.failure, FailureClass::NoToolCall);
  expect_accounting(r);
}

TEST_F(Router, MalformedToolCallFails) {
  const Json rules = Json::parse(R"([{"name": "bad", "match": {"role": "user"},
      "response": {"tool_calls": [{"name": "get_stock_price", "arguments_raw": "{\"ticker\": \"NVDA\""}]}}])");
  const auto r = ask(rules, kNvidiaQuestion, 0);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.failure, ErrorKind::MalformedToolCall);
}

TEST_F(Router, RoundLimit) {
  const Json rules = Json::array({call_rule("loop", {{"has_tools", true}}, {{"ticker", "NVDA"}, {"n_days", 2}})});
  const auto r = ask(rules, kNvidiaQuestion, 1, 3);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.failure, ErrorKind::ToolRoundLimitExceeded);
  const auto calls = std::count_if(r.trace.begin(), r.trace.end(),
                                   [](const auto& s) { return s.kind == StepKind::ModelCall; });
  EXPECT_EQ(calls, 3);
  expect_accounting(r);
}

TEST_F(Router, BackendErrorsEndTheLoop) {
  const Json rules = Json::parse(R"([{"name": "down", "match": {}, "response": {"http_error": 503}}])");
  const auto r = ask(rules, kNvidiaQuestion);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(*r.failure, ErrorKind::LlmProtocolError);
  const auto unmatched = ask(Json::array(), kNvidiaQuestion);
  EXPECT_EQ(*unmatched.failure, ErrorKind::MockUnmatched);
}

TEST_F(Router, UnknownModelThrows) {
  auto mock = llm::MockBackend::from_json(Json{{"rules", Json::array()}});
  RouterConfig cfg;
  cfg.model = "no-such-model";
  AssistantRouter router(*library_, *store_, *registry_, mock, *rates_, cfg);
  EXPECT_THROW(router.answer("x"), Error);
}

TEST_F(Router, DeterministicTraces) {
  const Json rules = Json::array(
      {call_rule("route", {{"role", "user"}, {"has_tools", true}}, {{"ticker", "Walmart"}, {"lookback_count", 3},
                                                                    {"lookback_unit", "months"}}),
       text_rule("summary", {{"role", "tool"}}, "ok")});
  const auto first = ask(rules, "Show Walmart's stock price for the past 3 months").to_json(true).dump();
  for (int i = 0; i < 5; ++i) {
    EXPECT_EQ(ask(rules, "Show Walmart's stock price for the past 3 months").to_json(true).dump(), first);
  }
}

// Random malformed calls never cause SQL outside the registered templates.
TEST_F(Router, FuzzedToolCallsOnlyRunTemplates) {
  std::mt19937 rng(99);
  const std::vector<std::string> fns{"get_stock_price", "get_fundamental_metric", "get_financial_statement",
                                     "drop_tables", ""};
  const std::vector<Json> values{"NVDA", "'; DROP TABLE prices; --", -1, 0, 3, 1e9, true, nullptr,
                                 Json::array({1, 2}), Json::object(), "2024-13-40", "revenue) OR 1=1 --",
                                 "months", "balance_sheet", "2023Q1", "Walmart"};
  const std::vector<std::string> keys{"ticker", "n_days", "lookback_count", "lookback_unit", "start_date",
                                      "end_date", "periodicity", "metric", "n_periods", "frequency",
                                      "statement_kind", "from_period", "to_period", "sql", "extra"};
  const auto& db = store_->database();
  const auto texts = library_->statement_texts();
  db.enable_statement_log();
  db.clear_statement_log();
  for (int i = 0; i < 300; ++i) {
    Json args = Json::object();
    const int n = std::uniform_int_distribution<int>(0, 5)(rng);
    for (int k = 0; k < n; ++k) {
      args[keys[std::uniform_int_distribution<std::size_t>(0, keys.size() - 1)(rng)]] =
          values[std::uniform_int_distribution<std::size_t>(0, values.size() - 1)(rng)];
    }
    Json call{{"name", fns[std::uniform_int_distribution<std::size_t>(0, fns.size() - 1)(rng)]}};
    if (i % 7 == 0) {
      call["arguments_raw"] = args.dump().substr(0, args.dump().size() / 2);
    } else {
      call["arguments"] = args;
    }
    const Json rules = Json::array(
        {{{"name", "fuzz"}, {"match", {{"role", "user"}}}, {"response", {{"tool_calls", Json::array({call})}}}},
         text_rule("summary", {{"role", "tool"}}, "done")});
    const auto r = ask(rules, "fuzz " + std::to_string(i));
    for (const auto& s : r.trace) {
      if (s.kind == StepKind::ToolExecution && s.outcome == "ok") EXPECT_TRUE(s.validated.has_value());
    }
  }
  for (const auto& s : db.statement_log()) EXPECT_EQ(texts.count(s), 1u) << s;
  db.clear_statement_log();
}

TEST_F(Router, JudgeClassifiesTables) {
  const auto exp = nvda10();
  const auto oracle = oracle_table(exp, *store_);
  ASSERT_EQ(oracle.row_count(), 10u);
  EXPECT_TRUE(judge_table(exp, oracle, oracle).success);

  auto nine = oracle;
  nine.rows.pop_back();
  EXPECT_EQ(judge_table(exp, oracle, nine).failure, FailureClass::WrongCount);

  const auto other = to_table(store_->last_n_trading_days("AAPL", 10));
  EXPECT_EQ(judge_table(exp, oracle, other).failure, FailureClass::WrongEntity);

  auto changed = oracle;
  const auto close = static_cast<std::size_t>(changed.column_index("close"));
  changed.rows[4][close] = "0.01";
  EXPECT_EQ(judge_table(exp, oracle, changed).failure, FailureClass::WrongValues);

  auto reversed = oracle;
  std::reverse(reversed.rows.begin(), reversed.rows.end());
  EXPECT_TRUE(judge_table(exp, oracle, reversed).success);

  // Only the requested fields and keys are compared.
  ResultTable narrow;
  narrow.columns = {"ticker", "date", "close"};
  for (const auto& row : oracle.rows) {
    narrow.rows.push_back({row[static_cast<std::size_t>(oracle.column_index("ticker"))], row[static_cast<std::size_t>(oracle.column_index("date"))], row[close]});
  }
  EXPECT_TRUE(judge_table(exp, oracle, narrow).success);
}
