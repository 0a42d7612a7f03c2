#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finq/assistant_router.hpp"
#include "finq/decimal.hpp"
#include "finq/judge.hpp"
#include "finq/json.hpp"
#include "finq/llm_protocol.hpp"
#include "finq/sql_baseline.hpp"

namespace finq {

class QueryLibrary;
class MarketStore;
class LocalRegistry;

enum class BenchSystem { FunctionCalling, TextToSql };
std::string_view to_string(BenchSystem s);

struct BenchCase {
  std::size_t index = 0;  // zero-based line number among non-blank lines
  std::string query;
  std::optional<ExpectedResult> expected;
};

/// One query per non-blank line; CR and surrounding whitespace trimmed.
std::vector<std::string> load_suite(const std::filesystem::path& path);
/// Attaches expected results from {"cases":[{"query":..., "expected":{...}}]}
/// by exact query text. Unknown queries in the expectations file are an error.
std::vector<BenchCase> attach_expectations(const std::vector<std::string>& queries,
                                           const Json& expectations);
std::vector<BenchCase> load_bench(const std::filesystem::path& suite,
                                  const std::filesystem::path& expectations);

struct BenchCaseResult {
  std::size_t index = 0;
  std::string query;
  BenchSystem system = BenchSystem::FunctionCalling;
  bool success = false;
  FailureClass failure = FailureClass::None;
  std::string detail;
  llm::TokenUsage usage;
  Money cost;
  std::chrono::nanoseconds latency{0};
  std::chrono::nanoseconds wall_time{0};
  std::size_t model_calls = 0;
  Json answer;  // AnswerResult::to_json with trace

  Json to_json() const;
  static BenchCaseResult from_json(const Json& doc);
};

/// Cost and latency statistics from exact integer sums (picodollars and
/// nanoseconds), so they do not depend on summation order. Standard
/// deviations use the n - 1 denominator and are 0 for a single case.
struct SystemAggregate {
  BenchSystem system = BenchSystem::FunctionCalling;
  std::size_t cases = 0;
  std::size_t successes = 0;
  double accuracy = 0.0;
  Money total_cost;
  double mean_cost = 0.0;  // currency units
  double std_cost = 0.0;
  std::int64_t total_latency_ns = 0;
  double mean_latency_s = 0.0;
  double std_latency_s = 0.0;
  llm::TokenUsage usage;

  Json to_json() const;
};

/// Streaming fold; add() in any order gives the same finish().
class AggregateAccumulator {
 public:
  explicit AggregateAccumulator(BenchSystem system) : system_(system) {}
  void add(const BenchCaseResult& r);
  SystemAggregate finish() const;

 private:
  BenchSystem system_;
  std::size_t n_ = 0;
  std::size_t successes_ = 0;
  __int128 cost_sum_ = 0;
  __int128 cost_sq_ = 0;
  __int128 lat_sum_ = 0;
  __int128 lat_sq_ = 0;
  llm::TokenUsage usage_;
};

SystemAggregate aggregate(const std::vector<BenchCaseResult>& results, BenchSystem system);

struct Rq3Config {
  std::string model;
  std::vector<BenchSystem> systems{BenchSystem::FunctionCalling, BenchSystem::TextToSql};
  RouterConfig router;      // model is overwritten from `model`
  BaselineConfig baseline;  // likewise
  std::size_t workers = 1;
};

struct Rq3Report {
  std::string model;
  std::vector<BenchCaseResult> cases;  // grouped by system, case order
  std::vector<SystemAggregate> aggregates;
  Json to_json() const;
};

Rq3Report run_rq3(const std::vector<BenchCase>& cases, const QueryLibrary& library,
                  const MarketStore& store, const LocalRegistry& registry,
                  llm::ChatBackend& backend, const llm::RateCard& rates, const Rq3Config& config);

/// Judges one answer; a case without an expected result fails with "error".
BenchCaseResult judge_case(const BenchCase& c, BenchSystem system, const AnswerResult& answer,
                           const MarketStore& store);

}  // namespace finq
