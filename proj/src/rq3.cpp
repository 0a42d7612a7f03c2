#include "finq/rq3.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include <fmt/format.h>

#include "finq/market_store.hpp"
#include "finq/query_library.hpp"
#include "finq/ticker_resolver.hpp"
#include "finq/worker_pool.hpp"

namespace finq {
namespace {

std::optional<FailureClass> parse_failure_class(std::string_view s) {
  for (auto c : {FailureClass::None, FailureClass::WrongEntity, FailureClass::WrongCount,
                 FailureClass::WrongValues, FailureClass::Error, FailureClass::NoToolCall}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

std::optional<BenchSystem> parse_system(std::string_view s) {
  if (s == "function_calling") return BenchSystem::FunctionCalling;
  if (s == "text_to_sql") return BenchSystem::TextToSql;
  return std::nullopt;
}

std::string trim(std::string s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

// sqrt of num / den for exact non-negative integers, via long double.
double sqrt_ratio(__int128 num, __int128 den) {
  if (den == 0 || num <= 0) return 0.0;
  return static_cast<double>(
      std::sqrt(static_cast<long double>(num) / static_cast<long double>(den)));
}

}  // namespace

std::string_view to_string(BenchSystem s) {
  return s == BenchSystem::FunctionCalling ? "function_calling" : "text_to_sql";
}

std::vector<std::string> load_suite(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read suite {}", path.string()));
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (!line.empty()) out.push_back(std::move(line));
  }
  return out;
}

std::vector<BenchCase> attach_expectations(const std::vector<std::string>& queries,
                                           const Json& expectations) {
  std::map<std::string, ExpectedResult> by_query;
  if (!expectations.is_object() || !expectations.contains("cases")) {
    throw Error(ErrorKind::ParseFailure, "expectations file lacks a \"cases\" array");
  }
  for (const auto& c : expectations.at("cases")) {
    const auto q = c.at("query").get<std::string>();
    if (std::find(queries.begin(), queries.end(), q) == queries.end()) {
      throw Error(ErrorKind::ParseFailure, fmt::format("expectation for unknown query '{}'", q));
    }
    by_query.emplace(q, ExpectedResult::from_json(c.at("expected")));
  }
  std::vector<BenchCase> out;
  for (std::size_t i = 0; i < queries.size(); ++i) {
    BenchCase bc;
    bc.index = i;
    bc.query = queries[i];
    if (auto it = by_query.find(queries[i]); it != by_query.end()) bc.expected = it->second;
    out.push_back(std::move(bc));
  }
  return out;
}

std::vector<BenchCase> load_bench(const std::filesystem::path& suite,
                                  const std::filesystem::path& expectations) {
  const auto queries = load_suite(suite);
  std::ifstream in(expectations, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::IoError, fmt::format("cannot read {}", expectations.string()));
  }
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ParseFailure, fmt::format("{}: {}", expectations.string(), e.what()));
  }
  return attach_expectations(queries, doc);
}

Json BenchCaseResult::to_json() const {
  Json doc;
  doc["index"] = index;
  doc["query"] = query;
  doc["system"] = to_string(system);
  doc["success"] = success;
  doc["failure"] = to_string(failure);
  doc["detail"] = detail;
  doc["prompt_tokens"] = usage.prompt_tokens;
  doc["completion_tokens"] = usage.completion_tokens;
  doc["cost"] = cost.to_string();
  doc["latency_ns"] = latency.count();
  doc["wall_time_ns"] = wall_time.count();
  doc["model_calls"] = model_calls;
  doc["answer"] = answer;
  return doc;
}

BenchCaseResult BenchCaseResult::from_json(const Json& doc) {
  BenchCaseResult r;
  r.index = doc.at("index").get<std::size_t>();
  r.query = doc.at("query").get<std::string>();
  auto sys = parse_system(doc.at("system").get<std::string>());
  auto fc = parse_failure_class(doc.at("failure").get<std::string>());
  auto cost = Money::parse(doc.at("cost").get<std::string>());
  if (!sys || !fc || !cost) throw Error(ErrorKind::ParseFailure, "malformed case record");
  r.system = *sys;
  r.failure = *fc;
  r.cost = *cost;
  r.success = doc.at("success").get<bool>();
  r.detail = doc.value("detail", "");
  r.usage.prompt_tokens = doc.at("prompt_tokens").get<std::int64_t>();
  r.usage.completion_tokens = doc.at("completion_tokens").get<std::int64_t>();
  r.latency = std::chrono::nanoseconds{doc.at("latency_ns").get<std::int64_t>()};
  r.wall_time = std::chrono::nanoseconds{doc.at("wall_time_ns").get<std::int64_t>()};
  r.model_calls = doc.value("model_calls", std::size_t{0});
  r.answer = doc.value("answer", Json());
  return r;
}

void AggregateAccumulator::add(const BenchCaseResult& r) {
  ++n_;
  if (r.success) ++successes_;
  const __int128 c = r.cost.pico();
  const __int128 l = r.latency.count();
  cost_sum_ += c;
  cost_sq_ += c * c;
  lat_sum_ += l;
  lat_sq_ += l * l;
  usage_ += r.usage;
}

SystemAggregate AggregateAccumulator::finish() const {
  SystemAggregate a;
  a.system = system_;
  a.cases = n_;
  a.successes = successes_;
  a.usage = usage_;
  a.total_cost = Money::from_pico(static_cast<std::int64_t>(cost_sum_));
  a.total_latency_ns = static_cast<std::int64_t>(lat_sum_);
  if (n_ == 0) return a;
  const __int128 n = static_cast<__int128>(n_);
  a.accuracy = static_cast<double>(successes_) / static_cast<double>(n_);
  a.mean_cost = static_cast<double>(static_cast<long double>(cost_sum_) /
                                    static_cast<long double>(n) / 1e12L);
  a.mean_latency_s = static_cast<double>(static_cast<long double>(lat_sum_) /
                                         static_cast<long double>(n) / 1e9L);
  if (n_ > 1) {
    // n * sum(x^2) - (sum x)^2 is exact in 128 bits.
    a.std_cost = sqrt_ratio(n * cost_sq_ - cost_sum_ * cost_sum_, n * (n - 1)) / 1e12;
    a.std_latency_s = sqrt_ratio(n * lat_sq_ - lat_sum_ * lat_sum_, n * (n - 1)) / 1e9;
  }
  return a;
}

Json SystemAggregate::to_json() const {
  Json doc;
  doc["system"] = to_string(system);
  doc["cases"] = cases;
  doc["successes"] = successes;
  doc["accuracy"] = accuracy;
  doc["total_cost"] = total_cost.to_string();
  doc["mean_cost"] = mean_cost;
  doc["std_cost"] = std_cost;
  doc["total_latency_ns"] = total_latency_ns;
  doc["mean_latency_s"] = mean_latency_s;
  doc["std_latency_s"] = std_latency_s;
  doc["prompt_tokens"] = usage.prompt_tokens;
  doc["completion_tokens"] = usage.completion_tokens;
  return doc;
}

SystemAggregate aggregate(const std::vector<BenchCaseResult>& results, BenchSystem system) {
  AggregateAccumulator acc(system);
  for (const auto& r : results) {
    if (r.system == system) acc.add(r);
  }
  return acc.finish();
}

BenchCaseResult judge_case(const BenchCase& c, BenchSystem system, const AnswerResult& answer,
                           const MarketStore& store) {
  BenchCaseResult r;
  r.index = c.index;
  r.query = c.query;
  r.system = system;
  r.usage = answer.usage;
  r.cost = answer.cost;
  r.latency = answer.latency;
  r.wall_time = answer.wall_time;
  for (const auto& s : answer.trace) {
    if (s.kind == StepKind::ModelCall) ++r.model_calls;
  }
  r.answer = answer.to_json(true);
  if (!c.expected) {
    r.failure = FailureClass::Error;
    r.detail = "no expected result for this query";
    return r;
  }
  try {
    const auto oracle = oracle_table(*c.expected, store);
    const auto j = judge_success(*c.expected, oracle, answer);
    r.success = j.success;
    r.failure = j.failure;
    r.detail = j.detail;
  } catch (const Error& e) {
    r.failure = FailureClass::Error;
    r.detail = fmt::format("oracle failed: {}", e.what());
  }
  return r;
}

Rq3Report run_rq3(const std::vector<BenchCase>& cases, const QueryLibrary& library,
                  const MarketStore& store, const LocalRegistry& registry,
                  llm::ChatBackend& backend, const llm::RateCard& rates, const Rq3Config& config) {
  Rq3Report report;
  report.model = config.model;
  rates.rates(config.model);  // unknown models fail before any call

  for (const auto system : config.systems) {
    std::vector<BenchCaseResult> results;
    if (system == BenchSystem::FunctionCalling) {
      auto rc = config.router;
      rc.model = config.model;
      const AssistantRouter router(library, store, registry, backend, rates, rc);
      results = parallel_map<BenchCaseResult>(cases.size(), config.workers, [&](std::size_t i) {
        return judge_case(cases[i], system, router.answer(cases[i].query), store);
      });
    } else {
      auto bc = config.baseline;
      bc.model = config.model;
      const SqlBaseline baseline(store, backend, rates, bc);
      results = parallel_map<BenchCaseResult>(cases.size(), config.workers, [&](std::size_t i) {
        return judge_case(cases[i], system, baseline.answer(cases[i].query).answer, store);
      });
    }
    AggregateAccumulator acc(system);
    for (const auto& r : results) acc.add(r);
    report.aggregates.push_back(acc.finish());
    report.cases.insert(report.cases.end(), std::make_move_iterator(results.begin()),
                        std::make_move_iterator(results.end()));
  }
  return report;
}

Json Rq3Report::to_json() const {
  Json doc;
  doc["experiment"] = "rq3";
  doc["model"] = model;
  auto& ag = doc["aggregates"] = Json::array();
  for (const auto& a : aggregates) ag.push_back(a.to_json());
  auto& cs = doc["cases"] = Json::array();
  for (const auto& c : cases) cs.push_back(c.to_json());
  return doc;
}

}  // namespace finq
