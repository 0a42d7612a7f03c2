#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finq/domain.hpp"
#include "finq/error.hpp"
#include "finq/json.hpp"
#include "finq/llm_protocol.hpp"
#include "finq/stats.hpp"

namespace finq {

class MarketStore;

enum class Rq1Target { StockPrice, Revenue, NetIncome };
std::string_view to_string(Rq1Target t);
/// Accepts stock_price / price / revenue / net_income.
std::optional<Rq1Target> parse_rq1_target(std::string_view text);

enum class Rq1Group { BeforeCutoff, AfterCutoff };
std::string_view to_string(Rq1Group g);

/// Input and output lengths: 10 trading days for prices, 8 quarters for
/// fundamentals.
int rq1_input_length(Rq1Target t);
int rq1_output_length(Rq1Target t);

struct PredictionTask {
  std::string ticker;
  std::string company_name;
  Rq1Target target = Rq1Target::StockPrice;
  std::vector<std::string> input_dates;
  std::vector<std::string> input_values;  // canonical decimal text, as stored
  std::vector<std::string> truth_dates;
  std::vector<double> truth_values;
  Rq1Group group = Rq1Group::BeforeCutoff;
};

/// The forecasting prompt with every field substituted.
std::string build_rq1_prompt(const PredictionTask& task);

struct Rq1Config {
  std::vector<Rq1Target> targets{Rq1Target::StockPrice, Rq1Target::Revenue, Rq1Target::NetIncome};
  /// Windows per ticker and group, stepping back by the output length.
  int windows_per_ticker = 1;
  /// Cap per (target, group), filled in ticker order; 0 = no cap.
  std::size_t max_tasks_per_group = 0;
  /// Restrict to these tickers; empty = every company in the store.
  std::vector<std::string> tickers;
  bool use_adjusted_close = false;
  std::size_t workers = 1;
};

struct Rq1Skip {
  std::string ticker;
  Rq1Target target;
  Rq1Group group;
  std::string reason;
};

struct Rq1TaskSet {
  Date cutoff;
  std::vector<PredictionTask> tasks;
  std::vector<Rq1Skip> skipped;
};

/// Before-cutoff windows lie entirely before the cutoff. After-cutoff
/// windows are the latest ones whose predicted values all fall on or after
/// the cutoff.
Rq1TaskSet build_rq1_tasks(const MarketStore& store, Date cutoff, const Rq1Config& config);

struct Rq1TaskOutcome {
  std::size_t task = 0;  // index into the task set
  std::string ticker;
  Rq1Target target = Rq1Target::StockPrice;
  Rq1Group group = Rq1Group::BeforeCutoff;
  std::string first_truth_date;
  std::string raw_output;
  std::optional<ErrorKind> error;  // ParseFailure, CountMismatch, ZeroMse, backend errors
  std::string error_message;
  std::optional<double> mse;
  std::optional<double> log_mse;
  llm::TokenUsage usage;
  std::chrono::nanoseconds latency{0};
};

struct Rq1GroupSummary {
  std::size_t tasks = 0;
  std::size_t scored = 0;
  std::size_t parse_failures = 0;  // ParseFailure and CountMismatch
  std::size_t zero_mse = 0;
  std::size_t errors = 0;  // backend failures
  std::vector<double> log_mses;
  std::optional<double> mean_log_mse;
};

struct Rq1TargetSummary {
  Rq1Target target = Rq1Target::StockPrice;
  Rq1GroupSummary before;
  Rq1GroupSummary after;
  std::optional<stats::WelchResult> welch;  // alternative: before < after
  std::string welch_error;
};

struct Rq1Report {
  std::string model;
  Date cutoff;
  std::vector<Rq1TaskOutcome> outcomes;
  std::vector<Rq1TargetSummary> targets;
  std::vector<Rq1Skip> skipped;
  Json to_json() const;
};

Rq1Report run_rq1(const Rq1TaskSet& tasks, llm::ChatBackend& backend, const std::string& model,
                  const std::vector<Rq1Target>& targets, std::size_t workers = 1);

/// Folds outcomes into per-target summaries; single-threaded and in task
/// order so the floating-point sums are reproducible.
std::vector<Rq1TargetSummary> summarize_rq1(const Rq1TaskSet& tasks,
                                            const std::vector<Rq1TaskOutcome>& outcomes,
                                            const std::vector<Rq1Target>& targets);

struct NoiseModel {
  double sigma_before = 1.0;  // absolute, in the units of the series
  double sigma_after = 1.0;
};

/// Stand-in forecaster for power and calibration checks: answers a known
/// task prompt with truth + N(0, sigma_group^2) noise. Noise is a pure
/// function of (seed, prompt), so runs are reproducible in any order.
class SyntheticForecastBackend : public llm::ChatBackend {
 public:
  SyntheticForecastBackend(const std::vector<PredictionTask>& tasks, NoiseModel noise,
                           std::uint64_t seed);
  llm::BackendReply send(const Json& request) override;
  bool simulated_timing() const override { return true; }

 private:
  struct Entry {
    std::string prompt;
    std::vector<double> truth;
    Rq1Group group;
  };
  std::vector<Entry> entries_;  // sorted by prompt
  NoiseModel noise_;
  std::uint64_t seed_;
};

}  // namespace finq
