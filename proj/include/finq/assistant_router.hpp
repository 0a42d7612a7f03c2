#pragma once

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "finq/decimal.hpp"
#include "finq/error.hpp"
#include "finq/json.hpp"
#include "finq/llm_protocol.hpp"
#include "finq/query_library.hpp"
#include "finq/result_table.hpp"

namespace finq {

class MarketStore;
class LocalRegistry;

enum class TimingMode {
  Auto,       // simulated for scripted backends, measured otherwise
  Measured,
  Simulated,  // model latency from the script, tool execution counted as 0
};

struct RouterConfig {
  std::string model;
  int max_tool_rounds = 3;  // model calls per question
  int self_corrections = 1;
  std::size_t result_row_cap = 50;  // rows echoed back to the model
  TimingMode timing = TimingMode::Auto;
  std::string system_prompt;  // empty selects the built-in prompt
};

std::string_view default_system_prompt();

enum class StepKind { ModelCall, ToolExecution };
std::string_view to_string(StepKind k);

struct TraceStep {
  StepKind kind = StepKind::ModelCall;
  std::chrono::nanoseconds latency{0};
  llm::TokenUsage usage;  // model calls only
  // Model calls: "text" or "tool_calls". Tool executions: "ok" or "rejected".
  std::string outcome;
  std::string function;
  Json arguments;  // as sent by the model
  std::optional<ValidatedArgs> validated;
  std::vector<std::string> template_ids;
  std::size_t rows = 0;
  std::optional<ErrorKind> error;
  std::string error_message;
};

struct ExecutedTable {
  std::string function;
  Json arguments;  // validated
  std::string ticker;
  ResultTable table;
};

struct AnswerResult {
  std::string question;
  std::string model;
  std::string answer_text;
  std::vector<ExecutedTable> tables;
  std::vector<TraceStep> trace;
  llm::TokenUsage usage;
  Money cost;
  std::chrono::nanoseconds latency{0};    // sum over trace steps
  std::chrono::nanoseconds wall_time{0};  // clock around the whole loop
  std::optional<ErrorKind> failure;
  std::string failure_message;

  bool ok() const { return !failure.has_value(); }
  bool called_tools() const;
  Json to_json(bool include_trace = true) const;
};

/// Fenced machine-readable block appended to the final answer text.
std::string tables_block(const std::vector<ExecutedTable>& tables);
/// Recovers the tables from an answer text; empty when there is no block.
std::vector<ExecutedTable> parse_tables_block(std::string_view answer_text);

/// The question -> tool call -> validated execution -> answer loop.
class AssistantRouter {
 public:
  AssistantRouter(const QueryLibrary& library, const MarketStore& store,
                  const LocalRegistry& registry, llm::ChatBackend& backend,
                  const llm::RateCard& rates, RouterConfig config);

  /// Never throws for model, validation or store failures: those end the
  /// loop and are recorded in the trace and in AnswerResult::failure.
  /// Throws UnknownModel when the model has no rate card entry.
  AnswerResult answer(const std::string& question) const;

  const RouterConfig& config() const { return config_; }

 private:
  const QueryLibrary& library_;
  const MarketStore& store_;
  const LocalRegistry& registry_;
  llm::ChatBackend& backend_;
  const llm::RateCard& rates_;
  RouterConfig config_;
  std::vector<llm::ToolSpec> tools_;
};

}  // namespace finq
