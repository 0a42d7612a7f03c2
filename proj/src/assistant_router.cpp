#include "finq/assistant_router.hpp"

#include <fmt/format.h>

#include "finq/market_store.hpp"
#include "finq/ticker_resolver.hpp"

namespace finq {
namespace {

using Clock = std::chrono::steady_clock;

std::chrono::nanoseconds since(Clock::time_point start) {
  return std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - start);
}

Json error_payload(const Error& e) {
  Json err;
  err["kind"] = to_string(e.kind());
  err["message"] = e.what();
  if (!e.subject().empty()) err["parameter"] = e.subject();
  return Json{{"error", std::move(err)}};
}

Json result_payload(const ExecutedTable& t, std::size_t cap) {
  Json doc;
  doc["function"] = t.function;
  doc["ticker"] = t.ticker;
  doc["row_count"] = t.table.row_count();
  doc["columns"] = t.table.columns;
  ResultTable shown;
  shown.columns = t.table.columns;
  const auto n = std::min(cap, t.table.rows.size());
  shown.rows.assign(t.table.rows.begin(), t.table.rows.begin() + static_cast<std::ptrdiff_t>(n));
  doc["rows"] = shown.to_json().at("rows");
  doc["truncated"] = n < t.table.rows.size();
  return doc;
}

constexpr std::string_view kBlockOpen = "```json\n";
constexpr std::string_view kBlockClose = "\n```";

}  // namespace

std::string_view default_system_prompt() {
  return "You are a financial data assistant with access to a market database of daily stock "
         "prices and company fundamentals. Answer every data question by calling one of the "
         "provided functions with arguments taken from the question; never answer from memory. "
         "Use ticker symbols when you know them, otherwise pass the company name. Dates use the "
         "YYYY-MM-DD format and fiscal periods look like 2023Q2 or 2023FY. If a function returns "
         "an error, fix the arguments and call it again. After the data arrives, reply with one "
         "short sentence; the data itself is attached to your reply automatically.";
}

std::string_view to_string(StepKind k) {
  return k == StepKind::ModelCall ? "model_call" : "tool_execution";
}

bool AnswerResult::called_tools() const {
  for (const auto& s : trace) {
    if (s.kind == StepKind::ToolExecution) return true;
  }
  return false;
}

Json AnswerResult::to_json(bool include_trace) const {
  Json doc;
  doc["question"] = question;
  doc["model"] = model;
  doc["ok"] = ok();
  doc["answer"] = answer_text;
  auto& tabs = doc["tables"] = Json::array();
  for (const auto& t : tables) {
    Json tj;
    tj["function"] = t.function;
    tj["arguments"] = t.arguments;
    tj["ticker"] = t.ticker;
    tj["columns"] = t.table.columns;
    tj["rows"] = t.table.to_json().at("rows");
    tabs.push_back(std::move(tj));
  }
  doc["usage"] = {{"prompt_tokens", usage.prompt_tokens},
                  {"completion_tokens", usage.completion_tokens}};
  doc["cost"] = cost.to_string();
  doc["latency_ns"] = latency.count();
  doc["wall_time_ns"] = wall_time.count();
  if (failure) {
    doc["failure"] = {{"kind", to_string(*failure)}, {"message", failure_message}};
  } else {
    doc["failure"] = nullptr;
  }
  if (include_trace) {
    auto& steps = doc["trace"] = Json::array();
    for (const auto& s : trace) {
      Json sj;
      sj["kind"] = to_string(s.kind);
      sj["latency_ns"] = s.latency.count();
      sj["outcome"] = s.outcome;
      if (s.kind == StepKind::ModelCall) {
        sj["usage"] = {{"prompt_tokens", s.usage.prompt_tokens},
                       {"completion_tokens", s.usage.completion_tokens}};
      } else {
        sj["function"] = s.function;
        sj["arguments"] = s.arguments;
        sj["validated"] = s.validated ? s.validated->args : Json(nullptr);
        sj["templates"] = s.template_ids;
        sj["rows"] = s.rows;
      }
      if (s.error) {
        sj["error"] = {{"kind", to_string(*s.error)}, {"message", s.error_message}};
      }
      steps.push_back(std::move(sj));
    }
  }
  return doc;
}

std::string tables_block(const std::vector<ExecutedTable>& tables) {
  auto arr = Json::array();
  for (const auto& t : tables) {
    Json tj;
    tj["function"] = t.function;
    tj["arguments"] = t.arguments;
    tj["ticker"] = t.ticker;
    tj["columns"] = t.table.columns;
    tj["rows"] = t.table.to_json().at("rows");
    arr.push_back(std::move(tj));
  }
  return fmt::format("{}{}{}", kBlockOpen, Json{{"tables", std::move(arr)}}.dump(), kBlockClose);
}

std::vector<ExecutedTable> parse_tables_block(std::string_view text) {
  std::vector<ExecutedTable> out;
  const auto open = text.rfind(kBlockOpen);
  if (open == std::string_view::npos) return out;
  const auto body_start = open + kBlockOpen.size();
  const auto close = text.find(kBlockClose, body_start);
  if (close == std::string_view::npos) return out;
  Json doc;
  try {
    doc = Json::parse(text.substr(body_start, close - body_start));
  } catch (const Json::parse_error&) {
    return out;
  }
  if (!doc.is_object() || !doc.contains("tables")) return out;
  for (const auto& tj : doc.at("tables")) {
    ExecutedTable t;
    t.function = tj.value("function", "");
    t.arguments = tj.value("arguments", Json::object());
    t.ticker = tj.value("ticker", "");
    t.table = ResultTable::from_json(Json{{"columns", tj.at("columns")}, {"rows", tj.at("rows")}});
    out.push_back(std::move(t));
  }
  return out;
}

AssistantRouter::AssistantRouter(const QueryLibrary& library, const MarketStore& store,
                                 const LocalRegistry& registry, llm::ChatBackend& backend,
                                 const llm::RateCard& rates, RouterConfig config)
    : library_(library),
      store_(store),
      registry_(registry),
      backend_(backend),
      rates_(rates),
      config_(std::move(config)),
      tools_(library.to_tool_specs()) {
  if (config_.max_tool_rounds < 1) {
    throw Error(ErrorKind::ConfigError, "max_tool_rounds must be at least 1");
  }
}

AnswerResult AssistantRouter::answer(const std::string& question) const {
  const auto& model_rates = rates_.rates(config_.model);
  const bool simulated = config_.timing == TimingMode::Simulated ||
                         (config_.timing == TimingMode::Auto && backend_.simulated_timing());
  const auto wall_start = Clock::now();

  AnswerResult result;
  result.question = question;
  result.model = config_.model;
  std::vector<llm::ChatMessage> messages{
      llm::ChatMessage::system(config_.system_prompt.empty() ? std::string(default_system_prompt())
                                                             : config_.system_prompt),
      llm::ChatMessage::user(question)};

  auto fail = [&](ErrorKind kind, std::string message) {
    result.failure = kind;
    result.failure_message = std::move(message);
  };

  int corrections_left = config_.self_corrections;
  for (int round = 0;; ++round) {
    if (round == config_.max_tool_rounds) {
      fail(ErrorKind::ToolRoundLimitExceeded,
           fmt::format("no final answer after {} model calls", config_.max_tool_rounds));
      break;
    }
    TraceStep call_step;
    call_step.kind = StepKind::ModelCall;
    llm::CompletionResult completion;
    const auto call_start = Clock::now();
    try {
      completion = llm::chat_complete(backend_, config_.model, messages, tools_);
    } catch (const Error& e) {
      call_step.latency = simulated ? std::chrono::nanoseconds{0} : since(call_start);
      call_step.outcome = "error";
      call_step.error = e.kind();
      call_step.error_message = e.what();
      result.trace.push_back(std::move(call_step));
      fail(e.kind(), e.what());
      break;
    }
    call_step.latency = completion.latency;
    call_step.usage = completion.usage;
    call_step.outcome = completion.has_tool_calls() ? "tool_calls" : "text";
    result.trace.push_back(call_step);

    if (!completion.has_tool_calls()) {
      result.answer_text = completion.message.content;
      if (!result.tables.empty()) result.answer_text += "\n\n" + tables_block(result.tables);
      break;
    }

    messages.push_back(completion.message);
    bool round_failed = false;
    std::optional<Error> last_error;

    std::vector<llm::ToolCallRequest> calls;
    try {
      calls = llm::parse_tool_calls(completion.message);
    } catch (const Error& e) {
      // Answer every call id with the error so the transcript stays valid.
      for (const auto& c : completion.message.tool_calls) {
        TraceStep step;
        step.kind = StepKind::ToolExecution;
        step.function = c.name;
        step.arguments = c.arguments;
        step.outcome = "rejected";
        step.error = e.kind();
        step.error_message = e.what();
        result.trace.push_back(std::move(step));
        messages.push_back(llm::ChatMessage::tool(c.id, error_payload(e).dump()));
      }
      round_failed = true;
      last_error = e;
    }

    for (const auto& call : calls) {
      TraceStep step;
      step.kind = StepKind::ToolExecution;
      step.function = call.function;
      step.arguments = call.arguments;
      const auto exec_start = Clock::now();
      try {
        auto validated = library_.validate_args(call.function, call.arguments);
        step.validated = validated;
        auto exec = library_.execute(validated, store_, registry_);
        step.template_ids = exec.template_ids;
        step.rows = exec.table.row_count();
        step.outcome = "ok";
        ExecutedTable t{validated.function, validated.args, exec.ticker, std::move(exec.table)};
        messages.push_back(
            llm::ChatMessage::tool(call.id, result_payload(t, config_.result_row_cap).dump()));
        result.tables.push_back(std::move(t));
      } catch (const Error& e) {
        step.outcome = "rejected";
        step.error = e.kind();
        step.error_message = e.what();
        messages.push_back(llm::ChatMessage::tool(call.id, error_payload(e).dump()));
        round_failed = true;
        last_error = e;
      }
      step.latency = simulated ? std::chrono::nanoseconds{0} : since(exec_start);
      result.trace.push_back(std::move(step));
    }

    if (round_failed) {
      if (corrections_left == 0) {
        fail(last_error->kind(), last_error->what());
        break;
      }
      --corrections_left;
    }
  }

  for (const auto& s : result.trace) {
    result.usage += s.usage;
    result.latency += s.latency;
  }
  result.cost = llm::cost(result.usage, model_rates);
  result.wall_time = simulated ? result.latency : since(wall_start);
  return result;
}

}  // namespace finq
