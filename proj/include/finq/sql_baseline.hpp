#pragma once

#include <chrono>
#include <filesystem>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finq/assistant_router.hpp"
#include "finq/error.hpp"
#include "finq/llm_protocol.hpp"
#include "finq/result_table.hpp"

namespace finq {

class MarketStore;

namespace sql {
class Database;
}

struct SchemaColumn {
  std::string name;
  std::string type;
  bool not_null = false;
  bool primary_key = false;
};

struct SchemaTable {
  std::string name;
  std::vector<SchemaColumn> columns;
};

/// User tables of the store in name order (bookkeeping tables excluded).
std::vector<SchemaTable> read_schema(const sql::Database& db);

struct SqlPrompt {
  std::string system;  // schema and rules
  std::string user;    // the question
  std::string text() const { return system + "\n\n" + user; }
};

/// Deterministic for a fixed schema and question.
SqlPrompt build_schema_prompt(const std::vector<SchemaTable>& schema, std::string_view question);

/// Pulls the single statement out of a model reply: code fences and prose
/// are stripped, trailing semicolons dropped. Throws NoSqlFound or
/// MultipleStatements.
std::string extract_sql(std::string_view model_output);

struct SanitizerVerdict {
  bool allowed = false;
  std::string reason;  // empty when allowed
};

/// Pure text check: the first keyword must be SELECT or WITH, a single
/// statement only, and no write, schema, transaction or attach keywords
/// outside literals and comments.
SanitizerVerdict sanitize_sql(std::string_view statement);

struct SandboxLimits {
  std::size_t max_rows = 10'000;
  std::chrono::milliseconds timeout{10'000};
};

struct SandboxResult {
  ResultTable table;
  bool truncated = false;  // more rows existed than max_rows
  std::chrono::nanoseconds elapsed{0};
};

/// Runs one statement on a fresh read-only connection guarded by an
/// authorizer (reads and functions only) and a progress-handler deadline.
/// Throws SandboxViolation, Timeout or SqlError.
SandboxResult sandbox_execute(std::string_view statement, const std::filesystem::path& store_path,
                              const SandboxLimits& limits = {});

struct GeneratedSql {
  std::string raw_text;
  std::string statement;  // empty when extraction failed
  SanitizerVerdict verdict;
  std::optional<std::size_t> rows;
  bool truncated = false;
  std::optional<ErrorKind> error;
  std::string error_message;
};

struct BaselineConfig {
  std::string model;
  int self_correct = 0;  // extra attempts after a failed statement
  SandboxLimits limits;
  TimingMode timing = TimingMode::Auto;
};

struct BaselineAnswer {
  AnswerResult answer;  // tables hold the statement's rows under function "sql"
  std::vector<GeneratedSql> attempts;
};

/// The text-to-SQL comparison system: schema prompt, generation, sanitizer,
/// sandboxed execution. Like the router it records failures instead of
/// throwing them.
class SqlBaseline {
 public:
  SqlBaseline(const MarketStore& store, llm::ChatBackend& backend, const llm::RateCard& rates,
              BaselineConfig config);
  BaselineAnswer answer(const std::string& question) const;
  const std::vector<SchemaTable>& schema() const { return schema_; }

 private:
  const MarketStore& store_;
  llm::ChatBackend& backend_;
  const llm::RateCard& rates_;
  BaselineConfig config_;
  std::vector<SchemaTable> schema_;
};

}  // namespace finq
