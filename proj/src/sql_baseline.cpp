#include "finq/sql_baseline.hpp"

#include <sqlite3.h>

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <regex>

#include <fmt/format.h>

#include "finq/market_store.hpp"
#include "finq/sqlite.hpp"

namespace finq {
namespace {

using Clock = std::chrono::steady_clock;

enum class TokenKind { Word, String, QuotedIdent, Number, Punct };

struct Token {
  TokenKind kind;
  std::string text;
};

struct Tokenized {
  std::vector<Token> tokens;
  bool unterminated = false;
};

bool word_char(char c) {
  const auto u = static_cast<unsigned char>(c);
  return std::isalnum(u) || c == '_' || c == '$' || u >= 0x80;
}

/// Splits SQL into tokens, dropping whitespace and comments. Literal and
/// quoted-identifier contents never surface as words.
Tokenized tokenize(std::string_view sql) {
  Tokenized out;
  std::size_t i = 0;
  auto quoted = [&](char close, TokenKind kind) {
    std::string text;
    ++i;
    while (true) {
      if (i >= sql.size()) {
        out.unterminated = true;
        break;
      }
      if (sql[i] == close) {
        if (close != ']' && i + 1 < sql.size() && sql[i + 1] == close) {
          text += close;
          i += 2;
          continue;
        }
        ++i;
        break;
      }
      text += sql[i++];
    }
    out.tokens.push_back({kind, std::move(text)});
  };
  while (i < sql.size()) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (sql.substr(i, 2) == "--") {
      auto nl = sql.find('\n', i);
      i = nl == std::string_view::npos ? sql.size() : nl + 1;
    } else if (sql.substr(i, 2) == "/*") {
      auto close = sql.find("*/", i + 2);
      i = close == std::string_view::npos ? sql.size() : close + 2;
    } else if (c == '\'') {
      quoted('\'', TokenKind::String);
    } else if (c == '"') {
      quoted('"', TokenKind::QuotedIdent);
    } else if (c == '`') {
      quoted('`', TokenKind::QuotedIdent);
    } else if (c == '[') {
      quoted(']', TokenKind::QuotedIdent);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < sql.size() && (word_char(sql[j]) || sql[j] == '.')) ++j;
      out.tokens.push_back({TokenKind::Number, std::string(sql.substr(i, j - i))});
      i = j;
    } else if (word_char(c)) {
      std::size_t j = i;
      while (j < sql.size() && word_char(sql[j])) ++j;
      std::string w;
      for (std::size_t k = i; k < j; ++k) {
        w += static_cast<char>(std::toupper(static_cast<unsigned char>(sql[k])));
      }
      out.tokens.push_back({TokenKind::Word, std::move(w)});
      i = j;
    } else {
      out.tokens.push_back({TokenKind::Punct, std::string(1, c)});
      ++i;
    }
  }
  return out;
}

bool has_trailing_statement(const std::vector<Token>& tokens) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == TokenKind::Punct && tokens[i].text == ";") {
      for (std::size_t j = i + 1; j < tokens.size(); ++j) {
        if (!(tokens[j].kind == TokenKind::Punct && tokens[j].text == ";")) return true;
      }
    }
  }
  return false;
}

constexpr std::array<std::string_view, 19> kBanned{
    "INSERT",   "UPDATE",  "DELETE",   "DROP",     "ALTER",          "ATTACH", "DETACH",
    "PRAGMA",   "CREATE",  "VACUUM",   "REINDEX",  "BEGIN",          "COMMIT", "ROLLBACK",
    "SAVEPOINT", "RELEASE", "ANALYZE", "UPSERT",   "LOAD_EXTENSION"};

const std::map<std::string, std::string>& column_notes() {
  static const std::map<std::string, std::string> kNotes{
      {"prices.ticker", "exchange ticker symbol, uppercase"},
      {"prices.date", "trading day, YYYY-MM-DD"},
      {"prices.close", "closing price as decimal text"},
      {"prices.adj_close", "adjusted closing price as decimal text"},
      {"prices.volume", "shares traded"},
      {"fundamentals.fiscal_period", "2023Q2 for a quarter, 2023FY for a fiscal year"},
      {"fundamentals.period_kind", "'quarterly' or 'yearly'"},
      {"fundamentals.period_end_date", "YYYY-MM-DD"},
      {"fundamentals.metric", "metric id, see the metrics table"},
      {"fundamentals.value", "decimal text in reporting currency units"},
      {"companies.name", "official company name"},
      {"company_aliases.alias", "alternate company name"},
      {"index_memberships.index_id", "'NASDAQ100' or 'SP500'"},
      {"index_memberships.membership_end", "NULL while the company is a constituent"},
      {"metrics.statement_kind", "'income_statement', 'balance_sheet', 'cash_flow' or NULL"},
  };
  return kNotes;
}

int authorize(void*, int action, const char*, const char* arg2, const char*, const char*) {
  switch (action) {
    case SQLITE_SELECT:
    case SQLITE_READ:
    case SQLITE_RECURSIVE:
      return SQLITE_OK;
    case SQLITE_FUNCTION: {
      std::string name = arg2 != nullptr ? arg2 : "";
      std::transform(name.begin(), name.end(), name.begin(),
                     [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
      if (name == "load_extension" || name == "readfile" || name == "writefile" ||
          name == "edit" || name == "fts3_tokenizer") {
        return SQLITE_DENY;
      }
      return SQLITE_OK;
    }
    default:
      return SQLITE_DENY;
  }
}

int progress(void* deadline) {
  return Clock::now() > *static_cast<Clock::time_point*>(deadline) ? 1 : 0;
}

}  // namespace

std::vector<SchemaTable> read_schema(const sql::Database& db) {
  std::vector<SchemaTable> tables;
  auto names = db.prepare(
      "SELECT name FROM sqlite_master WHERE type = 'table' AND name NOT LIKE 'sqlite_%' "
      "AND name <> 'store_meta' ORDER BY name");
  while (names.step()) tables.push_back({names.column_string(0), {}});
  for (auto& t : tables) {
    auto cols = db.prepare("SELECT name, type, \"notnull\", pk FROM pragma_table_info(?1) ORDER BY cid");
    cols.bind(1, t.name);
    while (cols.step()) {
      t.columns.push_back({cols.column_string(0), cols.column_string(1), cols.column_int64(2) != 0,
                           cols.column_int64(3) != 0});
    }
  }
  return tables;
}

SqlPrompt build_schema_prompt(const std::vector<SchemaTable>& schema, std::string_view question) {
  std::string s =
      "You write SQLite queries for a financial market database. Translate the user's question "
      "into exactly one SQLite SELECT statement.\n\nSchema:\n";
  const auto& notes = column_notes();
  for (const auto& t : schema) {
    s += fmt::format("CREATE TABLE {} (\n", t.name);
    std::vector<std::string> pk;
    for (std::size_t i = 0; i < t.columns.size(); ++i) {
      const auto& c = t.columns[i];
      if (c.primary_key) pk.push_back(c.name);
      std::string line = fmt::format("  {} {}{}", c.name, c.type, c.not_null ? " NOT NULL" : "");
      const bool last = i + 1 == t.columns.size() && pk.empty() &&
                        std::none_of(t.columns.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                                     t.columns.end(), [](const SchemaColumn& x) { return x.primary_key; });
      line += last ? "" : ",";
      if (auto it = notes.find(t.name + "." + c.name); it != notes.end()) {
        line += "  -- " + it->second;
      }
      s += line + "\n";
    }
    if (!pk.empty()) {
      std::string keys;
      for (const auto& k : pk) keys += (keys.empty() ? "" : ", ") + k;
      s += fmt::format("  PRIMARY KEY ({})\n", keys);
    }
    s += ");\n";
  }
  s +=
      "\nRules:\n"
      "- Numeric values are stored as decimal text; return them as stored, without casts or "
      "rounding.\n"
      "- \"The last N days\" means the N most recent trading days present in prices.\n"
      "- Include the ticker column and, for prices, the date; for fundamentals, fiscal_period "
      "and metric.\n"
      "- Reply with the SQL statement only, no explanations.";
  return {std::move(s), std::string(question)};
}

std::string extract_sql(std::string_view model_output) {
  const std::string text(model_output);
  std::string body;
  static const std::regex kFence("```[A-Za-z0-9_-]*[ \\t]*\\r?\\n?([\\s\\S]*?)```");
  static const std::regex kStart(
      "(^|\\n)[ \\t]*((SELECT|WITH|INSERT|UPDATE|DELETE|DROP|ALTER|ATTACH|DETACH|PRAGMA|CREATE|"
      "REPLACE|VACUUM|REINDEX|BEGIN|ANALYZE)\\b)",
      std::regex::icase);
  std::smatch m;
  if (std::regex_search(text, m, kFence)) {
    body = m[1].str();
  } else if (std::regex_search(text, m, kStart)) {
    body = text.substr(static_cast<std::size_t>(m.position(2)));
  } else {
    throw Error(ErrorKind::NoSqlFound, "the reply contains no SQL statement");
  }
  auto is_trim = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == ';'; };
  while (!body.empty() && is_trim(body.back())) body.pop_back();
  std::size_t lead = 0;
  while (lead < body.size() && std::isspace(static_cast<unsigned char>(body[lead]))) ++lead;
  body.erase(0, lead);
  if (body.empty()) throw Error(ErrorKind::NoSqlFound, "the SQL block is empty");
  if (has_trailing_statement(tokenize(body).tokens)) {
    throw Error(ErrorKind::MultipleStatements, "the reply contains more than one statement");
  }
  return body;
}

SanitizerVerdict sanitize_sql(std::string_view statement) {
  const auto tok = tokenize(statement);
  if (tok.unterminated) return {false, "unterminated literal or identifier"};
  if (tok.tokens.empty()) return {false, "empty statement"};
  const auto& first = tok.tokens.front();
  if (first.kind != TokenKind::Word || (first.text != "SELECT" && first.text != "WITH")) {
    return {false, "statement must start with SELECT or WITH"};
  }
  if (has_trailing_statement(tok.tokens)) return {false, "multiple statements"};
  for (const auto& t : tok.tokens) {
    if (t.kind != TokenKind::Word) continue;
    if (std::find(kBanned.begin(), kBanned.end(), t.text) != kBanned.end()) {
      return {false, fmt::format("keyword {} is not allowed", t.text)};
    }
  }
  return {true, ""};
}

SandboxResult sandbox_execute(std::string_view statement, const std::filesystem::path& store_path,
                              const SandboxLimits& limits) {
  const auto verdict = sanitize_sql(statement);
  if (!verdict.allowed) throw Error(ErrorKind::SandboxViolation, verdict.reason);

  const auto started = Clock::now();
  auto db = sql::Database::open(store_path, sql::Access::ReadOnly);
  sqlite3* h = db.handle();
  sqlite3_set_authorizer(h, authorize, nullptr);
  auto deadline = started + limits.timeout;
  sqlite3_progress_handler(h, 1000, progress, &deadline);

  const std::string text(statement);
  sqlite3_stmt* raw = nullptr;
  const char* tail = nullptr;
  int rc = sqlite3_prepare_v2(h, text.c_str(), static_cast<int>(text.size()), &raw, &tail);
  struct Finalizer {
    sqlite3_stmt* s;
    ~Finalizer() { sqlite3_finalize(s); }
  } guard{raw};
  if (rc != SQLITE_OK) {
    const std::string msg = sqlite3_errmsg(h);
    if ((rc & 0xff) == SQLITE_AUTH) throw Error(ErrorKind::SandboxViolation, msg);
    if ((rc & 0xff) == SQLITE_INTERRUPT) throw Error(ErrorKind::Timeout, "statement timed out");
    throw Error(ErrorKind::SqlError, msg);
  }
  if (raw == nullptr) throw Error(ErrorKind::SqlError, "empty statement");
  if (!tokenize(std::string_view(tail)).tokens.empty()) {
    throw Error(ErrorKind::SandboxViolation, "multiple statements");
  }
  if (sqlite3_stmt_readonly(raw) == 0) {
    throw Error(ErrorKind::SandboxViolation, "statement is not read-only");
  }

  SandboxResult out;
  const int cols = sqlite3_column_count(raw);
  for (int c = 0; c < cols; ++c) out.table.columns.emplace_back(sqlite3_column_name(raw, c));
  while (true) {
    rc = sqlite3_step(raw);
    if (rc == SQLITE_DONE) break;
    if (rc != SQLITE_ROW) {
      if ((rc & 0xff) == SQLITE_INTERRUPT) {
        throw Error(ErrorKind::Timeout,
                    fmt::format("statement exceeded {} ms", limits.timeout.count()));
      }
      throw Error(ErrorKind::SqlError, sqlite3_errmsg(h));
    }
    if (out.table.rows.size() == limits.max_rows) {
      out.truncated = true;
      break;
    }
    std::vector<Cell> row;
    for (int c = 0; c < cols; ++c) {
      if (sqlite3_column_type(raw, c) == SQLITE_NULL) {
        row.emplace_back(std::nullopt);
      } else {
        const auto* p = reinterpret_cast<const char*>(sqlite3_column_text(raw, c));
        row.emplace_back(std::string(p, static_cast<std::size_t>(sqlite3_column_bytes(raw, c))));
      }
    }
    out.table.rows.push_back(std::move(row));
  }
  out.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - started);
  return out;
}

SqlBaseline::SqlBaseline(const MarketStore& store, llm::ChatBackend& backend,
                         const llm::RateCard& rates, BaselineConfig config)
    : store_(store),
      backend_(backend),
      rates_(rates),
      config_(std::move(config)),
      schema_(read_schema(store.database())) {
  if (config_.self_correct < 0) throw Error(ErrorKind::ConfigError, "self_correct must be >= 0");
}

BaselineAnswer SqlBaseline::answer(const std::string& question) const {
  const auto& model_rates = rates_.rates(config_.model);
  const bool simulated = config_.timing == TimingMode::Simulated ||
                         (config_.timing == TimingMode::Auto && backend_.simulated_timing());
  const auto wall_start = Clock::now();

  BaselineAnswer out;
  auto& result = out.answer;
  result.question = question;
  result.model = config_.model;
  const auto prompt = build_schema_prompt(schema_, question);
  std::vector<llm::ChatMessage> messages{llm::ChatMessage::system(prompt.system),
                                         llm::ChatMessage::user(prompt.user)};

  for (int attempt = 0; attempt <= config_.self_correct; ++attempt) {
    TraceStep call_step;
    llm::CompletionResult completion;
    const auto call_start = Clock::now();
    try {
      completion = llm::chat_complete(backend_, config_.model, messages, {});
    } catch (const Error& e) {
      call_step.latency = simulated ? std::chrono::nanoseconds{0}
                                    : std::chrono::duration_cast<std::chrono::nanoseconds>(
                                          Clock::now() - call_start);
      call_step.outcome = "error";
      call_step.error = e.kind();
      call_step.error_message = e.what();
      result.trace.push_back(std::move(call_step));
      result.failure = e.kind();
      result.failure_message = e.what();
      break;
    }
    call_step.latency = completion.latency;
    call_step.usage = completion.usage;
    call_step.outcome = "text";
    result.trace.push_back(call_step);

    GeneratedSql g;
    g.raw_text = completion.message.content;
    TraceStep exec_step;
    exec_step.kind = StepKind::ToolExecution;
    exec_step.function = "sql";
    const auto exec_start = Clock::now();
    try {
      g.statement = extract_sql(g.raw_text);
      exec_step.arguments = Json{{"sql", g.statement}};
      g.verdict = sanitize_sql(g.statement);
      auto run = sandbox_execute(g.statement, store_.path(), config_.limits);
      g.rows = run.table.row_count();
      g.truncated = run.truncated;
      exec_step.outcome = "ok";
      exec_step.rows = run.table.row_count();
      result.answer_text = g.raw_text;
      result.tables.push_back({"sql", Json{{"sql", g.statement}}, "", std::move(run.table)});
    } catch (const Error& e) {
      g.error = e.kind();
      g.error_message = e.what();
      exec_step.outcome = "rejected";
      exec_step.error = e.kind();
      exec_step.error_message = e.what();
    }
    exec_step.latency = simulated ? std::chrono::nanoseconds{0}
                                  : std::chrono::duration_cast<std::chrono::nanoseconds>(
                                        Clock::now() - exec_start);
    result.trace.push_back(std::move(exec_step));
    const bool failed = g.error.has_value();
    out.attempts.push_back(g);
    if (!failed) break;
    if (attempt == config_.self_correct) {
      result.failure = g.error;
      result.failure_message = g.error_message;
      break;
    }
    messages.push_back(llm::ChatMessage::assistant(g.raw_text));
    messages.push_back(llm::ChatMessage::user(
        fmt::format("That statement failed ({}: {}). Reply with a corrected SQL statement only.",
                    to_string(*g.error), g.error_message)));
  }

  for (const auto& s : result.trace) {
    result.usage += s.usage;
    result.latency += s.latency;
  }
  result.cost = llm::cost(result.usage, model_rates);
  result.wall_time = simulated ? result.latency
                               : std::chrono::duration_cast<std::chrono::nanoseconds>(
                                     Clock::now() - wall_start);
  return out;
}

}  // namespace finq
