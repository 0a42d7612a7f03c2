#include "finq/sqlite.hpp"

#include <sqlite3.h>

#include <cctype>
#include <mutex>

#include <fmt/format.h>

#include "finq/error.hpp"

namespace finq::sql {

struct Database::State {
  sqlite3* db = nullptr;
  Access access = Access::ReadOnly;
  std::filesystem::path path;
  mutable std::mutex log_mutex;
  std::vector<std::string> log;
  bool logging = false;

  ~State() {
    if (db != nullptr) sqlite3_close_v2(db);
  }
};

namespace {

[[noreturn]] void fail(sqlite3* db, std::string_view what) {
  throw Error(ErrorKind::StoreError,
              fmt::format("{}: {}", what, db != nullptr ? sqlite3_errmsg(db) : "no connection"));
}

int trace_callback(unsigned type, void* ctx, void* p, void* /*x*/) {
  if (type != SQLITE_TRACE_STMT) return 0;
  auto* state = static_cast<Database::State*>(ctx);
  const char* text = sqlite3_sql(static_cast<sqlite3_stmt*>(p));
  std::lock_guard lock(state->log_mutex);
  if (state->logging) state->log.emplace_back(text != nullptr ? text : "");
  return 0;
}

bool only_trailing_noise(const char* tail) {
  if (tail == nullptr) return true;
  for (const char* p = tail; *p != '\0'; ++p) {
    if (!std::isspace(static_cast<unsigned char>(*p)) && *p != ';') return false;
  }
  return true;
}

}  // namespace

Database::Database(std::unique_ptr<State> state) : state_(std::move(state)) {}
Database::Database(Database&&) noexcept = default;
Database& Database::operator=(Database&&) noexcept = default;
Database::~Database() = default;

Database Database::open(const std::filesystem::path& path, Access access) {
  auto state = std::make_unique<State>();
  state->access = access;
  state->path = path;
  int flags = SQLITE_OPEN_FULLMUTEX;
  flags |= access == Access::ReadOnly ? SQLITE_OPEN_READONLY
                                      : (SQLITE_OPEN_READWRITE | SQLITE_OPEN_CREATE);
  const int rc = sqlite3_open_v2(path.c_str(), &state->db, flags, nullptr);
  if (rc != SQLITE_OK) {
    std::string msg = state->db != nullptr ? sqlite3_errmsg(state->db) : "out of memory";
    throw Error(ErrorKind::StoreError, fmt::format("cannot open store {}: {}", path.string(), msg));
  }
  sqlite3_extended_result_codes(state->db, 1);
  sqlite3_busy_timeout(state->db, 5000);
  return Database(std::move(state));
}

sqlite3* Database::handle() const { return state_->db; }
Access Database::access() const { return state_->access; }
const std::filesystem::path& Database::path() const { return state_->path; }

void Database::exec(std::string_view sql) const {
  char* err = nullptr;
  const std::string text(sql);
  if (sqlite3_exec(state_->db, text.c_str(), nullptr, nullptr, &err) != SQLITE_OK) {
    std::string msg = err != nullptr ? err : "unknown error";
    sqlite3_free(err);
    throw Error(ErrorKind::StoreError, msg);
  }
}

Statement Database::prepare(std::string_view sql) const {
  sqlite3_stmt* stmt = nullptr;
  const char* tail = nullptr;
  const int rc = sqlite3_prepare_v2(state_->db, sql.data(), static_cast<int>(sql.size()), &stmt,
                                    &tail);
  if (rc != SQLITE_OK) fail(state_->db, "prepare failed");
  if (stmt == nullptr) throw Error(ErrorKind::StoreError, "empty statement");
  Statement out(state_->db, stmt);
  const char* end = sql.data() + sql.size();
  if (tail != nullptr && tail < end && !only_trailing_noise(std::string(tail, end).c_str())) {
    throw Error(ErrorKind::StoreError, "more than one statement");
  }
  return out;
}

void Database::enable_statement_log() const {
  {
    std::lock_guard lock(state_->log_mutex);
    state_->logging = true;
  }
  sqlite3_trace_v2(state_->db, SQLITE_TRACE_STMT, &trace_callback, state_.get());
}

std::vector<std::string> Database::statement_log() const {
  std::lock_guard lock(state_->log_mutex);
  return state_->log;
}

void Database::clear_statement_log() const {
  std::lock_guard lock(state_->log_mutex);
  state_->log.clear();
}

Statement::Statement(sqlite3* db, sqlite3_stmt* stmt) : db_(db), stmt_(stmt) {}

Statement::Statement(Statement&& other) noexcept
    : db_(std::exchange(other.db_, nullptr)), stmt_(std::exchange(other.stmt_, nullptr)) {}

Statement& Statement::operator=(Statement&& other) noexcept {
  if (this != &other) {
    if (stmt_ != nullptr) sqlite3_finalize(stmt_);
    db_ = std::exchange(other.db_, nullptr);
    stmt_ = std::exchange(other.stmt_, nullptr);
  }
  return *this;
}

Statement::~Statement() {
  if (stmt_ != nullptr) sqlite3_finalize(stmt_);
}

Statement& Statement::bind(int index, std::string_view text) {
  if (sqlite3_bind_text(stmt_, index, text.data(), static_cast<int>(text.size()),
                        SQLITE_TRANSIENT) != SQLITE_OK) {
    fail(db_, "bind failed");
  }
  return *this;
}

Statement& Statement::bind(int index, std::int64_t value) {
  if (sqlite3_bind_int64(stmt_, index, value) != SQLITE_OK) fail(db_, "bind failed");
  return *this;
}

Statement& Statement::bind_null(int index) {
  if (sqlite3_bind_null(stmt_, index) != SQLITE_OK) fail(db_, "bind failed");
  return *this;
}

int Statement::index_of(std::string_view name) const {
  const std::string key(name);
  const int index = sqlite3_bind_parameter_index(stmt_, key.c_str());
  if (index == 0) throw Error(ErrorKind::StoreError, fmt::format("no placeholder {}", name));
  return index;
}

Statement& Statement::bind(std::string_view name, std::string_view text) {
  return bind(index_of(name), text);
}

Statement& Statement::bind(std::string_view name, std::int64_t value) {
  return bind(index_of(name), value);
}

int Statement::parameter_count() const { return sqlite3_bind_parameter_count(stmt_); }

std::string Statement::parameter_name(int index) const {
  const char* name = sqlite3_bind_parameter_name(stmt_, index);
  return name != nullptr ? name : "";
}

bool Statement::read_only() const { return sqlite3_stmt_readonly(stmt_) != 0; }

bool Statement::step() {
  const int rc = sqlite3_step(stmt_);
  if (rc == SQLITE_ROW) return true;
  if (rc == SQLITE_DONE) return false;
  if ((rc & 0xff) == SQLITE_CONSTRAINT) {
    throw Error(ErrorKind::DuplicateKey, sqlite3_errmsg(db_));
  }
  if ((rc & 0xff) == SQLITE_INTERRUPT) throw Error(ErrorKind::Timeout, "statement interrupted");
  fail(db_, "step failed");
}

void Statement::reset() {
  sqlite3_reset(stmt_);
  sqlite3_clear_bindings(stmt_);
}

int Statement::column_count() const { return sqlite3_column_count(stmt_); }

std::string Statement::column_name(int index) const {
  const char* name = sqlite3_column_name(stmt_, index);
  return name != nullptr ? name : "";
}

bool Statement::column_is_null(int index) const {
  return sqlite3_column_type(stmt_, index) == SQLITE_NULL;
}

std::optional<std::string> Statement::column_text(int index) const {
  if (column_is_null(index)) return std::nullopt;
  const auto* text = reinterpret_cast<const char*>(sqlite3_column_text(stmt_, index));
  const int size = sqlite3_column_bytes(stmt_, index);
  return std::string(text != nullptr ? text : "", static_cast<std::size_t>(size));
}

std::string Statement::column_string(int index) const {
  return column_text(index).value_or("");
}

std::int64_t Statement::column_int64(int index) const {
  return sqlite3_column_int64(stmt_, index);
}

std::string Statement::sql() const {
  const char* text = sqlite3_sql(stmt_);
  return text != nullptr ? text : "";
}

Transaction::Transaction(const Database& db) : db_(db) { db_.exec("BEGIN IMMEDIATE"); }

Transaction::~Transaction() {
  if (!done_) {
    try {
      db_.exec("ROLLBACK");
    } catch (...) {
    }
  }
}

void Transaction::commit() {
  db_.exec("COMMIT");
  done_ = true;
}

}  // namespace finq::sql
