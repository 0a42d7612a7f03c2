#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

struct sqlite3;
struct sqlite3_stmt;

namespace finq::sql {

class Statement;

enum class Access { ReadOnly, ReadWrite };

/// Owning SQLite connection in serialized threading mode, so one handle may be
/// shared by concurrent readers.
class Database {
 public:
  /// ReadWrite creates the file when missing.
  static Database open(const std::filesystem::path& path, Access access);

  Database(Database&&) noexcept;
  Database& operator=(Database&&) noexcept;
  ~Database();

  sqlite3* handle() const;
  Access access() const;
  const std::filesystem::path& path() const;

  void exec(std::string_view sql) const;
  /// Prepares exactly one statement; trailing text other than whitespace and
  /// semicolons is rejected.
  Statement prepare(std::string_view sql) const;

  /// Records the original text of every statement the engine starts running.
  void enable_statement_log() const;
  std::vector<std::string> statement_log() const;
  void clear_statement_log() const;

  struct State;

 private:
  explicit Database(std::unique_ptr<State> state);
  std::unique_ptr<State> state_;
};

class Statement {
 public:
  Statement(sqlite3* db, sqlite3_stmt* stmt);
  Statement(Statement&&) noexcept;
  Statement& operator=(Statement&&) noexcept;
  ~Statement();

  Statement& bind(int index, std::string_view text);
  Statement& bind(int index, std::int64_t value);
  Statement& bind_null(int index);
  /// Named placeholder including its prefix, e.g. ":ticker".
  Statement& bind(std::string_view name, std::string_view text);
  Statement& bind(std::string_view name, std::int64_t value);

  int parameter_count() const;
  std::string parameter_name(int index) const;
  bool read_only() const;

  /// Returns true while a row is available.
  bool step();
  void reset();

  int column_count() const;
  std::string column_name(int index) const;
  bool column_is_null(int index) const;
  std::optional<std::string> column_text(int index) const;
  std::string column_string(int index) const;
  std::int64_t column_int64(int index) const;

  sqlite3_stmt* handle() const { return stmt_; }
  std::string sql() const;

 private:
  int index_of(std::string_view name) const;
  sqlite3* db_ = nullptr;
  sqlite3_stmt* stmt_ = nullptr;
};

/// BEGIN IMMEDIATE on construction; rolls back unless commit() ran.
class Transaction {
 public:
  explicit Transaction(const Database& db);
  Transaction(const Transaction&) = delete;
  Transaction& operator=(const Transaction&) = delete;
  ~Transaction();
  void commit();

 private:
  const Database& db_;
  bool done_ = false;
};

}  // namespace finq::sql
