#include "finq/template_file.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "finq/domain.hpp"
#include "finq/error.hpp"
#include "finq/sqlite.hpp"

namespace finq {
namespace {

constexpr std::string_view kTypeNames[] = {"ticker", "date",           "positive_int",
                                           "periodicity", "frequency", "metric",
                                           "statement_kind", "period_tag", "choice"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorKind::RegistrationError, fmt::format("template file line {}: {}", line, msg));
}

std::int64_t parse_i64(std::string_view text, std::size_t line) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    fail(line, fmt::format("bad integer '{}'", text));
  }
  return v;
}

ParamSpec parse_param(std::string_view rest, std::size_t line) {
  std::istringstream words{std::string(rest)};
  std::string name, type, req;
  if (!(words >> name >> type >> req)) fail(line, "@param needs <name> <type> required|optional");
  ParamSpec p;
  p.name = name;
  auto t = parse_param_type(type);
  if (!t) fail(line, fmt::format("unknown param type '{}'", type));
  p.type = *t;
  if (req == "required") {
    p.required = true;
  } else if (req == "optional") {
    p.required = false;
  } else {
    fail(line, fmt::format("expected required|optional, got '{}'", req));
  }
  std::string opt;
  while (words >> opt) {
    auto eq = opt.find('=');
    if (eq == std::string::npos) fail(line, fmt::format("bad option '{}'", opt));
    auto key = opt.substr(0, eq);
    auto value = opt.substr(eq + 1);
    if (key == "default") {
      p.default_value = value;
    } else if (key == "min") {
      p.min = parse_i64(value, line);
    } else if (key == "max") {
      p.max = parse_i64(value, line);
    } else if (key == "enum") {
      p.enum_values = split(value, '|');
    } else {
      fail(line, fmt::format("unknown option '{}'", key));
    }
  }
  return p;
}

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_';
}

}  // namespace

std::string_view to_string(ParamType t) { return kTypeNames[static_cast<int>(t)]; }

std::optional<ParamType> parse_param_type(std::string_view text) {
  for (std::size_t i = 0; i < std::size(kTypeNames); ++i) {
    if (kTypeNames[i] == text) return static_cast<ParamType>(i);
  }
  return std::nullopt;
}

const ParamSpec* QueryTemplate::param(std::string_view name) const {
  for (const auto& p : params) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

std::vector<QueryTemplate> parse_template_file(std::istream& in) {
  std::vector<QueryTemplate> out;
  std::optional<QueryTemplate> current;
  bool in_sql = false;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const auto line = trim(raw);
    if (!in_sql && (line.empty() || line.front() == '#')) continue;

    if (line == "@end") {
      if (!current) fail(line_no, "@end without @template");
      while (!current->sql_text.empty() &&
             std::isspace(static_cast<unsigned char>(current->sql_text.back()))) {
        current->sql_text.pop_back();
      }
      if (current->sql_text.empty()) fail(line_no, "template has no SQL");
      out.push_back(std::move(*current));
      current.reset();
      in_sql = false;
      continue;
    }
    if (in_sql) {
      current->sql_text += raw;
      current->sql_text += '\n';
      continue;
    }
    if (line.starts_with("@template")) {
      if (current) fail(line_no, "nested @template (missing @end)");
      current.emplace();
      current->id = std::string(trim(line.substr(9)));
      if (current->id.empty()) fail(line_no, "@template needs an id");
      continue;
    }
    if (!current) fail(line_no, "directive outside a template");
    if (line.starts_with("@description")) {
      if (!current->description.empty()) current->description += ' ';
      current->description += trim(line.substr(12));
    } else if (line.starts_with("@param")) {
      current->params.push_back(parse_param(line.substr(6), line_no));
    } else if (line.starts_with("@result")) {
      current->result_shape = split(trim(line.substr(7)), ',');
    } else if (line.front() == '@') {
      fail(line_no, fmt::format("unknown directive '{}'", line));
    } else {
      in_sql = true;
      current->sql_text += raw;
      current->sql_text += '\n';
    }
  }
  if (current) fail(line_no, fmt::format("template '{}' is missing @end", current->id));
  return out;
}

std::vector<QueryTemplate> load_template_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read {}", path.string()));
  return parse_template_file(in);
}

std::string leading_keyword(std::string_view sql) {
  std::size_t i = 0;
  while (i < sql.size()) {
    if (std::isspace(static_cast<unsigned char>(sql[i]))) {
      ++i;
    } else if (sql.substr(i, 2) == "--") {
      auto nl = sql.find('\n', i);
      i = nl == std::string_view::npos ? sql.size() : nl + 1;
    } else if (sql.substr(i, 2) == "/*") {
      auto close = sql.find("*/", i + 2);
      i = close == std::string_view::npos ? sql.size() : close + 2;
    } else {
      break;
    }
  }
  std::string word;
  while (i < sql.size() && is_ident_char(sql[i])) {
    word += static_cast<char>(std::toupper(static_cast<unsigned char>(sql[i])));
    ++i;
  }
  return word;
}

void check_template(const QueryTemplate& t, const sql::Database& schema_db) {
  auto reject = [&](const std::string& why) {
    throw Error(ErrorKind::RegistrationError, fmt::format("template '{}': {}", t.id, why));
  };
  if (t.id.empty()) reject("empty id");
  if (leading_keyword(t.sql_text) != "SELECT") reject("first keyword must be SELECT");

  std::optional<sql::Statement> stmt;
  try {
    stmt.emplace(schema_db.prepare(t.sql_text));
  } catch (const Error& e) {
    reject(e.what());
  }
  if (!stmt->read_only()) reject("statement is not read-only");

  std::set<std::string> declared;
  for (const auto& p : t.params) {
    if (!declared.insert(p.name).second) reject(fmt::format("duplicate param '{}'", p.name));
    if (p.type == ParamType::Choice && p.enum_values.empty()) {
      reject(fmt::format("choice param '{}' lists no values", p.name));
    }
  }
  std::set<std::string> placeholders;
  for (int i = 1; i <= stmt->parameter_count(); ++i) {
    auto name = stmt->parameter_name(i);
    if (name.size() < 2 || name.front() != ':') {
      reject("only named :placeholders are allowed");
    }
    placeholders.insert(name.substr(1));
  }
  if (placeholders != declared) {
    std::string missing, unused;
    for (const auto& p : placeholders) {
      if (!declared.contains(p)) missing += " " + p;
    }
    for (const auto& d : declared) {
      if (!placeholders.contains(d)) unused += " " + d;
    }
    reject(fmt::format("placeholders and params differ (no spec:{}; unused spec:{})",
                       missing.empty() ? " -" : missing, unused.empty() ? " -" : unused));
  }

  std::vector<std::string> columns;
  for (int i = 0; i < stmt->column_count(); ++i) columns.push_back(stmt->column_name(i));
  if (columns != t.result_shape) reject("result columns differ from @result");
}

}  // namespace finq
