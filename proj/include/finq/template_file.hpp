#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finq {

namespace sql {
class Database;
}

enum class ParamType {
  Ticker,
  Date,
  PositiveInt,
  Periodicity,
  Frequency,
  Metric,
  StatementKind,
  PeriodTag,
  Choice,  // free-form enum; allowed values listed in ParamSpec::enum_values
};

std::string_view to_string(ParamType t);
std::optional<ParamType> parse_param_type(std::string_view text);

struct ParamSpec {
  std::string name;
  ParamType type = ParamType::Ticker;
  bool required = true;
  std::optional<std::string> default_value;  // canonical text form
  std::optional<std::int64_t> min;
  std::optional<std::int64_t> max;
  std::vector<std::string> enum_values;
  std::string description;

  friend bool operator==(const ParamSpec&, const ParamSpec&) = default;
};

/// A vetted parameterized statement. Placeholders are named (:name) and
/// bound at execution time; the text itself never changes.
struct QueryTemplate {
  std::string id;
  std::string description;
  std::vector<ParamSpec> params;
  std::vector<std::string> result_shape;
  std::string sql_text;

  const ParamSpec* param(std::string_view name) const;
  friend bool operator==(const QueryTemplate&, const QueryTemplate&) = default;
};

/// Parses the bundled template library format:
///
///   @template <id>
///   @description <text>
///   @param <name> <type> required|optional [default=v] [min=n] [max=n] [enum=a|b]
///   @result col1,col2,...
///   <SQL lines>
///   @end
///
/// Lines starting with '#' outside a SQL body are comments.
std::vector<QueryTemplate> parse_template_file(std::istream& in);
std::vector<QueryTemplate> load_template_file(const std::filesystem::path& path);

/// Checks a template against a database carrying the store schema: the SQL
/// must start with SELECT, compile as exactly one read-only statement, use
/// only named placeholders that match the declared params one-to-one, and
/// produce the declared result columns. Throws RegistrationError.
void check_template(const QueryTemplate& t, const sql::Database& schema_db);

/// First SQL keyword, uppercased, skipping whitespace and comments.
std::string leading_keyword(std::string_view sql);

}  // namespace finq
