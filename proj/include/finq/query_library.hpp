#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "finq/json.hpp"
#include "finq/llm_protocol.hpp"
#include "finq/metric_vocabulary.hpp"
#include "finq/result_table.hpp"
#include "finq/template_file.hpp"

namespace finq {

class MarketStore;
class LocalRegistry;

/// Parameters of a group are used together; at most one group of a function
/// may appear in a call. When none appears, default_group is filled in from
/// its members' defaults.
struct ParamGroup {
  std::vector<std::string> members;
};

struct LinkingFunction {
  std::string name;
  std::string description;
  std::vector<ParamSpec> params;
  std::vector<ParamGroup> exclusive_groups;
  int default_group = -1;
  std::vector<std::string> template_ids;
  /// Cross-parameter checks and derived defaults, run after per-param
  /// coercion. Throws InvalidParameter.
  std::function<void(Json&)> finalize;

  const ParamSpec* param(std::string_view name) const;
  /// Index of the exclusive group holding the param, or -1.
  int group_of(std::string_view param) const;
};

/// The complete, coerced argument set of one call: every value canonical,
/// defaults filled, keys in declaration order.
struct ValidatedArgs {
  std::string function;
  Json args;
  friend bool operator==(const ValidatedArgs&, const ValidatedArgs&) = default;
};

struct ExecutionResult {
  ResultTable table;
  std::string ticker;                     // resolved store ticker
  std::vector<std::string> template_ids;  // templates run, in order
  std::chrono::nanoseconds elapsed{0};
};

/// Default location of the bundled template file.
std::filesystem::path default_template_path();
/// Default location of the bundled metric vocabulary.
std::filesystem::path default_vocabulary_path();

/// Start of a calendar lookback ending on `latest` (inclusive on both ends):
/// one day after `latest` minus count units. unit is weeks, months or years.
Date lookback_start(Date latest, int count, std::string_view unit);

class QueryLibrary;

class LibraryBuilder {
 public:
  explicit LibraryBuilder(MetricVocabulary vocabulary);
  /// Throws RegistrationError on duplicate ids or failing template checks.
  LibraryBuilder& add_template(QueryTemplate t);
  /// Throws RegistrationError on duplicate names, unknown template ids,
  /// group members that are not params, or defaults violating constraints.
  LibraryBuilder& add_function(LinkingFunction f);
  QueryLibrary build() &&;

 private:
  MetricVocabulary vocabulary_;
  std::vector<QueryTemplate> templates_;
  std::vector<LinkingFunction> functions_;
};

/// The vetted query surface: linking functions over hand-reviewed templates.
/// Immutable once built; all members are safe to call concurrently.
class QueryLibrary {
 public:
  /// The bundled templates plus get_stock_price, get_fundamental_metric and
  /// get_financial_statement.
  static QueryLibrary standard(MetricVocabulary vocabulary,
                               const std::filesystem::path& template_file = default_template_path());

  const std::vector<LinkingFunction>& catalog() const { return functions_; }
  const LinkingFunction* function(std::string_view name) const;
  const std::vector<QueryTemplate>& templates() const { return templates_; }
  const QueryTemplate* find_template(std::string_view id) const;
  const MetricVocabulary& vocabulary() const { return vocabulary_; }

  /// Throws UnknownFunction, MissingParameter, InvalidParameter.
  ValidatedArgs validate_args(std::string_view function, const Json& raw_args) const;

  /// Runs the function's templates with bound values only. Ticker arguments
  /// may be a ticker or a registered company name or alias. Throws
  /// UnknownTicker, UnknownCompany, InsufficientData, EmptyRange.
  ExecutionResult execute(const ValidatedArgs& args, const MarketStore& store,
                          const LocalRegistry& registry) const;
  ExecutionResult execute(const ValidatedArgs& args, const MarketStore& store) const;

  std::vector<llm::ToolSpec> to_tool_specs() const;

  /// Every statement text the library can run.
  std::set<std::string> statement_texts() const;

 private:
  friend class LibraryBuilder;
  QueryLibrary(MetricVocabulary vocabulary, std::vector<QueryTemplate> templates,
               std::vector<LinkingFunction> functions);

  MetricVocabulary vocabulary_;
  std::vector<QueryTemplate> templates_;
  std::vector<LinkingFunction> functions_;
};

}  // namespace finq
