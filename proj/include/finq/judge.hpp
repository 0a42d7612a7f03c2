#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finq/domain.hpp"
#include "finq/json.hpp"
#include "finq/result_table.hpp"

namespace finq {

class MarketStore;
struct AnswerResult;

/// What a benchmark question asks for, stated relative to the store so the
/// oracle can be recomputed against any data set.
struct ExpectedResult {
  enum class Kind { Price, Fundamental, Statement };
  Kind kind = Kind::Price;
  std::string ticker;
  // price windows: exactly one of n_days, lookback, or start/end
  std::optional<int> n_days;
  std::optional<int> lookback_count;
  std::string lookback_unit;  // days | weeks | months | years
  std::optional<Date> start;
  std::optional<Date> end;
  Periodicity periodicity = Periodicity::Daily;
  // fundamentals and statements
  std::string metric;
  std::optional<StatementKind> statement;
  int n_periods = 1;
  Frequency frequency = Frequency::Quarterly;
  std::optional<PeriodTag> from_period;
  std::optional<PeriodTag> to_period;
  /// Value columns that must match; keys (date / fiscal_period / metric)
  /// are always compared.
  std::vector<std::string> fields;

  static ExpectedResult from_json(const Json& doc);
  Json to_json() const;
};

/// The oracle answer, computed through the store's own operations.
ResultTable oracle_table(const ExpectedResult& expected, const MarketStore& store);

enum class FailureClass { None, WrongEntity, WrongCount, WrongValues, Error, NoToolCall };
std::string_view to_string(FailureClass c);

struct Judgement {
  bool success = false;
  FailureClass failure = FailureClass::None;
  std::string detail;
};

/// Compares a returned table with the oracle: entity (ticker column, when
/// present), then row count, then the key and field values, exactly and
/// independent of row order.
Judgement judge_table(const ExpectedResult& expected, const ResultTable& oracle,
                      const ResultTable& returned);

/// Judges a function-calling answer. A recorded failure is "error"; an
/// answer without any executed table is "no-tool-call" (or "error" when
/// tools were called but none succeeded). The last executed table is judged.
Judgement judge_success(const ExpectedResult& expected, const ResultTable& oracle,
                        const AnswerResult& result);

}  // namespace finq
