#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "finq/date.hpp"
#include "finq/decimal.hpp"

namespace finq {

enum class Periodicity { Daily, Weekly, Monthly, Yearly };
enum class Frequency { Quarterly, Yearly };
enum class StatementKind { IncomeStatement, BalanceSheet, CashFlow };
enum class IndexId { Nasdaq100, SP500 };

std::string_view to_string(Periodicity p);
std::string_view to_string(Frequency f);
std::string_view to_string(StatementKind k);
std::string_view to_string(IndexId i);
std::optional<Periodicity> parse_periodicity(std::string_view text);
std::optional<Frequency> parse_frequency(std::string_view text);
std::optional<StatementKind> parse_statement_kind(std::string_view text);
std::optional<IndexId> parse_index_id(std::string_view text);

/// Fiscal period label: "2023Q2" for a quarter, "2023FY" for a full year.
/// Fiscal years are assumed to follow the calendar year.
struct PeriodTag {
  int year = 0;
  int quarter = 0;  // 1..4, or 0 for a full year

  Frequency frequency() const { return quarter == 0 ? Frequency::Yearly : Frequency::Quarterly; }
  /// Nominal period end: quarter end or December 31.
  Date nominal_end() const;
  std::string to_string() const;
  /// Accepts 2023Q2, 2023-Q2, 2023 Q2, Q2 2023, 2023FY, FY2023 and a bare
  /// year (read as a full fiscal year). Case-insensitive.
  static std::optional<PeriodTag> parse(std::string_view text);
  /// Canonical form only (2023Q2 / 2023FY), as stored.
  static std::optional<PeriodTag> parse_canonical(std::string_view text);

  friend auto operator<=>(const PeriodTag&, const PeriodTag&) = default;
};

struct PriceBar {
  std::string ticker;
  Date date;
  Decimal open;
  Decimal high;
  Decimal low;
  Decimal close;
  Decimal adj_close;
  std::int64_t volume = 0;

  friend bool operator==(const PriceBar&, const PriceBar&) = default;
};

struct FundamentalRecord {
  std::string ticker;
  PeriodTag fiscal_period;
  Date period_end_date;
  std::string metric;
  Decimal value;
  std::string unit;

  friend bool operator==(const FundamentalRecord&, const FundamentalRecord&) = default;
};

struct IndexMembership {
  IndexId index = IndexId::SP500;
  Date start;
  std::optional<Date> end;  // empty = current constituent

  bool active_on(Date d) const { return start <= d && (!end || d <= *end); }
  friend bool operator==(const IndexMembership&, const IndexMembership&) = default;
};

struct CompanyRecord {
  std::string ticker;
  std::string name;
  std::vector<std::string> aliases;
  std::vector<IndexMembership> index_memberships;

  friend bool operator==(const CompanyRecord&, const CompanyRecord&) = default;
};

struct StatementBundle {
  std::string ticker;
  StatementKind kind = StatementKind::IncomeStatement;
  std::vector<PeriodTag> periods;
  std::vector<Date> period_end_dates;
  /// metric -> one entry per period; nullopt marks a missing value.
  std::map<std::string, std::vector<std::optional<Decimal>>> line_items;
  /// metric -> unit tag
  std::map<std::string, std::string> units;
  /// Metric order as listed in the vocabulary.
  std::vector<std::string> metric_order;
};

struct LastPeriods {
  int count = 1;
  Frequency frequency = Frequency::Quarterly;
};

struct PeriodBetween {
  PeriodTag from;
  PeriodTag to;
};

using PeriodSelector = std::variant<LastPeriods, PeriodBetween>;

}  // namespace finq
