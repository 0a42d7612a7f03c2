#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "finq/domain.hpp"

namespace finq {

using Cell = std::optional<std::string>;

/// Tabular query output. Cells are canonical text (ISO dates, canonical
/// decimals, integers); nullopt marks a missing value.
struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  std::size_t row_count() const { return rows.size(); }
  /// Case-insensitive lookup; -1 when absent.
  int column_index(std::string_view name) const;

  nlohmann::ordered_json to_json() const;
  static ResultTable from_json(const nlohmann::ordered_json& doc);

  friend bool operator==(const ResultTable&, const ResultTable&) = default;
};

inline const std::vector<std::string> kPriceColumns{"ticker", "date",  "open",      "high",
                                                    "low",    "close", "adj_close", "volume"};
inline const std::vector<std::string> kFundamentalColumns{
    "ticker", "fiscal_period", "period_end_date", "metric", "value", "unit"};

ResultTable to_table(const std::vector<PriceBar>& bars);
ResultTable to_table(const std::vector<FundamentalRecord>& records);
/// Long format: one row per (period, metric), periods ascending, metrics in
/// vocabulary order, missing values as null.
ResultTable to_table(const StatementBundle& bundle);

}  // namespace finq
