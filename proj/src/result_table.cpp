#include "finq/result_table.hpp"

#include <algorithm>
#include <cctype>

#include "finq/error.hpp"

namespace finq {

int ResultTable::column_index(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const auto& c = columns[i];
    if (c.size() == name.size() &&
        std::equal(c.begin(), c.end(), name.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) ==
                 std::tolower(static_cast<unsigned char>(b));
        })) {
      return static_cast<int>(i);
    }
  }
  return -1;
}

nlohmann::ordered_json ResultTable::to_json() const {
  nlohmann::ordered_json doc;
  doc["columns"] = columns;
  auto& out_rows = doc["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : rows) {
    auto r = nlohmann::ordered_json::array();
    for (const auto& cell : row) {
      if (cell) {
        r.push_back(*cell);
      } else {
        r.push_back(nullptr);
      }
    }
    out_rows.push_back(std::move(r));
  }
  return doc;
}

ResultTable ResultTable::from_json(const nlohmann::ordered_json& doc) {
  ResultTable t;
  if (!doc.is_object() || !doc.contains("columns") || !doc.contains("rows")) {
    throw Error(ErrorKind::ParseFailure, "result table needs columns and rows");
  }
  t.columns = doc.at("columns").get<std::vector<std::string>>();
  for (const auto& row : doc.at("rows")) {
    std::vector<Cell> cells;
    for (const auto& cell : row) {
      if (cell.is_null()) {
        cells.emplace_back(std::nullopt);
      } else if (cell.is_string()) {
        cells.emplace_back(cell.get<std::string>());
      } else {
        cells.emplace_back(cell.dump());
      }
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

ResultTable to_table(const std::vector<PriceBar>& bars) {
  ResultTable t;
  t.columns = kPriceColumns;
  for (const auto& b : bars) {
    t.rows.push_back({b.ticker, b.date.to_string(), b.open.to_string(), b.high.to_string(),
                      b.low.to_string(), b.close.to_string(), b.adj_close.to_string(),
                      std::to_string(b.volume)});
  }
  return t;
}

ResultTable to_table(const std::vector<FundamentalRecord>& records) {
  ResultTable t;
  t.columns = kFundamentalColumns;
  for (const auto& r : records) {
    t.rows.push_back({r.ticker, r.fiscal_period.to_string(), r.period_end_date.to_string(),
                      r.metric, r.value.to_string(), r.unit});
  }
  return t;
}

ResultTable to_table(const StatementBundle& bundle) {
  ResultTable t;
  t.columns = kFundamentalColumns;
  for (std::size_t p = 0; p < bundle.periods.size(); ++p) {
    for (const auto& metric : bundle.metric_order) {
      const auto& value = bundle.line_items.at(metric)[p];
      t.rows.push_back({bundle.ticker, bundle.periods[p].to_string(),
                        bundle.period_end_dates[p].to_string(), metric,
                        value ? Cell{value->to_string()} : Cell{}, bundle.units.at(metric)});
    }
  }
  return t;
}

}  // namespace finq
