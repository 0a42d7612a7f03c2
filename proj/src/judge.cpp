#include "finq/judge.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <fmt/format.h>

#include "finq/assistant_router.hpp"
#include "finq/error.hpp"
#include "finq/market_store.hpp"
#include "finq/query_library.hpp"

namespace finq {
namespace {

[[noreturn]] void descriptor_error(const std::string& what) {
  throw Error(ErrorKind::ParseFailure, fmt::format("expected-result descriptor: {}", what));
}

std::string upper(std::string_view s) {
  std::string out;
  for (char c : s) out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

/// Dates may come back with a time suffix from generated SQL.
std::string key_text(const Cell& cell) {
  if (!cell) return "<null>";
  const auto& s = *cell;
  if (s.size() > 10 && Date::parse(std::string_view(s).substr(0, 10))) return s.substr(0, 10);
  return s;
}

bool same_value(const Cell& a, const Cell& b) {
  if (!a || !b) return !a && !b;
  if (*a == *b) return true;
  auto da = Decimal::parse(*a);
  auto db = Decimal::parse(*b);
  return da && db && *da == *db;
}

}  // namespace

ExpectedResult ExpectedResult::from_json(const Json& doc) {
  if (!doc.is_object()) descriptor_error("not an object");
  ExpectedResult e;
  const auto kind = doc.value("kind", "");
  if (kind == "price") {
    e.kind = Kind::Price;
  } else if (kind == "fundamental") {
    e.kind = Kind::Fundamental;
  } else if (kind == "statement") {
    e.kind = Kind::Statement;
  } else {
    descriptor_error(fmt::format("unknown kind '{}'", kind));
  }
  e.ticker = doc.value("ticker", "");
  if (e.ticker.empty()) descriptor_error("missing ticker");
  if (doc.contains("fields")) e.fields = doc.at("fields").get<std::vector<std::string>>();

  if (e.kind == Kind::Price) {
    if (e.fields.empty()) e.fields = {"close"};
    int windows = 0;
    if (doc.contains("n_days")) {
      e.n_days = doc.at("n_days").get<int>();
      ++windows;
    }
    if (doc.contains("lookback")) {
      e.lookback_count = doc.at("lookback").at("count").get<int>();
      e.lookback_unit = doc.at("lookback").at("unit").get<std::string>();
      ++windows;
    }
    if (doc.contains("start") || doc.contains("end")) {
      e.start = Date::parse(doc.value("start", ""));
      e.end = Date::parse(doc.value("end", ""));
      if (!e.start || !e.end) descriptor_error("start and end must be dates");
      ++windows;
    }
    if (windows != 1) descriptor_error("price needs exactly one of n_days, lookback, start/end");
    auto p = parse_periodicity(doc.value("periodicity", "daily"));
    if (!p) descriptor_error("bad periodicity");
    e.periodicity = *p;
  } else {
    if (e.fields.empty()) e.fields = {"value"};
    auto f = parse_frequency(doc.value("frequency", "quarterly"));
    if (!f) descriptor_error("bad frequency");
    e.frequency = *f;
    e.n_periods = doc.value("n_periods", 1);
    if (e.kind == Kind::Fundamental) {
      e.metric = doc.value("metric", "");
      if (e.metric.empty()) descriptor_error("missing metric");
    } else {
      e.statement = parse_statement_kind(doc.value("statement", ""));
      if (!e.statement) descriptor_error("bad statement");
      if (doc.contains("from") || doc.contains("to")) {
        e.from_period = PeriodTag::parse_canonical(doc.value("from", ""));
        e.to_period = PeriodTag::parse_canonical(doc.value("to", ""));
        if (!e.from_period || !e.to_period) descriptor_error("bad from/to period");
        e.frequency = e.from_period->frequency();
      }
    }
  }
  return e;
}

Json ExpectedResult::to_json() const {
  Json doc;
  switch (kind) {
    case Kind::Price: doc["kind"] = "price"; break;
    case Kind::Fundamental: doc["kind"] = "fundamental"; break;
    case Kind::Statement: doc["kind"] = "statement"; break;
  }
  doc["ticker"] = ticker;
  if (kind == Kind::Price) {
    if (n_days) doc["n_days"] = *n_days;
    if (lookback_count) doc["lookback"] = {{"count", *lookback_count}, {"unit", lookback_unit}};
    if (start) doc["start"] = start->to_string();
    if (end) doc["end"] = end->to_string();
    doc["periodicity"] = to_string(periodicity);
  } else {
    if (kind == Kind::Fundamental) doc["metric"] = metric;
    if (kind == Kind::Statement) doc["statement"] = to_string(*statement);
    if (from_period) {
      doc["from"] = from_period->to_string();
      doc["to"] = to_period->to_string();
    } else {
      doc["n_periods"] = n_periods;
      doc["frequency"] = to_string(frequency);
    }
  }
  doc["fields"] = fields;
  return doc;
}

ResultTable oracle_table(const ExpectedResult& e, const MarketStore& store) {
  switch (e.kind) {
    case ExpectedResult::Kind::Price: {
      const bool trading_days = e.n_days || (e.lookback_count && e.lookback_unit == "days");
      if (trading_days) {
        const int n = e.n_days ? *e.n_days : *e.lookback_count;
        auto bars = store.last_n_trading_days(e.ticker, n);
        if (e.periodicity != Periodicity::Daily) {
          bars = store.price_range(e.ticker, bars.front().date, bars.back().date, e.periodicity);
        }
        return to_table(bars);
      }
      if (e.lookback_count) {
        auto latest = store.latest_price_date(e.ticker);
        if (!latest) throw Error(ErrorKind::EmptyRange, fmt::format("no {} prices", e.ticker));
        const auto start = lookback_start(*latest, *e.lookback_count, e.lookback_unit);
        return to_table(store.price_range(e.ticker, start, *latest, e.periodicity));
      }
      return to_table(store.price_range(e.ticker, *e.start, *e.end, e.periodicity));
    }
    case ExpectedResult::Kind::Fundamental:
      return to_table(store.fundamental_series(e.ticker, e.metric, e.n_periods, e.frequency));
    case ExpectedResult::Kind::Statement: {
      PeriodSelector selector = LastPeriods{e.n_periods, e.frequency};
      if (e.from_period) selector = PeriodBetween{*e.from_period, *e.to_period};
      return to_table(store.statement(e.ticker, *e.statement, selector));
    }
  }
  return {};
}

std::string_view to_string(FailureClass c) {
  switch (c) {
    case FailureClass::None: return "none";
    case FailureClass::WrongEntity: return "wrong-entity";
    case FailureClass::WrongCount: return "wrong-count";
    case FailureClass::WrongValues: return "wrong-values";
    case FailureClass::Error: return "error";
    case FailureClass::NoToolCall: return "no-tool-call";
  }
  return "error";
}

Judgement judge_table(const ExpectedResult& expected, const ResultTable& oracle,
                      const ResultTable& returned) {
  auto failed = [](FailureClass c, std::string detail) {
    return Judgement{false, c, std::move(detail)};
  };

  const int ticker_col = returned.column_index("ticker");
  if (ticker_col >= 0) {
    for (const auto& row : returned.rows) {
      const auto t = row.at(ticker_col) ? upper(*row.at(ticker_col)) : std::string("<null>");
      if (t != upper(expected.ticker)) {
        return failed(FailureClass::WrongEntity,
                      fmt::format("returned data for {}, expected {}", t, expected.ticker));
      }
    }
  }
  if (returned.row_count() != oracle.row_count()) {
    return failed(FailureClass::WrongCount, fmt::format("{} rows returned, {} expected",
                                                        returned.row_count(), oracle.row_count()));
  }

  // Key columns identify a row independent of order.
  std::vector<std::string> keys;
  if (expected.kind == ExpectedResult::Kind::Price) {
    keys = {"date"};
  } else {
    keys = {returned.column_index("fiscal_period") >= 0 ? "fiscal_period" : "period_end_date"};
    if (expected.kind == ExpectedResult::Kind::Statement) keys.push_back("metric");
  }
  std::vector<int> oracle_keys, returned_keys;
  for (const auto& k : keys) {
    oracle_keys.push_back(oracle.column_index(k));
    returned_keys.push_back(returned.column_index(k));
    if (returned_keys.back() < 0) {
      return failed(FailureClass::WrongValues, fmt::format("result lacks key column '{}'", k));
    }
  }

  std::vector<int> oracle_fields, returned_fields;
  for (const auto& f : expected.fields) {
    oracle_fields.push_back(oracle.column_index(f));
    int idx = returned.column_index(f);
    if (idx < 0 && expected.fields.size() == 1) {
      // A single value column under another name (e.g. "close AS price").
      std::vector<int> others;
      for (std::size_t c = 0; c < returned.columns.size(); ++c) {
        const auto& name = returned.columns[c];
        const bool is_key = std::any_of(keys.begin(), keys.end(), [&](const std::string& k) {
          return returned.column_index(k) == static_cast<int>(c);
        });
        if (!is_key && upper(name) != "TICKER") others.push_back(static_cast<int>(c));
      }
      if (others.size() == 1) idx = others.front();
    }
    if (idx < 0) return failed(FailureClass::WrongValues, fmt::format("result lacks column '{}'", f));
    returned_fields.push_back(idx);
  }

  auto key_of = [](const std::vector<Cell>& row, const std::vector<int>& cols) {
    std::string k;
    for (int c : cols) k += key_text(row.at(c)) + "\x1f";
    return k;
  };
  std::map<std::string, const std::vector<Cell>*> by_key;
  for (const auto& row : oracle.rows) by_key.emplace(key_of(row, oracle_keys), &row);

  std::set<std::string> seen;
  for (const auto& row : returned.rows) {
    const auto k = key_of(row, returned_keys);
    auto it = by_key.find(k);
    if (it == by_key.end() || !seen.insert(k).second) {
      return failed(FailureClass::WrongValues, fmt::format("unexpected row key {}", k));
    }
    for (std::size_t f = 0; f < expected.fields.size(); ++f) {
      const auto& want = it->second->at(oracle_fields[f]);
      const auto& got = row.at(returned_fields[f]);
      if (!same_value(want, got)) {
        return failed(FailureClass::WrongValues,
                      fmt::format("{} at {}: got {}, expected {}", expected.fields[f], k,
                                  got.value_or("null"), want.value_or("null")));
      }
    }
  }
  return {true, FailureClass::None, ""};
}

Judgement judge_success(const ExpectedResult& expected, const ResultTable& oracle,
                        const AnswerResult& result) {
  if (!result.ok()) {
    return {false, FailureClass::Error,
            fmt::format("{}: {}", to_string(*result.failure), result.failure_message)};
  }
  if (result.tables.empty()) {
    if (result.called_tools()) return {false, FailureClass::Error, "no tool call succeeded"};
    return {false, FailureClass::NoToolCall, "the model answered without calling a function"};
  }
  return judge_table(expected, oracle, result.tables.back().table);
}

}  // namespace finq
