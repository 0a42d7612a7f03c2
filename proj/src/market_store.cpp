#include "finq/market_store.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <set>

#include <fmt/format.h>

#include "finq/csv.hpp"
#include "finq/error.hpp"

namespace finq {
namespace {

constexpr std::string_view kSchema = R"sql(
CREATE TABLE IF NOT EXISTS store_meta (
  key   TEXT PRIMARY KEY,
  value TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS metrics (
  metric         TEXT PRIMARY KEY,
  statement_kind TEXT,
  unit_kind      TEXT NOT NULL,
  synonyms       TEXT NOT NULL,
  ordinal        INTEGER NOT NULL
);
CREATE TABLE IF NOT EXISTS companies (
  ticker TEXT PRIMARY KEY,
  name   TEXT NOT NULL
);
CREATE TABLE IF NOT EXISTS company_aliases (
  ticker TEXT NOT NULL,
  alias  TEXT NOT NULL,
  PRIMARY KEY (ticker, alias)
);
CREATE TABLE IF NOT EXISTS index_memberships (
  ticker           TEXT NOT NULL,
  index_id         TEXT NOT NULL,
  membership_start TEXT NOT NULL,
  membership_end   TEXT,
  PRIMARY KEY (ticker, index_id, membership_start)
);
CREATE TABLE IF NOT EXISTS prices (
  ticker    TEXT NOT NULL,
  date      TEXT NOT NULL,
  open      TEXT NOT NULL,
  high      TEXT NOT NULL,
  low       TEXT NOT NULL,
  close     TEXT NOT NULL,
  adj_close TEXT NOT NULL,
  volume    INTEGER NOT NULL,
  PRIMARY KEY (ticker, date)
);
CREATE TABLE IF NOT EXISTS fundamentals (
  ticker          TEXT NOT NULL,
  fiscal_period   TEXT NOT NULL,
  period_kind     TEXT NOT NULL,
  period_end_date TEXT NOT NULL,
  metric          TEXT NOT NULL,
  value           TEXT NOT NULL,
  unit            TEXT NOT NULL,
  PRIMARY KEY (ticker, fiscal_period, metric)
);
CREATE INDEX IF NOT EXISTS fundamentals_by_metric
  ON fundamentals (ticker, metric, period_kind, period_end_date);
)sql";

std::string header_of(const std::vector<std::string>& fields) {
  std::string out;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) out += ',';
    out += fields[i];
  }
  return out;
}

void expect_header(CsvReader& reader, std::string_view expected) {
  std::vector<std::string> fields;
  if (!reader.next(fields)) {
    throw Error(ErrorKind::MalformedHeader, fmt::format("missing header, expected '{}'", expected));
  }
  if (!fields.empty() && fields[0].starts_with("\xEF\xBB\xBF")) fields[0].erase(0, 3);
  const auto got = header_of(fields);
  if (got != expected) {
    throw Error(ErrorKind::MalformedHeader,
                fmt::format("header '{}' does not match '{}'", got, expected));
  }
}

bool valid_ticker(std::string_view t) {
  if (t.empty() || t.size() > 12) return false;
  if (!std::isupper(static_cast<unsigned char>(t[0])) &&
      !std::isdigit(static_cast<unsigned char>(t[0]))) {
    return false;
  }
  return std::all_of(t.begin(), t.end(), [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isupper(u) || std::isdigit(u) || c == '.' || c == '-';
  });
}

std::optional<std::int64_t> parse_int(std::string_view text) {
  std::int64_t v = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end || text.empty()) return std::nullopt;
  return v;
}

Decimal column_decimal(const sql::Statement& stmt, int index) {
  auto text = stmt.column_string(index);
  auto d = Decimal::parse(text);
  if (!d) throw Error(ErrorKind::StoreError, fmt::format("corrupt decimal '{}' in store", text));
  return *d;
}

Date column_date(const sql::Statement& stmt, int index) {
  auto text = stmt.column_string(index);
  auto d = Date::parse(text);
  if (!d) throw Error(ErrorKind::StoreError, fmt::format("corrupt date '{}' in store", text));
  return *d;
}

struct RowCollector {
  IngestReport report;
  void reject(std::size_t line, std::string reason, std::string detail = {}) {
    ++report.rows;
    ++report.rejected;
    report.rejections.push_back({line, std::move(reason), std::move(detail)});
  }
  void accept() {
    ++report.rows;
    ++report.loaded;
  }
};

std::vector<std::string> split_on(std::string_view text, char sep) {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? text.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

MarketStore::MarketStore(sql::Database db, MetricVocabulary vocabulary)
    : db_(std::move(db)), vocabulary_(std::move(vocabulary)) {}

namespace {

MetricVocabulary read_vocabulary(const sql::Database& db) {
  int version = 0;
  {
    auto stmt = db.prepare("SELECT value FROM store_meta WHERE key = 'vocabulary_version'");
    if (stmt.step()) version = static_cast<int>(parse_int(stmt.column_string(0)).value_or(0));
  }
  std::vector<MetricInfo> metrics;
  auto stmt = db.prepare(
      "SELECT metric, statement_kind, unit_kind, synonyms FROM metrics ORDER BY ordinal");
  while (stmt.step()) {
    MetricInfo info;
    info.id = stmt.column_string(0);
    if (auto kind = stmt.column_text(1)) info.statement = parse_statement_kind(*kind);
    info.unit_kind = stmt.column_string(2);
    info.synonyms = split_on(stmt.column_string(3), '|');
    metrics.push_back(std::move(info));
  }
  return MetricVocabulary::from_metrics(version, std::move(metrics));
}

}  // namespace

MarketStore MarketStore::create(const std::filesystem::path& path,
                                const MetricVocabulary& vocabulary) {
  auto db = sql::Database::open(path, sql::Access::ReadWrite);
  db.exec(kSchema);
  auto existing = read_vocabulary(db);
  if (existing.all().empty()) {
    sql::Transaction tx(db);
    auto meta = db.prepare(
        "INSERT OR REPLACE INTO store_meta (key, value) VALUES ('vocabulary_version', ?1)");
    meta.bind(1, std::to_string(vocabulary.version()));
    meta.step();
    auto insert = db.prepare(
        "INSERT INTO metrics (metric, statement_kind, unit_kind, synonyms, ordinal) "
        "VALUES (?1, ?2, ?3, ?4, ?5)");
    for (const auto& m : vocabulary.all()) {
      insert.reset();
      insert.bind(1, m.id);
      if (m.statement) {
        insert.bind(2, to_string(*m.statement));
      } else {
        insert.bind_null(2);
      }
      insert.bind(3, m.unit_kind);
      std::string syns;
      for (std::size_t i = 0; i < m.synonyms.size(); ++i) {
        if (i > 0) syns += '|';
        syns += m.synonyms[i];
      }
      insert.bind(4, syns);
      insert.bind(5, static_cast<std::int64_t>(m.ordinal));
      insert.step();
    }
    tx.commit();
    existing = read_vocabulary(db);
  } else if (existing.version() != vocabulary.version()) {
    throw Error(ErrorKind::ConfigError,
                fmt::format("store uses metric vocabulary v{}, file is v{}", existing.version(),
                            vocabulary.version()));
  }
  return MarketStore(std::move(db), std::move(existing));
}

MarketStore MarketStore::open_read_only(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw Error(ErrorKind::ConfigError, fmt::format("store {} does not exist", path.string()));
  }
  auto db = sql::Database::open(path, sql::Access::ReadOnly);
  auto vocab = read_vocabulary(db);
  return MarketStore(std::move(db), std::move(vocab));
}

void MarketStore::require_writable() const {
  if (db_.access() != sql::Access::ReadWrite) {
    throw Error(ErrorKind::PreconditionViolated, "store is open read-only");
  }
}

IngestReport MarketStore::ingest_prices(std::istream& csv) {
  require_writable();
  CsvReader reader(csv);
  expect_header(reader, kPricesHeader);
  RowCollector rows;
  sql::Transaction tx(db_);
  auto insert = db_.prepare(
      "INSERT INTO prices (ticker, date, open, high, low, close, adj_close, volume) "
      "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7, ?8)");
  std::vector<std::string> f;
  while (reader.next(f)) {
    const auto line = reader.line_number();
    if (f.size() != 8) {
      rows.reject(line, "column-count", fmt::format("expected 8 fields, got {}", f.size()));
      continue;
    }
    if (f[0].empty()) {
      rows.reject(line, "missing-ticker");
      continue;
    }
    if (!valid_ticker(f[0])) {
      rows.reject(line, "ticker-format", f[0]);
      continue;
    }
    auto date = Date::parse(f[1]);
    if (!date) {
      rows.reject(line, "malformed-date", f[1]);
      continue;
    }
    std::optional<Decimal> px[5];
    bool bad_number = false;
    for (int i = 0; i < 5; ++i) {
      px[i] = Decimal::parse(f[2 + i]);
      if (!px[i]) {
        rows.reject(line, "malformed-number", f[2 + i]);
        bad_number = true;
        break;
      }
    }
    if (bad_number) continue;
    auto volume = parse_int(f[7]);
    if (!volume) {
      rows.reject(line, "malformed-number", f[7]);
      continue;
    }
    if (*volume < 0) {
      rows.reject(line, "negative-volume", f[7]);
      continue;
    }
    const Decimal open = *px[0], high = *px[1], low = *px[2], close = *px[3];
    if (open < Decimal{} || high < Decimal{} || low < Decimal{} || close < Decimal{} ||
        *px[4] < Decimal{}) {
      rows.reject(line, "negative-price");
      continue;
    }
    if (!(low <= std::min(open, close) && std::max(open, close) <= high)) {
      rows.reject(line, "ohlc-order",
                  fmt::format("o={} h={} l={} c={}", f[2], f[3], f[4], f[5]));
      continue;
    }
    insert.reset();
    insert.bind(1, f[0]).bind(2, date->to_string());
    for (int i = 0; i < 5; ++i) insert.bind(3 + i, px[i]->to_string());
    insert.bind(8, *volume);
    try {
      insert.step();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DuplicateKey) throw;
      rows.reject(line, "duplicate", fmt::format("{} {}", f[0], f[1]));
      continue;
    }
    rows.accept();
  }
  tx.commit();
  return rows.report;
}

IngestReport MarketStore::ingest_fundamentals(std::istream& csv) {
  require_writable();
  CsvReader reader(csv);
  expect_header(reader, kFundamentalsHeader);
  RowCollector rows;
  sql::Transaction tx(db_);
  auto insert = db_.prepare(
      "INSERT INTO fundamentals "
      "(ticker, fiscal_period, period_kind, period_end_date, metric, value, unit) "
      "VALUES (?1, ?2, ?3, ?4, ?5, ?6, ?7)");
  // A period's end date must agree with every other row of the same ticker:
  // one end date per period, and tag order equal to end-date order. Accepted
  // periods are kept monotone, so checking the neighbours of a tag suffices.
  auto known_periods = db_.prepare(
      "SELECT DISTINCT fiscal_period, period_end_date FROM fundamentals "
      "WHERE ticker = ?1 AND period_kind = ?2");
  std::map<std::pair<std::string, std::string>, std::map<std::string, std::string>> period_ends;
  auto periods_of = [&](const std::string& ticker,
                        const std::string& kind) -> std::map<std::string, std::string>& {
    auto [it, inserted] = period_ends.try_emplace({ticker, kind});
    if (inserted) {
      known_periods.reset();
      known_periods.bind(1, ticker).bind(2, kind);
      while (known_periods.step()) {
        it->second.emplace(known_periods.column_string(0), known_periods.column_string(1));
      }
    }
    return it->second;
  };
  std::vector<std::string> f;
  while (reader.next(f)) {
    const auto line = reader.line_number();
    if (f.size() != 6) {
      rows.reject(line, "column-count", fmt::format("expected 6 fields, got {}", f.size()));
      continue;
    }
    if (f[0].empty()) {
      rows.reject(line, "missing-ticker");
      continue;
    }
    if (!valid_ticker(f[0])) {
      rows.reject(line, "ticker-format", f[0]);
      continue;
    }
    auto period = PeriodTag::parse_canonical(f[1]);
    if (!period) {
      rows.reject(line, "bad-period", f[1]);
      continue;
    }
    auto end = Date::parse(f[2]);
    if (!end) {
      rows.reject(line, "malformed-date", f[2]);
      continue;
    }
    if (!vocabulary_.contains(f[3])) {
      rows.reject(line, "unknown-metric", f[3]);
      continue;
    }
    auto value = Decimal::parse(f[4]);
    if (!value) {
      rows.reject(line, "malformed-number", f[4]);
      continue;
    }
    if (f[5].empty()) {
      rows.reject(line, "missing-unit");
      continue;
    }
    const std::string kind(to_string(period->frequency()));
    const auto tag = period->to_string();
    const auto end_text = end->to_string();
    auto& ends = periods_of(f[0], kind);
    bool consistent = true;
    if (auto it = ends.find(tag); it != ends.end()) {
      consistent = it->second == end_text;
    } else {
      auto next = ends.upper_bound(tag);
      if (next != ends.end() && next->second <= end_text) consistent = false;
      if (next != ends.begin() && std::prev(next)->second >= end_text) consistent = false;
    }
    if (!consistent) {
      rows.reject(line, "period-order", fmt::format("{} ends {}", tag, end_text));
      continue;
    }
    insert.reset();
    insert.bind(1, f[0]).bind(2, tag).bind(3, kind).bind(4, end_text).bind(5, f[3]);
    insert.bind(6, value->to_string()).bind(7, f[5]);
    try {
      insert.step();
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::DuplicateKey) throw;
      rows.reject(line, "duplicate", fmt::format("{} {} {}", f[0], tag, f[3]));
      continue;
    }
    ends.emplace(tag, end_text);
    rows.accept();
  }
  tx.commit();
  return rows.report;
}

IngestReport MarketStore::ingest_companies(std::istream& csv) {
  require_writable();
  CsvReader reader(csv);
  expect_header(reader, kCompaniesHeader);
  RowCollector rows;
  sql::Transaction tx(db_);

  // Folded name/alias -> owning ticker, seeded from what is already stored.
  std::map<std::string, std::string> names;
  for (const auto& c : companies()) {
    names.emplace(MetricVocabulary::fold(c.name), c.ticker);
    for (const auto& a : c.aliases) names.emplace(MetricVocabulary::fold(a), c.ticker);
  }

  auto exists = db_.prepare("SELECT EXISTS (SELECT 1 FROM companies WHERE ticker = ?1)");
  auto insert_company = db_.prepare("INSERT INTO companies (ticker, name) VALUES (?1, ?2)");
  auto insert_alias =
      db_.prepare("INSERT OR IGNORE INTO company_aliases (ticker, alias) VALUES (?1, ?2)");
  auto insert_membership = db_.prepare(
      "INSERT INTO index_memberships (ticker, index_id, membership_start, membership_end) "
      "VALUES (?1, ?2, ?3, ?4)");

  std::vector<std::string> f;
  while (reader.next(f)) {
    const auto line = reader.line_number();
    if (f.size() != 4) {
      rows.reject(line, "column-count", fmt::format("expected 4 fields, got {}", f.size()));
      continue;
    }
    const auto ticker = trim(f[0]);
    const auto name = trim(f[1]);
    if (ticker.empty()) {
      rows.reject(line, "missing-ticker");
      continue;
    }
    if (!valid_ticker(ticker)) {
      rows.reject(line, "ticker-format", ticker);
      continue;
    }
    if (name.empty()) {
      rows.reject(line, "missing-name", ticker);
      continue;
    }
    std::vector<std::string> aliases;
    for (auto& a : split_on(f[2], '|')) {
      auto t = trim(a);
      if (!t.empty()) aliases.push_back(std::move(t));
    }

    std::vector<IndexMembership> memberships;
    std::string membership_error;
    std::string membership_reason = "bad-membership";
    for (const auto& raw : split_on(f[3], ';')) {
      const auto item = trim(raw);
      if (item.empty()) continue;
      const auto parts = split_on(item, ':');
      if (parts.size() != 3) {
        membership_error = item;
        break;
      }
      auto index = parse_index_id(trim(parts[0]));
      if (!index) {
        membership_reason = "unknown-index";
        membership_error = parts[0];
        break;
      }
      auto start = Date::parse(trim(parts[1]));
      std::optional<Date> end;
      if (!trim(parts[2]).empty()) {
        end = Date::parse(trim(parts[2]));
        if (!end) {
          membership_error = item;
          break;
        }
      }
      if (!start || (end && *end < *start)) {
        membership_error = item;
        break;
      }
      memberships.push_back({*index, *start, end});
    }
    if (!membership_error.empty()) {
      rows.reject(line, membership_reason, membership_error);
      continue;
    }
    bool overlap = false;
    for (std::size_t i = 0; i < memberships.size() && !overlap; ++i) {
      for (std::size_t j = i + 1; j < memberships.size(); ++j) {
        const auto& a = memberships[i];
        const auto& b = memberships[j];
        if (a.index != b.index) continue;
        const bool a_before_b = a.end && *a.end < b.start;
        const bool b_before_a = b.end && *b.end < a.start;
        if (!a_before_b && !b_before_a) {
          overlap = true;
          break;
        }
      }
    }
    if (overlap) {
      rows.reject(line, "membership-overlap", ticker);
      continue;
    }

    std::string conflict;
    std::vector<std::string> keys{MetricVocabulary::fold(name)};
    for (const auto& a : aliases) keys.push_back(MetricVocabulary::fold(a));
    for (const auto& k : keys) {
      auto it = names.find(k);
      if (it != names.end() && it->second != ticker) {
        conflict = fmt::format("'{}' already names {}", k, it->second);
        break;
      }
    }

    exists.reset();
    exists.bind(1, ticker);
    exists.step();
    if (exists.column_int64(0) != 0) {
      rows.reject(line, "duplicate", ticker);
      continue;
    }
    if (!conflict.empty()) {
      rows.reject(line, "alias-conflict", conflict);
      continue;
    }
    insert_company.reset();
    insert_company.bind(1, ticker).bind(2, name);
    insert_company.step();
    for (const auto& a : aliases) {
      insert_alias.reset();
      insert_alias.bind(1, ticker).bind(2, a);
      insert_alias.step();
    }
    for (const auto& m : memberships) {
      insert_membership.reset();
      insert_membership.bind(1, ticker).bind(2, to_string(m.index)).bind(3, m.start.to_string());
      if (m.end) {
        insert_membership.bind(4, m.end->to_string());
      } else {
        insert_membership.bind_null(4);
      }
      insert_membership.step();
    }
    for (const auto& k : keys) names.emplace(k, ticker);
    rows.accept();
  }
  tx.commit();
  return rows.report;
}

bool MarketStore::ticker_known(std::string_view ticker) const {
  auto stmt = db_.prepare(
      "SELECT EXISTS (SELECT 1 FROM companies WHERE ticker = ?1)"
      " OR EXISTS (SELECT 1 FROM prices WHERE ticker = ?1)"
      " OR EXISTS (SELECT 1 FROM fundamentals WHERE ticker = ?1)");
  stmt.bind(1, ticker);
  stmt.step();
  return stmt.column_int64(0) != 0;
}

std::optional<Date> MarketStore::latest_price_date(std::string_view ticker) const {
  auto stmt = db_.prepare("SELECT MAX(date) FROM prices WHERE ticker = ?1");
  stmt.bind(1, ticker);
  stmt.step();
  if (stmt.column_is_null(0)) return std::nullopt;
  return column_date(stmt, 0);
}

std::vector<PriceBar> MarketStore::read_bars(sql::Statement& stmt) const {
  std::vector<PriceBar> bars;
  while (stmt.step()) {
    PriceBar bar;
    bar.ticker = stmt.column_string(0);
    bar.date = column_date(stmt, 1);
    bar.open = column_decimal(stmt, 2);
    bar.high = column_decimal(stmt, 3);
    bar.low = column_decimal(stmt, 4);
    bar.close = column_decimal(stmt, 5);
    bar.adj_close = column_decimal(stmt, 6);
    bar.volume = stmt.column_int64(7);
    bars.push_back(std::move(bar));
  }
  return bars;
}

std::vector<PriceBar> MarketStore::last_n_trading_days(std::string_view ticker, int n,
                                                       std::optional<Date> end) const {
  if (n < 1) throw Error(ErrorKind::PreconditionViolated, "n must be >= 1");
  if (!ticker_known(ticker)) {
    throw Error(ErrorKind::UnknownTicker, fmt::format("unknown ticker '{}'", ticker));
  }
  auto stmt = db_.prepare(
      "SELECT ticker, date, open, high, low, close, adj_close, volume FROM prices "
      "WHERE ticker = ?1 AND date <= ?2 ORDER BY date DESC LIMIT ?3");
  stmt.bind(1, ticker).bind(2, end ? end->to_string() : std::string("9999-12-31"));
  stmt.bind(3, static_cast<std::int64_t>(n));
  auto bars = read_bars(stmt);
  if (static_cast<int>(bars.size()) < n) {
    throw Error(ErrorKind::InsufficientData,
                fmt::format("{} has {} bars, {} requested", ticker, bars.size(), n));
  }
  std::reverse(bars.begin(), bars.end());
  return bars;
}

std::vector<PriceBar> MarketStore::price_range(std::string_view ticker, Date start, Date end,
                                               Periodicity periodicity) const {
  if (end < start) {
    throw Error(ErrorKind::PreconditionViolated,
                fmt::format("start {} is after end {}", start.to_string(), end.to_string()));
  }
  if (!ticker_known(ticker)) {
    throw Error(ErrorKind::UnknownTicker, fmt::format("unknown ticker '{}'", ticker));
  }
  auto stmt = db_.prepare(
      "SELECT ticker, date, open, high, low, close, adj_close, volume FROM prices "
      "WHERE ticker = ?1 AND date >= ?2 AND date <= ?3 ORDER BY date ASC");
  stmt.bind(1, ticker).bind(2, start.to_string()).bind(3, end.to_string());
  auto bars = read_bars(stmt);
  if (bars.empty()) {
    throw Error(ErrorKind::EmptyRange, fmt::format("no {} bars between {} and {}", ticker,
                                                   start.to_string(), end.to_string()));
  }
  if (periodicity == Periodicity::Daily) return bars;

  auto bucket = [periodicity](Date d) -> std::int64_t {
    switch (periodicity) {
      case Periodicity::Weekly: return d.week_start().days().time_since_epoch().count();
      case Periodicity::Monthly: return d.year() * 100 + static_cast<int>(d.month());
      case Periodicity::Yearly: return d.year();
      case Periodicity::Daily: break;
    }
    return d.days().time_since_epoch().count();
  };
  std::vector<PriceBar> out;
  for (std::size_t i = 0; i < bars.size(); ++i) {
    const bool last_in_bucket = i + 1 == bars.size() || bucket(bars[i + 1].date) != bucket(bars[i].date);
    if (last_in_bucket) out.push_back(bars[i]);
  }
  return out;
}

std::vector<FundamentalRecord> MarketStore::fundamental_series(std::string_view ticker,
                                                               std::string_view metric,
                                                               int n_periods,
                                                               Frequency frequency) const {
  if (n_periods < 1) throw Error(ErrorKind::PreconditionViolated, "n_periods must be >= 1");
  if (!vocabulary_.contains(metric)) {
    throw Error(ErrorKind::UnknownMetric, fmt::format("unknown metric '{}'", metric));
  }
  if (!ticker_known(ticker)) {
    throw Error(ErrorKind::UnknownTicker, fmt::format("unknown ticker '{}'", ticker));
  }
  auto stmt = db_.prepare(
      "SELECT ticker, fiscal_period, period_end_date, metric, value, unit FROM fundamentals "
      "WHERE ticker = ?1 AND metric = ?2 AND period_kind = ?3 "
      "ORDER BY period_end_date DESC, fiscal_period DESC LIMIT ?4");
  stmt.bind(1, ticker).bind(2, metric).bind(3, to_string(frequency));
  stmt.bind(4, static_cast<std::int64_t>(n_periods));
  std::vector<FundamentalRecord> out;
  while (stmt.step()) {
    FundamentalRecord r;
    r.ticker = stmt.column_string(0);
    r.fiscal_period = *PeriodTag::parse_canonical(stmt.column_string(1));
    r.period_end_date = column_date(stmt, 2);
    r.metric = stmt.column_string(3);
    r.value = column_decimal(stmt, 4);
    r.unit = stmt.column_string(5);
    out.push_back(std::move(r));
  }
  if (static_cast<int>(out.size()) < n_periods) {
    throw Error(ErrorKind::InsufficientData,
                fmt::format("{} {} has {} {} periods, {} requested", ticker, metric, out.size(),
                            to_string(frequency), n_periods));
  }
  std::reverse(out.begin(), out.end());
  return out;
}

StatementBundle MarketStore::statement(std::string_view ticker, StatementKind kind,
                                       const PeriodSelector& selector) const {
  if (!ticker_known(ticker)) {
    throw Error(ErrorKind::UnknownTicker, fmt::format("unknown ticker '{}'", ticker));
  }
  Frequency frequency = Frequency::Quarterly;
  if (const auto* last = std::get_if<LastPeriods>(&selector)) {
    if (last->count < 1) throw Error(ErrorKind::PreconditionViolated, "count must be >= 1");
    frequency = last->frequency;
  } else {
    const auto& between = std::get<PeriodBetween>(selector);
    if (between.from.frequency() != between.to.frequency()) {
      throw Error(ErrorKind::PreconditionViolated, "period bounds mix quarters and years");
    }
    if (between.to < between.from) {
      throw Error(ErrorKind::PreconditionViolated, "period range is reversed");
    }
    frequency = between.from.frequency();
  }

  std::set<std::string> kind_metrics;
  for (const auto* m : vocabulary_.metrics_for(kind)) kind_metrics.insert(m->id);

  struct Cell {
    PeriodTag period;
    Date end;
    std::string metric;
    Decimal value;
    std::string unit;
  };
  std::vector<Cell> cells;
  auto stmt = db_.prepare(
      "SELECT fiscal_period, period_end_date, metric, value, unit FROM fundamentals "
      "WHERE ticker = ?1 AND period_kind = ?2");
  stmt.bind(1, ticker).bind(2, to_string(frequency));
  while (stmt.step()) {
    auto metric = stmt.column_string(2);
    if (!kind_metrics.contains(metric)) continue;
    cells.push_back({*PeriodTag::parse_canonical(stmt.column_string(0)), column_date(stmt, 1),
                     std::move(metric), column_decimal(stmt, 3), stmt.column_string(4)});
  }

  std::vector<std::pair<Date, PeriodTag>> periods;
  for (const auto& c : cells) periods.emplace_back(c.end, c.period);
  std::sort(periods.begin(), periods.end());
  periods.erase(std::unique(periods.begin(), periods.end()), periods.end());

  if (const auto* last = std::get_if<LastPeriods>(&selector)) {
    if (periods.empty()) {
      throw Error(ErrorKind::EmptyRange,
                  fmt::format("no {} {} data for {}", to_string(frequency), to_string(kind), ticker));
    }
    if (static_cast<int>(periods.size()) < last->count) {
      throw Error(ErrorKind::InsufficientData,
                  fmt::format("{} has {} {} periods, {} requested", ticker, periods.size(),
                              to_string(kind), last->count));
    }
    periods.erase(periods.begin(), periods.end() - last->count);
  } else {
    const auto& between = std::get<PeriodBetween>(selector);
    std::erase_if(periods, [&](const auto& p) {
      return p.second < between.from || between.to < p.second;
    });
    if (periods.empty()) {
      throw Error(ErrorKind::EmptyRange,
                  fmt::format("no {} data for {} between {} and {}", to_string(kind), ticker,
                              between.from.to_string(), between.to.to_string()));
    }
  }

  StatementBundle bundle;
  bundle.ticker = std::string(ticker);
  bundle.kind = kind;
  std::map<PeriodTag, std::size_t> column;
  for (const auto& [end, tag] : periods) {
    column.emplace(tag, bundle.periods.size());
    bundle.periods.push_back(tag);
    bundle.period_end_dates.push_back(end);
  }
  for (const auto& c : cells) {
    auto it = column.find(c.period);
    if (it == column.end()) continue;
    auto& series = bundle.line_items[c.metric];
    if (series.empty()) series.resize(bundle.periods.size());
    series[it->second] = c.value;
    auto [u, inserted] = bundle.units.emplace(c.metric, c.unit);
    if (!inserted && c.unit < u->second) u->second = c.unit;
  }
  for (const auto* m : vocabulary_.metrics_for(kind)) {
    if (bundle.line_items.contains(m->id)) bundle.metric_order.push_back(m->id);
  }
  return bundle;
}

std::vector<CompanyRecord> MarketStore::companies() const {
  std::vector<CompanyRecord> out;
  std::map<std::string, std::size_t> index;
  {
    auto stmt = db_.prepare("SELECT ticker, name FROM companies ORDER BY ticker");
    while (stmt.step()) {
      index.emplace(stmt.column_string(0), out.size());
      out.push_back({stmt.column_string(0), stmt.column_string(1), {}, {}});
    }
  }
  {
    auto stmt = db_.prepare("SELECT ticker, alias FROM company_aliases ORDER BY ticker, rowid");
    while (stmt.step()) {
      auto it = index.find(stmt.column_string(0));
      if (it != index.end()) out[it->second].aliases.push_back(stmt.column_string(1));
    }
  }
  {
    auto stmt = db_.prepare(
        "SELECT ticker, index_id, membership_start, membership_end FROM index_memberships "
        "ORDER BY ticker, index_id, membership_start");
    while (stmt.step()) {
      auto it = index.find(stmt.column_string(0));
      if (it == index.end()) continue;
      IndexMembership m;
      m.index = parse_index_id(stmt.column_string(1)).value_or(IndexId::SP500);
      m.start = column_date(stmt, 2);
      if (!stmt.column_is_null(3)) m.end = column_date(stmt, 3);
      out[it->second].index_memberships.push_back(m);
    }
  }
  return out;
}

std::vector<std::string> MarketStore::price_tickers() const {
  std::vector<std::string> out;
  auto stmt = db_.prepare("SELECT DISTINCT ticker FROM prices ORDER BY ticker");
  while (stmt.step()) out.push_back(stmt.column_string(0));
  return out;
}

std::string_view store_schema_sql() { return kSchema; }

std::string store_fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read {}", path.string()));
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buffer[1 << 16];
  while (in) {
    in.read(buffer, sizeof buffer);
    const auto got = in.gcount();
    for (std::streamsize i = 0; i < got; ++i) {
      hash ^= static_cast<unsigned char>(buffer[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  return fmt::format("{:016x}", hash);
}

}  // namespace finq
