#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finq/domain.hpp"
#include "finq/metric_vocabulary.hpp"
#include "finq/sqlite.hpp"

namespace finq {

struct Rejection {
  std::size_t line = 0;
  std::string reason;  // short machine tag, e.g. "ohlc-order", "duplicate"
  std::string detail;
};

struct IngestReport {
  std::size_t rows = 0;
  std::size_t loaded = 0;
  std::size_t rejected = 0;
  std::vector<Rejection> rejections;
};

inline constexpr std::string_view kPricesHeader = "ticker,date,open,high,low,close,adj_close,volume";
inline constexpr std::string_view kFundamentalsHeader =
    "ticker,fiscal_period,period_end_date,metric,value,unit";
inline constexpr std::string_view kCompaniesHeader = "ticker,name,aliases,index_memberships";

/// Embedded relational store for prices, fundamentals and company identity.
///
/// Ingestion happens through a read-write handle; every other consumer opens
/// the file read-only. Decimal columns hold canonical decimal text so values
/// round-trip exactly and stay readable from plain SQL.
class MarketStore {
 public:
  /// Opens (creating if needed) a writable store and installs the metric
  /// vocabulary when the store has none yet.
  static MarketStore create(const std::filesystem::path& path, const MetricVocabulary& vocabulary);
  static MarketStore open_read_only(const std::filesystem::path& path);

  IngestReport ingest_prices(std::istream& csv);
  IngestReport ingest_fundamentals(std::istream& csv);
  IngestReport ingest_companies(std::istream& csv);

  /// A ticker is known when any table mentions it.
  bool ticker_known(std::string_view ticker) const;
  std::optional<Date> latest_price_date(std::string_view ticker) const;

  /// The n most recent bars with date <= end (default: latest), ascending.
  std::vector<PriceBar> last_n_trading_days(std::string_view ticker, int n,
                                            std::optional<Date> end = std::nullopt) const;
  /// Inclusive window. Non-daily periodicities keep the last trading bar of
  /// each ISO week / calendar month / calendar year.
  std::vector<PriceBar> price_range(std::string_view ticker, Date start, Date end,
                                    Periodicity periodicity) const;
  std::vector<FundamentalRecord> fundamental_series(std::string_view ticker,
                                                    std::string_view metric, int n_periods,
                                                    Frequency frequency) const;
  StatementBundle statement(std::string_view ticker, StatementKind kind,
                            const PeriodSelector& selector) const;

  std::vector<CompanyRecord> companies() const;
  std::vector<std::string> price_tickers() const;

  const MetricVocabulary& vocabulary() const { return vocabulary_; }
  const sql::Database& database() const { return db_; }
  const std::filesystem::path& path() const { return db_.path(); }

 private:
  MarketStore(sql::Database db, MetricVocabulary vocabulary);
  void require_writable() const;
  std::vector<PriceBar> read_bars(sql::Statement& stmt) const;

  sql::Database db_;
  MetricVocabulary vocabulary_;
};

/// DDL of the store tables; used to check templates against the schema.
std::string_view store_schema_sql();

/// FNV-1a over the raw bytes of the store file, as 16 hex digits. Used to
/// prove that read paths never mutate the store.
std::string store_fingerprint(const std::filesystem::path& path);

}  // namespace finq
