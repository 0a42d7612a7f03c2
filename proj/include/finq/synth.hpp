#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "finq/domain.hpp"
#include "finq/market_store.hpp"

namespace finq {

/// Deterministic synthetic market data: a random-walk price history and a
/// self-consistent set of quarterly and yearly fundamentals per company.
/// Nothing here is real market data; it exists so every query shape can be
/// exercised offline.
struct SynthConfig {
  std::uint64_t seed = 20240601;
  Date price_start = Date::from_ymd(2015, 1, 2);
  Date price_end = Date::from_ymd(2025, 12, 31);
  int first_fiscal_year = 2006;
  int last_fiscal_year = 2025;
};

/// Weekdays in [start, end] minus New Year's Day, Independence Day and
/// Christmas Day.
std::vector<Date> trading_days(Date start, Date end);

struct SynthOutput {
  std::string prices_csv;
  std::string fundamentals_csv;
  std::size_t price_rows = 0;
  std::size_t fundamental_rows = 0;
};

SynthOutput synthesize(const std::vector<CompanyRecord>& companies,
                       const MetricVocabulary& vocabulary, const SynthConfig& config);

struct SynthStoreReport {
  IngestReport companies;
  IngestReport prices;
  IngestReport fundamentals;
};

/// Creates a store at `db_path` from a companies CSV plus synthesized prices
/// and fundamentals. The file must not exist yet.
SynthStoreReport create_synthetic_store(const std::filesystem::path& db_path,
                                        const std::filesystem::path& companies_csv,
                                        const MetricVocabulary& vocabulary,
                                        const SynthConfig& config = {});

/// data/companies.csv
std::filesystem::path default_companies_path();

}  // namespace finq
