#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include <fmt/format.h>

#include "finq/csv.hpp"
#include "finq/error.hpp"
#include "finq/market_store.hpp"
#include "support.hpp"

using namespace finq;
using finq::test::TempDir;

namespace {

std::string prices_csv(const std::vector<std::string>& rows) {
  std::string s = std::string(kPricesHeader) + "\n";
  for (const auto& r : rows) s += r + "\n";
  return s;
}

IngestReport ingest_prices(MarketStore& store, const std::string& csv) {
  std::istringstream in(csv);
  return store.ingest_prices(in);
}

IngestReport ingest_fundamentals(MarketStore& store, const std::string& body) {
  std::istringstream in(std::string(kFundamentalsHeader) + "\n" + body);
  return store.ingest_fundamentals(in);
}

IngestReport ingest_companies(MarketStore& store, const std::string& body) {
  std::istringstream in(std::string(kCompaniesHeader) + "\n" + body);
  return store.ingest_companies(in);
}

// Ten NVDA bars on consecutive trading days, 2024-11-04 (Mon) .. 2024-11-15 (Fri).
std::string ten_nvda_bars() {
  std::vector<std::string> rows;
  auto d = Date::from_ymd(2024, 11, 4);
  for (int i = 0; i < 10; ++i) {
    while (d.is_weekend()) d = d.plus_days(1);
    rows.push_back(fmt::format("NVDA,{},{}.00,{}.50,{}.00,{}.25,{}.25,{}", d.to_string(), 100 + i,
                               101 + i, 99 + i, 100 + i, 100 + i, 1000 + i));
    d = d.plus_days(1);
  }
  return prices_csv(rows);
}

std::string eight_quarters(const std::string& ticker) {
  std::string s;
  for (int y = 2022; y <= 2023; ++y) {
    for (int q = 1; q <= 4; ++q) {
      const auto tag = PeriodTag{y, q};
      for (const auto& [metric, v] :
           std::vector<std::pair<std::string, int>>{{"revenue", 1000 + 10 * q},
                                                    {"net_income", 100 + q},
                                                    {"operating_cash_flow", 150 + q},
                                                    {"capital_expenditures", -20 - q}}) {
        s += fmt::format("{},{},{},{},{},USD\n", ticker, tag.to_string(),
                         tag.nominal_end().to_string(), metric, v + (y - 2022) * 100);
      }
    }
    const auto fy = PeriodTag{y, 0};
    s += fmt::format("{},{},{},eps_diluted,{}.25,USD/share\n", ticker, fy.to_string(),
                     fy.nominal_end().to_string(), y - 2018);
  }
  return s;
}

struct Fixture : ::testing::Test {
  TempDir dir;
  MarketStore store = MarketStore::create(dir / "m.db", test::vocabulary());
};

}  // namespace

TEST_F(Fixture, ThreeValidPriceRowsLoad) {
  const auto r = ingest_prices(store, prices_csv({"AAPL,2024-01-02,10,11,9,10.5,10.5,100",
                                                  "AAPL,2024-01-03,10.5,12,10,11,11,200",
                                                  "MSFT,2024-01-02,300,301,299,300.5,300,50"}));
  EXPECT_EQ(r.loaded, 3u);
  EXPECT_EQ(r.rejected, 0u);
}

TEST_F(Fixture, LowAboveHighIsRejectedAsOhlcOrder) {
  const auto r = ingest_prices(store, prices_csv({"AAPL,2024-01-02,10,11,12,10.5,10.5,100"}));
  EXPECT_EQ(r.loaded, 0u);
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].reason, "ohlc-order");
  EXPECT_EQ(r.rejections[0].line, 2u);
}

TEST_F(Fixture, EmptyStreamWithHeaderLoadsNothing) {
  const auto r = ingest_prices(store, prices_csv({}));
  EXPECT_EQ(r.loaded, 0u);
  EXPECT_EQ(r.rejected, 0u);
}

TEST_F(Fixture, WrongHeaderIsMalformedHeader) {
  std::istringstream in("ticker,date,close\nAAPL,2024-01-02,1\n");
  try {
    store.ingest_prices(in);
    FAIL() << "expected MalformedHeader";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MalformedHeader);
  }
}

TEST_F(Fixture, BadPriceRowsAreRejectedWithReasons) {
  const auto r = ingest_prices(store, prices_csv({
                                          "AAPL,2024-01-02,1e3,11,9,10,10,1",
                                          "AAPL,2024-13-02,10,11,9,10,10,1",
                                          "AAPL,2024-01-02,10,11,9,10,10",
                                          ",2024-01-02,10,11,9,10,10,1",
                                          "AAPL,2024-01-02,10,11,9,10,10,-5",
                                          "AAPL,2024-01-02,1,000,11,9,10,10,1",
                                          "AAPL,2024-01-02,10,11,9,10,10,1",
                                          "AAPL,2024-01-02,10,11,9,10,10,1",
                                      }));
  std::vector<std::string> reasons;
  for (const auto& x : r.rejections) reasons.push_back(x.reason);
  EXPECT_EQ(reasons, (std::vector<std::string>{"malformed-number", "malformed-date", "column-count",
                                               "missing-ticker", "negative-volume", "column-count",
                                               "duplicate"}));
  EXPECT_EQ(r.loaded, 1u);
  EXPECT_EQ(r.rows, 8u);
}

TEST_F(Fixture, FundamentalRowsFollowTheVocabulary) {
  auto r = ingest_fundamentals(store, "AAPL,2023Q2,2023-06-30,revenue,81797000000,USD\n");
  EXPECT_EQ(r.loaded, 1u);
  r = ingest_fundamentals(store, "AAPL,2023Q2,2023-06-30,ebitda_adjusted_custom,1,USD\n");
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].reason, "unknown-metric");
  r = ingest_fundamentals(store, "AAPL,2023Q2,2023-06-30,revenue,5,USD\n");
  ASSERT_EQ(r.rejections.size(), 1u);
  EXPECT_EQ(r.rejections[0].reason, "duplicate");
}

TEST_F(Fixture, PeriodEndDatesMustAgreeWithTagOrder) {
  auto r = ingest_fundamentals(store,
                               "X,2023Q2,2023-06-30,revenue,1,USD\n"
                               "X,2023Q3,2023-09-30,revenue,1,USD\n"
                               "X,2023Q2,2023-07-01,net_income,1,USD\n"  // same tag, other end
                               "X,2023Q4,2023-09-15,revenue,1,USD\n"     // ends before Q3
                               "X,2023Q1,2023-07-15,revenue,1,USD\n"     // ends after Q2
                               "X,2023Q1,2023-03-31,revenue,1,USD\n");
  EXPECT_EQ(r.loaded, 3u);
  ASSERT_EQ(r.rejected, 3u);
  for (const auto& x : r.rejections) EXPECT_EQ(x.reason, "period-order");
  // A later batch is checked against what is already stored.
  r = ingest_fundamentals(store, "X,2023Q4,2023-08-01,revenue,1,USD\n");
  EXPECT_EQ(r.rejected, 1u);
}

TEST_F(Fixture, CompanyRowsAndMemberships) {
  auto r = ingest_companies(store, "NVDA,NVIDIA Corporation,NVIDIA|Nvidia Corp,SP500:1999-11-01:\n");
  EXPECT_EQ(r.loaded, 1u);
  r = ingest_companies(store,
                       "AAA,Alpha,,SP500:2000-01-01:2010-01-01;SP500:2005-01-01:\n"
                       ",Nameless,,SP500:2000-01-01:\n"
                       "BBB,Beta,,DOW30:2000-01-01:\n");
  ASSERT_EQ(r.rejections.size(), 3u);
  EXPECT_EQ(r.rejections[0].reason, "membership-overlap");
  EXPECT_EQ(r.rejections[1].reason, "missing-ticker");
  EXPECT_EQ(r.rejections[2].reason, "unknown-index");
  const auto companies = store.companies();
  ASSERT_EQ(companies.size(), 1u);
  EXPECT_EQ(companies[0].aliases, (std::vector<std::string>{"NVIDIA", "Nvidia Corp"}));
  EXPECT_EQ(companies[0].index_memberships[0].start.to_string(), "1999-11-01");
  EXPECT_FALSE(companies[0].index_memberships[0].end);
}

TEST_F(Fixture, LastNTradingDays) {
  ASSERT_EQ(ingest_prices(store, ten_nvda_bars()).loaded, 10u);
  const auto all = store.last_n_trading_days("NVDA", 10);
  ASSERT_EQ(all.size(), 10u);
  for (std::size_t i = 1; i < all.size(); ++i) EXPECT_LT(all[i - 1].date, all[i].date);
  const auto one = store.last_n_trading_days("NVDA", 1);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0].date.to_string(), "2024-11-15");
  EXPECT_EQ(one[0].close.to_string(), "109.25");
  try {
    store.last_n_trading_days("NVDA", 11);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InsufficientData);
  }
  try {
    store.last_n_trading_days("ZZZZ", 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownTicker);
  }
}

TEST_F(Fixture, PriceRangeDailyAndWeekly) {
  ingest_prices(store, ten_nvda_bars());
  const auto mon = Date::from_ymd(2024, 11, 4);
  const auto daily = store.price_range("NVDA", mon, mon.plus_days(4), Periodicity::Daily);
  EXPECT_EQ(daily.size(), 5u);
  const auto weekly = store.price_range("NVDA", mon, mon.plus_days(11), Periodicity::Weekly);
  ASSERT_EQ(weekly.size(), 2u);
  EXPECT_EQ(weekly[0].date.to_string(), "2024-11-08");
  EXPECT_EQ(weekly[1].date.to_string(), "2024-11-15");
  EXPECT_EQ(weekly[0].close.to_string(), "104.25");
  try {
    store.price_range("NVDA", mon.plus_days(3), mon, Periodicity::Daily);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::PreconditionViolated);
  }
  try {
    store.price_range("NVDA", Date::from_ymd(2020, 1, 1), Date::from_ymd(2020, 2, 1),
                      Periodicity::Daily);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyRange);
  }
}

TEST_F(Fixture, FundamentalSeries) {
  ASSERT_EQ(ingest_fundamentals(store, eight_quarters("AAPL")).rejected, 0u);
  const auto rev = store.fundamental_series("AAPL", "revenue", 4, Frequency::Quarterly);
  ASSERT_EQ(rev.size(), 4u);
  EXPECT_EQ(rev.front().fiscal_period.to_string(), "2023Q1");
  EXPECT_EQ(rev.back().fiscal_period.to_string(), "2023Q4");
  EXPECT_EQ(rev.back().value.to_string(), "1140");
  const auto eps = store.fundamental_series("AAPL", "eps_diluted", 2, Frequency::Yearly);
  ASSERT_EQ(eps.size(), 2u);
  EXPECT_EQ(eps[0].fiscal_period.to_string(), "2022FY");
  EXPECT_EQ(eps[1].value.to_string(), "5.25");
  EXPECT_EQ(eps[1].unit, "USD/share");
  try {
    store.fundamental_series("AAPL", "moat_score", 1, Frequency::Quarterly);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownMetric);
  }
}

TEST_F(Fixture, Statements) {
  ingest_fundamentals(store, eight_quarters("AAPL"));
  ingest_companies(store, "EMPTY,Empty Co,,SP500:2000-01-01:\n");
  const auto inc = store.statement("AAPL", StatementKind::IncomeStatement,
                                   LastPeriods{2, Frequency::Quarterly});
  ASSERT_EQ(inc.periods.size(), 2u);
  EXPECT_EQ(inc.periods[1].to_string(), "2023Q4");
  EXPECT_EQ(inc.line_items.at("revenue").size(), 2u);
  const auto cf = store.statement("AAPL", StatementKind::CashFlow,
                                  PeriodBetween{{2022, 1}, {2023, 2}});
  EXPECT_EQ(cf.periods.size(), 6u);
  try {
    store.statement("EMPTY", StatementKind::CashFlow, LastPeriods{1, Frequency::Quarterly});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyRange);
  }
}

TEST(MarketStoreReadOnly, RejectsIngestion) {
  TempDir dir;
  {
    auto store = MarketStore::create(dir / "m.db", test::vocabulary());
    ingest_prices(store, ten_nvda_bars());
  }
  auto ro = MarketStore::open_read_only(dir / "m.db");
  std::istringstream in(ten_nvda_bars());
  EXPECT_THROW(ro.ingest_prices(in), Error);
  EXPECT_EQ(ro.last_n_trading_days("NVDA", 3).size(), 3u);
}

// ---- properties over the synthetic store --------------------------------

class SyntheticStore : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    SynthConfig cfg;
    cfg.price_start = Date::from_ymd(2022, 1, 3);
    cfg.first_fiscal_year = 2018;
    path_ = test::make_synthetic_store(*dir_, cfg);
    data_ = new SynthOutput(synthesize(MarketStore::open_read_only(path_).companies(),
                                       test::vocabulary(), cfg));
  }
  static void TearDownTestSuite() {
    delete data_;
    delete dir_;
  }
  static inline TempDir* dir_ = nullptr;
  static inline std::filesystem::path path_;
  static inline SynthOutput* data_ = nullptr;
};

TEST_F(SyntheticStore, IngestThenQueryRoundTripsBitExact) {
  auto store = MarketStore::open_read_only(path_);
  std::istringstream in(data_->prices_csv);
  CsvReader reader(in);
  std::vector<std::string> f;
  reader.next(f);
  std::map<std::string, std::vector<std::vector<std::string>>> by_ticker;
  while (reader.next(f)) by_ticker[f[0]].push_back(f);
  for (const auto& [ticker, rows] : by_ticker) {
    const auto bars = store.price_range(ticker, *Date::parse(rows.front()[1]),
                                        *Date::parse(rows.back()[1]), Periodicity::Daily);
    ASSERT_EQ(bars.size(), rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      ASSERT_EQ(bars[i].date.to_string(), rows[i][1]);
      ASSERT_EQ(bars[i].open, *Decimal::parse(rows[i][2]));
      ASSERT_EQ(bars[i].high, *Decimal::parse(rows[i][3]));
      ASSERT_EQ(bars[i].low, *Decimal::parse(rows[i][4]));
      ASSERT_EQ(bars[i].close, *Decimal::parse(rows[i][5]));
      ASSERT_EQ(bars[i].adj_close, *Decimal::parse(rows[i][6]));
      ASSERT_EQ(std::to_string(bars[i].volume), rows[i][7]);
    }
  }
}

TEST_F(SyntheticStore, LastNIsSuffixOfFullDailyRange) {
  auto store = MarketStore::open_read_only(path_);
  std::mt19937 rng(5);
  for (const auto& t : store.price_tickers()) {
    const auto latest = *store.latest_price_date(t);
    const auto full = store.price_range(t, Date::from_ymd(1900, 1, 1), latest, Periodicity::Daily);
    for (int k = 0; k < 5; ++k) {
      const int n = std::uniform_int_distribution<int>(1, static_cast<int>(full.size()))(rng);
      const auto end = full[std::uniform_int_distribution<std::size_t>(n - 1, full.size() - 1)(rng)].date;
      const auto lastn = store.last_n_trading_days(t, n, end);
      const auto prefix = store.price_range(t, Date::from_ymd(1900, 1, 1), end, Periodicity::Daily);
      ASSERT_EQ(lastn.size(), static_cast<std::size_t>(n));
      ASSERT_TRUE(std::equal(lastn.begin(), lastn.end(), prefix.end() - n));
    }
  }
}

TEST_F(SyntheticStore, ResampledSeriesIsBucketwiseLastOfDaily) {
  auto store = MarketStore::open_read_only(path_);
  const auto start = Date::from_ymd(2022, 3, 9), end = Date::from_ymd(2025, 8, 14);
  for (const auto& t : {"AAPL", "JPM", "V"}) {
    const auto daily = store.price_range(t, start, end, Periodicity::Daily);
    for (auto p : {Periodicity::Weekly, Periodicity::Monthly, Periodicity::Yearly}) {
      auto bucket = [p](Date d) {
        switch (p) {
          case Periodicity::Weekly: return d.week_start().to_string();
          case Periodicity::Monthly: return d.to_string().substr(0, 7);
          default: return d.to_string().substr(0, 4);
        }
      };
      // oracle: walk the daily series and keep the last bar of each bucket
      std::vector<PriceBar> expected;
      for (std::size_t i = 0; i < daily.size(); ++i) {
        if (i + 1 == daily.size() || bucket(daily[i + 1].date) != bucket(daily[i].date)) {
          expected.push_back(daily[i]);
        }
      }
      const auto got = store.price_range(t, start, end, p);
      ASSERT_EQ(got, expected) << t << " " << to_string(p);
    }
  }
}

TEST_F(SyntheticStore, ResultsAscendWithoutDuplicates) {
  auto store = MarketStore::open_read_only(path_);
  for (const auto& t : store.price_tickers()) {
    const auto bars = store.last_n_trading_days(t, 300);
    for (std::size_t i = 1; i < bars.size(); ++i) ASSERT_LT(bars[i - 1].date, bars[i].date);
    for (const auto& m : {"revenue", "total_assets", "eps_basic"}) {
      for (auto f : {Frequency::Quarterly, Frequency::Yearly}) {
        const auto s = store.fundamental_series(t, m, 8, f);
        for (std::size_t i = 1; i < s.size(); ++i) {
          ASSERT_LT(s[i - 1].fiscal_period, s[i].fiscal_period);
          ASSERT_LT(s[i - 1].period_end_date, s[i].period_end_date);
        }
      }
    }
  }
}

TEST_F(SyntheticStore, QueriesDoNotChangeTheFile) {
  const auto before = store_fingerprint(path_);
  {
    auto store = MarketStore::open_read_only(path_);
    store.last_n_trading_days("AAPL", 20);
    store.statement("JPM", StatementKind::BalanceSheet, LastPeriods{4, Frequency::Yearly});
  }
  EXPECT_EQ(store_fingerprint(path_), before);
}
