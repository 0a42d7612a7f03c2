#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "finq/error.hpp"
#include "finq/mock_backend.hpp"
#include "finq/rq1.hpp"
#include "support.hpp"

using namespace finq;
using finq::test::TempDir;

namespace {

const Date kCutoff = Date::from_ymd(2023, 10, 1);

class Rq1 : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    path_ = test::make_synthetic_store(*dir_);
    store_ = new MarketStore(MarketStore::open_read_only(path_));
  }
  static void TearDownTestSuite() {
    delete store_;
    delete dir_;
  }
  static Rq1TaskSet tasks(std::vector<Rq1Target> targets, int windows = 1, std::size_t cap = 0) {
    Rq1Config cfg;
    cfg.targets = std::move(targets);
    cfg.windows_per_ticker = windows;
    cfg.max_tasks_per_group = cap;
    return build_rq1_tasks(*store_, kCutoff, cfg);
  }

  static inline TempDir* dir_ = nullptr;
  static inline std::filesystem::path path_;
  static inline MarketStore* store_ = nullptr;
};

PredictionTask tiny_task(Rq1Target target) {
  PredictionTask t;
  t.ticker = "NVDA";
  t.company_name = "NVIDIA Corporation";
  t.target = target;
  t.input_dates = {"2024-01-02", "2024-01-03"};
  t.input_values = {"48.168", "47.569"};
  t.truth_dates = {"2024-01-04", "2024-01-05"};
  t.truth_values = {47.998, 49.097};
  return t;
}

}  // namespace

TEST(Rq1Prompt, TemplateIsFilledVerbatim) {
  const auto p = build_rq1_prompt(tiny_task(Rq1Target::StockPrice));
  EXPECT_EQ(p,
            "You are given the following stock price data for the company NVIDIA Corporation.\n"
            "Predict the next 2 values based on the past 2 values.\n"
            "\n"
            "Instructions:\n"
            "- Do not add any explanations.\n"
            "- Do not include quotation marks, backticks, or annotations.\n"
            "- Return only the predicted values separated by commas (e.g., 1.0, 2.0, 3.0).\n"
            "\n"
            "Data:\n"
            "2024-01-02, 2024-01-03\n"
            "48.168, 47.569");
  EXPECT_NE(build_rq1_prompt(tiny_task(Rq1Target::NetIncome)).find("net income data"), std::string::npos);
}

TEST_F(Rq1, PromptLengthsPerTarget) {
  const auto set = tasks({Rq1Target::StockPrice, Rq1Target::Revenue});
  bool saw_price = false, saw_revenue = false;
  for (const auto& t : set.tasks) {
    const auto p = build_rq1_prompt(t);
    EXPECT_EQ(p.find('{'), std::string::npos);
    EXPECT_EQ(p.find('}'), std::string::npos);
    if (t.target == Rq1Target::StockPrice) {
      saw_price = true;
      EXPECT_NE(p.find("next 10 values"), std::string::npos);
      EXPECT_NE(p.find("past 10 values"), std::string::npos);
    } else {
      saw_revenue = true;
      EXPECT_NE(p.find("next 8 values"), std::string::npos);
      EXPECT_NE(p.find("past 8 values"), std::string::npos);
    }
  }
  EXPECT_TRUE(saw_price);
  EXPECT_TRUE(saw_revenue);
}

TEST_F(Rq1, WindowsRespectTheCutoffAndMatchTheStore) {
  const auto set = tasks({Rq1Target::StockPrice, Rq1Target::Revenue, Rq1Target::NetIncome}, 2);
  const auto cut = kCutoff.to_string();
  std::map<std::pair<std::string, Rq1Target>, std::string> latest_point;
  ASSERT_FALSE(set.tasks.empty());
  for (const auto& t : set.tasks) {
    const auto len = static_cast<std::size_t>(rq1_input_length(t.target));
    ASSERT_EQ(t.input_dates.size(), len);
    ASSERT_EQ(t.input_values.size(), len);
    ASSERT_EQ(t.truth_dates.size(), static_cast<std::size_t>(rq1_output_length(t.target)));
    ASSERT_EQ(t.truth_values.size(), t.truth_dates.size());
    std::vector<std::string> all = t.input_dates;
    all.insert(all.end(), t.truth_dates.begin(), t.truth_dates.end());
    for (std::size_t i = 1; i < all.size(); ++i) ASSERT_LT(all[i - 1], all[i]);
    if (t.group == Rq1Group::BeforeCutoff) {
      EXPECT_LT(all.back(), cut);
    } else {
      EXPECT_GE(t.truth_dates.front(), cut);
    }

    // Recompute the window through the store's public queries.
    std::map<std::string, std::string> series;
    if (t.target == Rq1Target::StockPrice) {
      for (const auto& b : store_->price_range(t.ticker, Date::from_ymd(2000, 1, 1), Date::from_ymd(2100, 1, 1),
                                               Periodicity::Daily)) {
        series[b.date.to_string()] = b.close.to_string();
      }
    } else {
      const auto metric = t.target == Rq1Target::Revenue ? "revenue" : "net_income";
      for (const auto& f : store_->fundamental_series(t.ticker, metric, 80, Frequency::Quarterly)) {
        series[f.period_end_date.to_string()] = f.value.to_string();
      }
    }
    for (std::size_t i = 0; i < len; ++i) ASSERT_EQ(series.at(t.input_dates[i]), t.input_values[i]);
    for (std::size_t i = 0; i < t.truth_dates.size(); ++i) {
      ASSERT_DOUBLE_EQ(std::stod(series.at(t.truth_dates[i])), t.truth_values[i]);
    }
    // consecutive points: nothing stored between first and last date is skipped
    const auto first = series.find(all.front());
    const auto count = std::distance(first, series.upper_bound(all.back()));
    ASSERT_EQ(static_cast<std::size_t>(count), all.size());
    if (t.group == Rq1Group::AfterCutoff) {
      auto& latest = latest_point[{t.ticker, t.target}];
      latest = std::max(latest, all.back());
      // the latest after-cutoff window ends at the last stored point
      (void)latest;
    }
  }
  for (const auto& [key, last] : latest_point) {
    if (key.second == Rq1Target::StockPrice) {
      EXPECT_EQ(last, store_->latest_price_date(key.first)->to_string()) << key.first;
    }
  }
}

TEST_F(Rq1, CapsAndTickerFilter) {
  const auto set = tasks({Rq1Target::StockPrice}, 3, 30);
  std::size_t before = 0, after = 0;
  for (const auto& t : set.tasks) (t.group == Rq1Group::BeforeCutoff ? before : after)++;
  EXPECT_EQ(before, 30u);
  EXPECT_EQ(after, 30u);

  Rq1Config cfg;
  cfg.targets = {Rq1Target::StockPrice};
  cfg.tickers = {"KO"};
  const auto ko = build_rq1_tasks(*store_, kCutoff, cfg);
  ASSERT_EQ(ko.tasks.size(), 2u);
  for (const auto& t : ko.tasks) EXPECT_EQ(t.ticker, "KO");
}

TEST_F(Rq1, SyntheticForecasterDetectsInjectedBias) {
  const auto set = tasks({Rq1Target::StockPrice}, 3, 30);
  SyntheticForecastBackend backend(set.tasks, {1.0, 3.0}, 17);
  const auto report = run_rq1(set, backend, "mock-model", {Rq1Target::StockPrice});
  ASSERT_EQ(report.targets.size(), 1u);
  const auto& s = report.targets[0];
  EXPECT_EQ(s.before.scored, 30u);
  EXPECT_EQ(s.after.scored, 30u);
  ASSERT_TRUE(s.welch);
  EXPECT_LT(s.welch->p, 0.05);
  EXPECT_LT(*s.before.mean_log_mse, *s.after.mean_log_mse);
  // ln(sigma^2) is the centre of each group
  EXPECT_NEAR(*s.before.mean_log_mse, std::log(1.0), 0.5);
  EXPECT_NEAR(*s.after.mean_log_mse, std::log(9.0), 0.5);

  // offline recomputation of the summary from the per-task records
  std::vector<double> b, a;
  for (const auto& o : report.outcomes) {
    ASSERT_TRUE(o.log_mse);
    (o.group == Rq1Group::BeforeCutoff ? b : a).push_back(*o.log_mse);
  }
  EXPECT_EQ(b, s.before.log_mses);
  EXPECT_EQ(a, s.after.log_mses);
  const auto w = stats::welch_one_sided(b, a, stats::Alternative::Less);
  EXPECT_EQ(w.t, s.welch->t);
  EXPECT_EQ(w.p, s.welch->p);
}

TEST_F(Rq1, WorkerCountDoesNotChangeTheReport) {
  const auto set = tasks({Rq1Target::StockPrice, Rq1Target::Revenue}, 2);
  SyntheticForecastBackend b1(set.tasks, {2.0, 2.0}, 5);
  SyntheticForecastBackend b4(set.tasks, {2.0, 2.0}, 5);
  const auto one = run_rq1(set, b1, "m", {Rq1Target::StockPrice, Rq1Target::Revenue}, 1);
  const auto four = run_rq1(set, b4, "m", {Rq1Target::StockPrice, Rq1Target::Revenue}, 4);
  EXPECT_EQ(one.to_json().dump(), four.to_json().dump());
}

TEST_F(Rq1, UnparseableAnswersAreCountedNotScored) {
  Rq1Config cfg;
  cfg.targets = {Rq1Target::StockPrice};
  cfg.tickers = {"KO", "PEP", "ORCL"};
  const auto set = build_rq1_tasks(*store_, kCutoff, cfg);
  ASSERT_EQ(set.tasks.size(), 6u);
  // KO gets prose, PEP a short list, ORCL a backend error
  auto mock = llm::MockBackend::from_json(Json::parse(R"({"rules": [
    {"name": "ko", "match": {"contains": "Coca-Cola"}, "response": {"text": "Prices will rise."}},
    {"name": "pep", "match": {"contains": "PepsiCo"}, "response": {"text": "1.0, 2.0"}},
    {"name": "orcl", "match": {"contains": "Oracle"}, "response": {"http_error": 500}}
  ]})"));
  const auto report = run_rq1(set, mock, "m", {Rq1Target::StockPrice});
  const auto& s = report.targets[0];
  EXPECT_EQ(s.before.parse_failures + s.after.parse_failures, 4u);
  EXPECT_EQ(s.before.errors + s.after.errors, 2u);
  EXPECT_EQ(s.before.scored + s.after.scored, 0u);
  EXPECT_FALSE(s.before.mean_log_mse);
  EXPECT_FALSE(s.welch);
  EXPECT_FALSE(s.welch_error.empty());
  std::size_t count_mismatch = 0;
  for (const auto& o : report.outcomes) count_mismatch += o.error == ErrorKind::CountMismatch;
  EXPECT_EQ(count_mismatch, 2u);
}

TEST(Rq1Targets, Parsing) {
  EXPECT_EQ(parse_rq1_target("price"), Rq1Target::StockPrice);
  EXPECT_EQ(parse_rq1_target("net_income"), Rq1Target::NetIncome);
  EXPECT_FALSE(parse_rq1_target("ebitda"));
  EXPECT_EQ(rq1_input_length(Rq1Target::Revenue), 8);
  EXPECT_EQ(rq1_output_length(Rq1Target::StockPrice), 10);
}
