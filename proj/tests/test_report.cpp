#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "finq/csv.hpp"
#include "finq/error.hpp"
#include "finq/mock_backend.hpp"
#include "finq/report.hpp"
#include "support.hpp"

using namespace finq;
using finq::test::TempDir;

namespace {

const Date kCutoff = Date::from_ymd(2023, 10, 1);

Rq3Report hand_rq3() {
  Rq3Report r;
  r.model = "mock-model";
  const std::vector<std::string> queries{"plain query", "query, with a comma", "she said \"quote\"",
                                         "Return MSFT’s stock price"};
  for (const auto system : {BenchSystem::FunctionCalling, BenchSystem::TextToSql}) {
    std::vector<BenchCaseResult> cs;
    for (std::size_t i = 0; i < queries.size(); ++i) {
      BenchCaseResult c;
      c.index = i;
      c.query = queries[i];
      c.system = system;
      c.success = i != 2;
      c.failure = c.success ? FailureClass::None : FailureClass::WrongCount;
      c.detail = c.success ? "" : "expected 5 rows, got 4";
      c.usage = {100 + static_cast<std::int64_t>(i), 10};
      c.cost = Money::from_pico(1'000'000 * static_cast<std::int64_t>(i + 1));
      c.latency = std::chrono::milliseconds(300 * (i + 1));
      c.wall_time = c.latency;
      c.model_calls = system == BenchSystem::FunctionCalling ? 2 : 1;
      c.answer = Json{{"answer", "x"}};
      cs.push_back(c);
    }
    r.aggregates.push_back(aggregate(cs, system));
    r.cases.insert(r.cases.end(), cs.begin(), cs.end());
  }
  return r;
}

class Report : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    dir_ = new TempDir;
    const auto path = test::make_synthetic_store(*dir_);
    const auto store = MarketStore::open_read_only(path);

    Rq1Config cfg;
    cfg.targets = {Rq1Target::StockPrice, Rq1Target::Revenue};
    cfg.tickers = {"KO", "NVDA", "WMT"};
    const auto tasks = build_rq1_tasks(store, kCutoff, cfg);
    SyntheticForecastBackend forecaster(tasks.tasks, {1.0, 2.0}, 3);
    bundle_ = new ReportBundle;
    bundle_->rq1.push_back(run_rq1(tasks, forecaster, "mock-model", cfg.targets));

    const auto companies = test::load_companies(test::fixture("rq2_companies.csv"));
    auto mock = llm::MockBackend::load_file(test::fixture("rq2_mock.json"));
    const auto prompt = load_rq2_prompt(default_rq2_prompt_path());
    bundle_->rq2.push_back(run_rq2(mock, "mock-model", companies, IndexId::Nasdaq100, kCutoff, prompt));
    bundle_->rq2.push_back(run_rq2(mock, "mock-model", companies, IndexId::SP500, kCutoff, prompt));
    bundle_->rq3 = hand_rq3();
  }
  static void TearDownTestSuite() {
    delete bundle_;
    delete dir_;
  }

  static inline TempDir* dir_ = nullptr;
  static inline ReportBundle* bundle_ = nullptr;
};

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
  std::ifstream in(p);
  CsvReader reader(in);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> fields;
  while (reader.next(fields)) rows.push_back(fields);
  return rows;
}

std::size_t count_of(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_F(Report, JsonRoundTripIsByteIdentical) {
  const auto doc = report_json(*bundle_);
  const auto text = dump_json(doc);
  EXPECT_EQ(dump_json(Json::parse(text)), text);

  TempDir out;
  const auto written = emit_report(*bundle_, {ReportFormat::Json}, out.path());
  ASSERT_EQ(written.size(), 1u);
  EXPECT_EQ(test::read_file(written[0]), text);
  const auto loaded = load_report(written[0]);
  EXPECT_EQ(dump_json(loaded), text);
  EXPECT_EQ(report_markdown(loaded), report_markdown(doc));

  // typed records survive the trip too
  for (const auto& c : loaded.at("rq3").at("cases")) {
    EXPECT_EQ(BenchCaseResult::from_json(c).to_json().dump(), c.dump());
  }
}

TEST_F(Report, CsvHasOneRowPerRecord) {
  TempDir out;
  const auto written = emit_report(*bundle_, {ReportFormat::Csv}, out.path());
  ASSERT_EQ(written.size(), 4u);  // one rq1, two rq2, one rq3

  const auto rq3 = read_csv(out / "rq3_cases.csv");
  ASSERT_EQ(rq3.size(), 1 + bundle_->rq3->cases.size());
  for (const auto& row : rq3) EXPECT_EQ(row.size(), rq3[0].size());
  EXPECT_EQ(rq3[2][2], "query, with a comma");
  EXPECT_EQ(rq3[3][2], "she said \"quote\"");
  EXPECT_EQ(rq3[3][4], "wrong-count");

  const auto rq1 = read_csv(out / "rq1_mock-model_tasks.csv");
  EXPECT_EQ(rq1.size(), 1 + bundle_->rq1[0].outcomes.size());
  const auto rq2 = read_csv(out / "rq2_mock-model_SP500.csv");
  EXPECT_EQ(rq2.size(), 1 + bundle_->rq2[1].answers.size());
}

TEST_F(Report, MarkdownHasATablePerExperiment) {
  const auto md = report_markdown(report_json(*bundle_));
  EXPECT_EQ(count_of(md, "## RQ1: average log(MSE)"), 1u);
  EXPECT_EQ(count_of(md, "## RQ1: one-sided Welch"), 1u);
  EXPECT_EQ(count_of(md, "## RQ2:"), 1u);
  EXPECT_EQ(count_of(md, "## RQ3:"), 1u);
  // RQ2 lists each index, RQ3 each system
  EXPECT_EQ(count_of(md, "| mock-model | NASDAQ100 |"), 1u);
  EXPECT_EQ(count_of(md, "| mock-model | SP500 |"), 1u);
  EXPECT_EQ(count_of(md, "| function_calling |"), 1u);
  EXPECT_EQ(count_of(md, "| text_to_sql |"), 1u);
  EXPECT_NE(md.find("0.7500 (3/4)"), std::string::npos);

  ReportBundle only3;
  only3.rq3 = bundle_->rq3;
  const auto md3 = report_markdown(report_json(only3));
  EXPECT_EQ(md3.find("## RQ1"), std::string::npos);
  EXPECT_EQ(md3.find("## RQ2"), std::string::npos);
  EXPECT_NE(md3.find("## RQ3"), std::string::npos);
}

TEST_F(Report, EmitIsDeterministic) {
  TempDir a, b;
  const std::vector<ReportFormat> all{ReportFormat::Json, ReportFormat::Csv, ReportFormat::Markdown};
  const auto wa = emit_report(*bundle_, all, a.path());
  const auto wb = emit_report(*bundle_, all, b.path());
  ASSERT_EQ(wa.size(), wb.size());
  for (std::size_t i = 0; i < wa.size(); ++i) {
    EXPECT_EQ(wa[i].filename(), wb[i].filename());
    EXPECT_EQ(test::read_file(wa[i]), test::read_file(wb[i])) << wa[i];
  }
}

TEST(ReportLoad, RejectsForeignDocuments) {
  TempDir dir;
  test::write_file(dir / "x.json", "{\"hello\": 1}");
  test::write_file(dir / "bad.json", "{not json");
  EXPECT_THROW(load_report(dir / "x.json"), Error);
  EXPECT_THROW(load_report(dir / "bad.json"), Error);
  EXPECT_THROW(load_report(dir / "missing.json"), Error);
  EXPECT_EQ(parse_report_format("md"), ReportFormat::Markdown);
  EXPECT_FALSE(parse_report_format("xml"));
}
