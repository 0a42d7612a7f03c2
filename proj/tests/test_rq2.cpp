#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "finq/mock_backend.hpp"
#include "finq/rq2.hpp"
#include "support.hpp"

using namespace finq;

namespace {

const std::vector<CompanyRecord>& fixture_companies() {
  static const auto companies = test::load_companies(test::fixture("rq2_companies.csv"));
  return companies;
}

const Date kCutoff = Date::from_ymd(2023, 10, 1);

std::string prompt() { return load_rq2_prompt(default_rq2_prompt_path()); }

}  // namespace

TEST(Constituents, LatestAndBeforeCutoff) {
  const auto& cs = fixture_companies();
  const auto nasdaq = latest_constituents(cs, IndexId::Nasdaq100);
  EXPECT_EQ(nasdaq.size(), 10u);
  EXPECT_EQ(std::count(nasdaq.begin(), nasdaq.end(), "JD"), 0);
  EXPECT_EQ(std::count(nasdaq.begin(), nasdaq.end(), "WBA"), 0);
  const auto nasdaq_cut = constituents_before(cs, IndexId::Nasdaq100, kCutoff);
  // ARM and DASH joined after the cutoff
  EXPECT_EQ(nasdaq_cut.size(), nasdaq.size() - 2);
  EXPECT_EQ(latest_constituents(cs, IndexId::SP500).size(), 17u);
  EXPECT_EQ(constituents_before(cs, IndexId::SP500, kCutoff).size(), 14u);
}

TEST(Rq2Accuracy, TrivialCounts) {
  std::vector<TickerAnswer> answers;
  std::vector<std::string> subset;
  for (int i = 0; i < 10; ++i) {
    TickerAnswer a;
    a.expected = "T" + std::string(1, static_cast<char>('A' + i));
    a.match = true;
    answers.push_back(a);
    subset.push_back(a.expected);
  }
  EXPECT_DOUBLE_EQ(rq2_accuracy(answers, subset).value, 1.0);
  answers[3].match = false;
  const auto acc = rq2_accuracy(answers, subset);
  EXPECT_EQ(acc.matches, 9u);
  EXPECT_DOUBLE_EQ(acc.value, 0.9);
  // a subset member without an answer is a miss
  subset.push_back("ZZ");
  EXPECT_EQ(rq2_accuracy(answers, subset).total, 11u);
  EXPECT_EQ(rq2_accuracy({}, {}).value, 0.0);
}

// Expected values are counted by hand from the fixture script: META answers
// "FB" and V answers "Visa"; everything else normalizes to the right ticker.
TEST(RunRq2, FixtureScriptAccuracies) {
  auto mock = llm::MockBackend::load_file(test::fixture("rq2_mock.json"));
  const auto nasdaq = run_rq2(mock, "mock-model", fixture_companies(), IndexId::Nasdaq100, kCutoff, prompt());
  EXPECT_EQ(nasdaq.latest.matches, 9u);
  EXPECT_EQ(nasdaq.latest.total, 10u);
  EXPECT_DOUBLE_EQ(nasdaq.latest.value, 0.9);
  ASSERT_TRUE(nasdaq.at_cutoff);
  EXPECT_EQ(nasdaq.at_cutoff->matches, 7u);
  EXPECT_EQ(nasdaq.at_cutoff->total, 8u);

  const auto sp = run_rq2(mock, "mock-model", fixture_companies(), IndexId::SP500, kCutoff, prompt());
  EXPECT_EQ(sp.latest.matches, 15u);
  EXPECT_EQ(sp.latest.total, 17u);
  ASSERT_TRUE(sp.at_cutoff);
  EXPECT_EQ(sp.at_cutoff->matches, 12u);
  EXPECT_EQ(sp.at_cutoff->total, 14u);
  EXPECT_GE(nasdaq.latest.value, sp.latest.value);

  const auto doc = sp.to_json();
  EXPECT_EQ(doc.at("model"), "mock-model");
}

TEST(RunRq2, FailuresCountAsMisses) {
  // a script that only knows Apple: every other call is unmatched
  auto mock = llm::MockBackend::from_json(Json::parse(
      R"({"rules": [{"name": "a", "match": {"contains": "company: Apple Inc..\n"}, "response": {"text": "AAPL"}}]})"));
  const auto r = run_rq2(mock, "m", fixture_companies(), IndexId::Nasdaq100, std::nullopt, prompt());
  EXPECT_EQ(r.latest.matches, 1u);
  EXPECT_EQ(r.latest.total, 10u);
  EXPECT_FALSE(r.at_cutoff);
  const auto failed = std::count_if(r.answers.begin(), r.answers.end(), [](const auto& a) { return a.error.has_value(); });
  EXPECT_EQ(failed, 9);
}

TEST(RunRq2Property, OrderAndWorkerInvariance) {
  auto mock = llm::MockBackend::load_file(test::fixture("rq2_mock.json"));
  const auto base = run_rq2(mock, "mock-model", fixture_companies(), IndexId::SP500, kCutoff, prompt());
  std::mt19937 rng(8);
  for (int i = 0; i < 10; ++i) {
    auto shuffled = fixture_companies();
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto r = run_rq2(mock, "mock-model", shuffled, IndexId::SP500, kCutoff, prompt(), 1 + i % 4);
    EXPECT_EQ(r.latest.matches, base.latest.matches);
    EXPECT_EQ(r.at_cutoff->matches, base.at_cutoff->matches);
    EXPECT_EQ(r.to_json().dump(), base.to_json().dump());
  }
}
