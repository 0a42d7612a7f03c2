#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <regex>

#include "finq/error.hpp"
#include "finq/mock_backend.hpp"
#include "finq/rq2.hpp"
#include "finq/ticker_resolver.hpp"
#include "support.hpp"

using namespace finq;

namespace {

const std::vector<CompanyRecord>& bundled() {
  static const auto companies = test::load_companies(default_companies_path());
  return companies;
}

llm::MockBackend answering(const std::vector<std::pair<std::string, std::string>>& replies) {
  Json rules = Json::array();
  for (const auto& [company, text] : replies) {
    rules.push_back({{"name", company},
                     {"match", {{"contains", "company: " + company + ".\n"}}},
                     {"response", {{"text", text}}},
                     {"usage", {{"prompt_tokens", 50}, {"completion_tokens", 3}}}});
  }
  return llm::MockBackend::from_json(Json{{"rules", rules}});
}

}  // namespace

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize_ticker("NVDA"), "NVDA");
  EXPECT_EQ(normalize_ticker("  nvda\n"), "NVDA");
  EXPECT_EQ(normalize_ticker("brk.b"), "BRK-B");
  EXPECT_EQ(normalize_ticker("BRK-B"), "BRK-B");
  EXPECT_EQ(normalize_ticker("`MSFT`"), "MSFT");
  EXPECT_EQ(normalize_ticker("\"AAPL\""), "AAPL");
  EXPECT_EQ(normalize_ticker("'CRWD'"), "CRWD");
  EXPECT_EQ(normalize_ticker("I think it is NVDA."), "NVDA");
  EXPECT_EQ(normalize_ticker("NASDAQ: AMZN"), "AMZN");
  EXPECT_EQ(normalize_ticker("The ticker is GOOGL."), "GOOGL");
  EXPECT_EQ(normalize_ticker("Ticker: GE"), "GE");
  EXPECT_EQ(normalize_ticker("I am not sure about that company"), "");
  EXPECT_EQ(normalize_ticker(""), "");
}

TEST(NormalizeProperty, IdempotentAndTickerShaped) {
  std::mt19937 rng(31);
  const std::vector<std::string> pieces{"a", "B", "brk", ".", "-", " ", "`", "'", "\"", "NASDAQ", ":", "I",
                                        "think", "NVDA", "x1", "\n", "GOOGL", "é", "ABCDEFG", "b"};
  const std::regex shape("[A-Z]{1,5}(-[A-Z])?");
  for (int i = 0; i < 20000; ++i) {
    std::string s;
    const int n = std::uniform_int_distribution<int>(0, 8)(rng);
    for (int k = 0; k < n; ++k) s += pieces[std::uniform_int_distribution<std::size_t>(0, pieces.size() - 1)(rng)];
    const auto once = normalize_ticker(s);
    ASSERT_EQ(normalize_ticker(once), once) << "input: " << s;
    if (!once.empty()) {
      // Single uppercased tokens keep their text; extracted candidates are ticker-shaped.
      const bool single = s.find_first_of(" \n\t") == std::string::npos;
      if (!single) ASSERT_TRUE(std::regex_match(once, shape)) << s << " -> " << once;
    }
  }
}

TEST(LocalRegistry, ResolvesNamesAndAliases) {
  const LocalRegistry reg(bundled());
  EXPECT_EQ(reg.resolve_local("NVIDIA Corporation"), "NVDA");
  EXPECT_EQ(reg.resolve_local("nvidia"), "NVDA");
  EXPECT_EQ(reg.resolve_local("  Nvidia   Corp "), "NVDA");
  EXPECT_EQ(reg.resolve_local("Walmart"), "WMT");
  EXPECT_TRUE(reg.has_ticker("NVDA"));
  EXPECT_FALSE(reg.has_ticker("ZZZZ"));
  try {
    reg.resolve_local("Acme Widgets");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnknownCompany);
  }
  EXPECT_FALSE(reg.try_resolve("Nvidi"));  // no fuzzy matching
}

TEST(LocalRegistryProperty, OnlyRegistryTickersComeBack) {
  const LocalRegistry reg(bundled());
  std::vector<std::string> probes;
  for (const auto& c : reg.companies()) {
    probes.push_back(c.name);
    probes.push_back(c.ticker);
    for (const auto& a : c.aliases) probes.push_back(a);
  }
  std::mt19937 rng(4);
  const auto base = probes;
  for (int i = 0; i < 5000; ++i) {
    auto s = base[std::uniform_int_distribution<std::size_t>(0, base.size() - 1)(rng)];
    switch (i % 4) {
      case 0: std::transform(s.begin(), s.end(), s.begin(), ::toupper); break;
      case 1: if (!s.empty()) s.erase(std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng), 1); break;
      case 2: s += " Inc"; break;
      default: s = " " + s + " "; break;
    }
    probes.push_back(s);
  }
  for (const auto& p : probes) {
    if (const auto t = reg.try_resolve(p)) ASSERT_TRUE(reg.has_ticker(*t)) << p;
  }
}

TEST(ResolveViaLlm, MatchesAfterNormalization) {
  const auto prompt = load_rq2_prompt(default_rq2_prompt_path());
  EXPECT_NE(rq2_prompt(prompt, "NVIDIA Corporation").find("company: NVIDIA Corporation.\n"), std::string::npos);
  auto mock = answering({{"NVIDIA Corporation", "NVDA"},
                         {"Berkshire Hathaway Inc.", "brk.b"},
                         {"NVIDIA Corp", "I think it is NVDA."},
                         {"Mystery Co", "I do not know that company"}});
  auto a = resolve_via_llm(mock, "mock-model", "NVIDIA Corporation", "NVDA", prompt);
  EXPECT_TRUE(a.match);
  EXPECT_EQ(a.raw, "NVDA");
  EXPECT_EQ(a.usage, (llm::TokenUsage{50, 3}));
  auto b = resolve_via_llm(mock, "mock-model", "Berkshire Hathaway Inc.", "BRK-B", prompt);
  EXPECT_TRUE(b.match);
  EXPECT_EQ(b.normalized, "BRK-B");
  auto c = resolve_via_llm(mock, "mock-model", "NVIDIA Corp", "NVDA", prompt);
  EXPECT_TRUE(c.match);
  auto d = resolve_via_llm(mock, "mock-model", "Mystery Co", "MYST", prompt);
  EXPECT_FALSE(d.match);
  EXPECT_EQ(d.normalized, "");
}
