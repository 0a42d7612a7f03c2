#include "finq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "finq/error.hpp"
#include "finq/mock_backend.hpp"

namespace finq {
namespace {

const std::set<std::string, std::less<>> kBanks{"BAC", "C", "GS", "JPM", "MS"};
const std::set<std::string, std::less<>> kPayments{"V"};

std::string fixed_point(std::int64_t units, int digits) {
  std::int64_t scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  const bool neg = units < 0;
  const auto mag = neg ? -units : units;
  if (digits == 0) return fmt::format("{}{}", neg ? "-" : "", mag);
  return fmt::format("{}{}.{:0{}}", neg ? "-" : "", mag / scale, mag % scale, digits);
}

std::int64_t cents(double v) { return std::llround(v * 100.0); }

struct Quarter {
  std::map<std::string, std::int64_t> currency;  // whole dollars
  std::int64_t eps_basic = 0;                     // cents
  std::int64_t eps_diluted = 0;
};

class Rng {
 public:
  Rng(std::string_view key, std::uint64_t seed) : gen_(llm::fnv1a(key, seed)) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal(double sd) { return std::normal_distribution<double>(0.0, sd)(gen_); }

 private:
  std::mt19937_64 gen_;
};

void synth_prices(const std::string& ticker, const std::vector<Date>& days, std::uint64_t seed,
                  std::string& out, std::size_t& rows) {
  Rng rng(ticker + "/prices", seed);
  double price = rng.uniform(20.0, 600.0);
  const double drift = rng.uniform(-0.0001, 0.0008);
  const double vol = rng.uniform(0.010, 0.028);
  const auto base_volume = rng.uniform(2e6, 6e7);
  const auto n = days.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double open = price * (1.0 + rng.normal(0.004));
    price *= std::exp(drift + rng.normal(vol));
    price = std::max(price, 1.0);
    const auto c = cents(price);
    const auto o = std::max<std::int64_t>(cents(open), 1);
    const auto h = std::max({o, c, cents(std::max(open, price) * (1.0 + std::fabs(rng.normal(0.006))))});
    const auto l = std::max<std::int64_t>(
        1, std::min({o, c, cents(std::min(open, price) * (1.0 - std::fabs(rng.normal(0.006))))}));
    // Adjusted close drifts below close further back in time.
    const double factor = 1.0 - 0.015 * static_cast<double>(n - 1 - i) / 252.0 * 0.1;
    const auto adj = std::max<std::int64_t>(1, std::llround(static_cast<double>(c) * factor));
    const auto volume = std::llround(base_volume * std::exp(rng.normal(0.3)));
    out += fmt::format("{},{},{},{},{},{},{},{}\n", ticker, days[i].to_string(), fixed_point(o, 2),
                       fixed_point(h, 2), fixed_point(l, 2), fixed_point(c, 2),
                       fixed_point(adj, 2), volume);
    ++rows;
  }
}

void synth_fundamentals(const std::string& ticker, const MetricVocabulary& vocab,
                        const SynthConfig& config, std::string& out, std::size_t& rows) {
  Rng rng(ticker + "/fundamentals", config.seed);
  const bool bank = kBanks.count(ticker) > 0;
  const bool payments = kPayments.count(ticker) > 0;
  // Values must stay well inside the decimal range (about 9.2e12), so the
  // series follow a trend with independent noise instead of a random walk.
  const double revenue0 = rng.uniform(1e9, 1.5e10);
  const double growth = rng.uniform(0.002, 0.02);
  const double cost_ratio = rng.uniform(0.25, 0.7);
  const double rnd_ratio = rng.uniform(0.0, 0.15);
  const double sgna_ratio = rng.uniform(0.05, 0.2);
  const double shares = rng.uniform(8e8, 1.5e10);
  const double liability_ratio = rng.uniform(0.4, 0.9) + (bank ? 0.05 : 0.0);
  const double assets0 = revenue0 * rng.uniform(2.0, 6.0) * (bank ? 3.0 : 1.0);
  int quarter_index = 0;

  auto unit_of = [&](const std::string& metric) {
    const auto* info = vocab.find(metric);
    if (info == nullptr) throw Error(ErrorKind::UnknownMetric, metric);
    if (info->unit_kind == "per_share") return std::string("USD/share");
    if (info->unit_kind == "ratio") return std::string("ratio");
    return std::string("USD");
  };
  auto emit = [&](const PeriodTag& tag, const std::string& metric, const std::string& value) {
    out += fmt::format("{},{},{},{},{},{}\n", ticker, tag.to_string(),
                       tag.nominal_end().to_string(), metric, value, unit_of(metric));
    ++rows;
  };
  static const std::set<std::string> kStocks{"total_assets", "total_liabilities", "total_equity"};

  for (int year = config.first_fiscal_year; year <= config.last_fiscal_year; ++year) {
    std::vector<Quarter> quarters;
    for (int q = 1; q <= 4; ++q) {
      const double k = static_cast<double>(quarter_index++);
      const double revenue = revenue0 * std::exp(growth * k + rng.normal(0.05));
      const double assets = assets0 * std::exp(growth * 0.6 * k + rng.normal(0.02));
      Quarter out_q;
      auto& m = out_q.currency;
      const auto rev = std::llround(revenue);
      const auto cost = std::llround(revenue * cost_ratio * std::exp(rng.normal(0.02)));
      const auto rnd = std::llround(revenue * rnd_ratio);
      const auto sgna = std::llround(revenue * sgna_ratio * std::exp(rng.normal(0.03)));
      m["revenue"] = rev;
      m["cost_of_revenue"] = cost;
      m["gross_profit"] = rev - cost;
      m["rnd_expense"] = rnd;
      m["sgna_expense"] = sgna;
      m["operating_income"] = rev - cost - rnd - sgna;
      m["interest_expense"] = std::llround(revenue * (bank ? 0.22 : 0.012));
      std::int64_t pretax = m["operating_income"] - m["interest_expense"];
      if (bank) {
        m["interest_income"] = std::llround(revenue * 0.55);
        m["net_interest_income"] = m["interest_income"] - m["interest_expense"];
        m["provision_for_credit_losses"] = std::llround(revenue * std::fabs(0.05 + rng.normal(0.02)));
        pretax = m["operating_income"] + m["net_interest_income"] - m["provision_for_credit_losses"];
      }
      if (payments) m["transaction_revenue"] = std::llround(revenue * 0.42);
      m["income_before_tax"] = pretax;
      m["income_tax_expense"] = pretax > 0 ? std::llround(static_cast<double>(pretax) * 0.19) : 0;
      m["net_income"] = pretax - m["income_tax_expense"];
      m["total_assets"] = std::llround(assets);
      m["total_liabilities"] = std::llround(assets * liability_ratio);
      m["total_equity"] = m["total_assets"] - m["total_liabilities"];
      m["operating_cash_flow"] = std::llround(static_cast<double>(m["net_income"]) * 1.15 +
                                              revenue * 0.04);
      m["capital_expenditures"] = -std::llround(revenue * 0.06 * std::exp(rng.normal(0.1)));
      m["dividends_paid"] = -std::llround(std::max(0.0, static_cast<double>(m["net_income"])) * 0.3);
      out_q.eps_basic = cents(static_cast<double>(m["net_income"]) / shares);
      out_q.eps_diluted = cents(static_cast<double>(m["net_income"]) / (shares * 1.012));
      quarters.push_back(std::move(out_q));
    }

    Quarter fy;
    for (const auto& [metric, _] : quarters.front().currency) {
      if (kStocks.count(metric) > 0) {
        fy.currency[metric] = quarters.back().currency.at(metric);
      } else {
        std::int64_t sum = 0;
        for (const auto& q : quarters) sum += q.currency.at(metric);
        fy.currency[metric] = sum;
      }
    }
    for (const auto& q : quarters) {
      fy.eps_basic += q.eps_basic;
      fy.eps_diluted += q.eps_diluted;
    }

    auto emit_period = [&](const PeriodTag& tag, const Quarter& data) {
      // Vocabulary order keeps the file readable and stable.
      for (const auto& info : vocab.all()) {
        const auto& id = info.id;
        if (auto it = data.currency.find(id); it != data.currency.end()) {
          emit(tag, id, fixed_point(it->second, 0));
        } else if (id == "eps_basic") {
          emit(tag, id, fixed_point(data.eps_basic, 2));
        } else if (id == "eps_diluted") {
          emit(tag, id, fixed_point(data.eps_diluted, 2));
        } else if (id == "operating_margin" && payments) {
          const auto rev = data.currency.at("revenue");
          const auto margin = static_cast<double>(data.currency.at("operating_income")) /
                              static_cast<double>(rev);
          emit(tag, id, fixed_point(std::llround(margin * 10000.0), 4));
        }
      }
    };
    for (int q = 1; q <= 4; ++q) emit_period(PeriodTag{year, q}, quarters[q - 1]);
    emit_period(PeriodTag{year, 0}, fy);
  }
}

}  // namespace

std::vector<Date> trading_days(Date start, Date end) {
  std::vector<Date> out;
  for (Date d = start; d <= end; d = d.plus_days(1)) {
    if (d.is_weekend()) continue;
    const auto m = d.month();
    const auto day = d.day();
    if ((m == 1 && day == 1) || (m == 7 && day == 4) || (m == 12 && day == 25)) continue;
    out.push_back(d);
  }
  return out;
}

SynthOutput synthesize(const std::vector<CompanyRecord>& companies,
                       const MetricVocabulary& vocabulary, const SynthConfig& config) {
  if (config.price_end < config.price_start || config.last_fiscal_year < config.first_fiscal_year) {
    throw Error(ErrorKind::ConfigError, "synthetic data range is empty");
  }
  SynthOutput out;
  out.prices_csv = std::string(kPricesHeader) + "\n";
  out.fundamentals_csv = std::string(kFundamentalsHeader) + "\n";
  const auto days = trading_days(config.price_start, config.price_end);
  auto sorted = companies;
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.ticker < b.ticker; });
  for (const auto& c : sorted) {
    synth_prices(c.ticker, days, config.seed, out.prices_csv, out.price_rows);
    synth_fundamentals(c.ticker, vocabulary, config, out.fundamentals_csv, out.fundamental_rows);
  }
  return out;
}

SynthStoreReport create_synthetic_store(const std::filesystem::path& db_path,
                                        const std::filesystem::path& companies_csv,
                                        const MetricVocabulary& vocabulary,
                                        const SynthConfig& config) {
  if (std::filesystem::exists(db_path)) {
    throw Error(ErrorKind::IoError, fmt::format("{} already exists", db_path.string()));
  }
  std::ifstream companies_in(companies_csv, std::ios::binary);
  if (!companies_in) {
    throw Error(ErrorKind::IoError, fmt::format("cannot read {}", companies_csv.string()));
  }
  auto store = MarketStore::create(db_path, vocabulary);
  SynthStoreReport report;
  report.companies = store.ingest_companies(companies_in);
  const auto data = synthesize(store.companies(), vocabulary, config);
  std::istringstream prices(data.prices_csv);
  report.prices = store.ingest_prices(prices);
  std::istringstream fundamentals(data.fundamentals_csv);
  report.fundamentals = store.ingest_fundamentals(fundamentals);
  return report;
}

std::filesystem::path default_companies_path() {
  return std::filesystem::path(FINQ_DATA_DIR) / "companies.csv";
}

}  // namespace finq
