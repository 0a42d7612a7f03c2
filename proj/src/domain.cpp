#include "finq/domain.hpp"

#include <algorithm>
#include <cctype>

#include <fmt/format.h>

namespace finq {
namespace {

std::string lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::optional<int> parse_year(std::string_view text) {
  if (text.size() != 4) return std::nullopt;
  int y = 0;
  for (char c : text) {
    if (c < '0' || c > '9') return std::nullopt;
    y = y * 10 + (c - '0');
  }
  if (y < 1900 || y > 2999) return std::nullopt;
  return y;
}

}  // namespace

std::string_view to_string(Periodicity p) {
  switch (p) {
    case Periodicity::Daily: return "daily";
    case Periodicity::Weekly: return "weekly";
    case Periodicity::Monthly: return "monthly";
    case Periodicity::Yearly: return "yearly";
  }
  return "daily";
}

std::string_view to_string(Frequency f) {
  return f == Frequency::Quarterly ? "quarterly" : "yearly";
}

std::string_view to_string(StatementKind k) {
  switch (k) {
    case StatementKind::IncomeStatement: return "income_statement";
    case StatementKind::BalanceSheet: return "balance_sheet";
    case StatementKind::CashFlow: return "cash_flow";
  }
  return "income_statement";
}

std::string_view to_string(IndexId i) { return i == IndexId::Nasdaq100 ? "NASDAQ100" : "SP500"; }

std::optional<Periodicity> parse_periodicity(std::string_view text) {
  const auto t = lower(text);
  if (t == "daily") return Periodicity::Daily;
  if (t == "weekly") return Periodicity::Weekly;
  if (t == "monthly") return Periodicity::Monthly;
  if (t == "yearly") return Periodicity::Yearly;
  return std::nullopt;
}

std::optional<Frequency> parse_frequency(std::string_view text) {
  const auto t = lower(text);
  if (t == "quarterly") return Frequency::Quarterly;
  if (t == "yearly") return Frequency::Yearly;
  return std::nullopt;
}

std::optional<StatementKind> parse_statement_kind(std::string_view text) {
  const auto t = lower(text);
  if (t == "income_statement") return StatementKind::IncomeStatement;
  if (t == "balance_sheet") return StatementKind::BalanceSheet;
  if (t == "cash_flow") return StatementKind::CashFlow;
  return std::nullopt;
}

std::optional<IndexId> parse_index_id(std::string_view text) {
  if (text == "NASDAQ100") return IndexId::Nasdaq100;
  if (text == "SP500") return IndexId::SP500;
  return std::nullopt;
}

Date PeriodTag::nominal_end() const {
  if (quarter == 0) return Date::from_ymd(year, 12, 31);
  static constexpr unsigned kEndMonth[] = {3, 6, 9, 12};
  static constexpr unsigned kEndDay[] = {31, 30, 30, 31};
  return Date::from_ymd(year, kEndMonth[quarter - 1], kEndDay[quarter - 1]);
}

std::string PeriodTag::to_string() const {
  return quarter == 0 ? fmt::format("{}FY", year) : fmt::format("{}Q{}", year, quarter);
}

std::optional<PeriodTag> PeriodTag::parse_canonical(std::string_view text) {
  if (text.size() != 6) return std::nullopt;
  auto y = parse_year(text.substr(0, 4));
  if (!y) return std::nullopt;
  const auto rest = text.substr(4);
  if (rest == "FY") return PeriodTag{*y, 0};
  if (rest[0] == 'Q' && rest[1] >= '1' && rest[1] <= '4') return PeriodTag{*y, rest[1] - '0'};
  return std::nullopt;
}

std::optional<PeriodTag> PeriodTag::parse(std::string_view text) {
  std::string compact;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '-' || c == '_') continue;
    compact += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  if (auto y = parse_year(compact)) return PeriodTag{*y, 0};
  if (auto tag = parse_canonical(compact)) return tag;
  // Q2 2023 / FY2023
  if (compact.size() == 6 && compact.starts_with("FY")) {
    if (auto y = parse_year(compact.substr(2))) return PeriodTag{*y, 0};
  }
  if (compact.size() == 6 && compact[0] == 'Q' && compact[1] >= '1' && compact[1] <= '4') {
    if (auto y = parse_year(compact.substr(2))) return PeriodTag{*y, compact[1] - '0'};
  }
  return std::nullopt;
}

}  // namespace finq
