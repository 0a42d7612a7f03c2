#include "finq/ticker_resolver.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <fmt/format.h>

#include "finq/error.hpp"
#include "finq/market_store.hpp"

namespace finq {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

bool matches_ticker_pattern(std::string_view s) {
  // [A-Z]{1,5}(-[A-Z])?
  std::size_t letters = 0;
  while (letters < s.size() && s[letters] >= 'A' && s[letters] <= 'Z') ++letters;
  if (letters < 1 || letters > 5) return false;
  if (letters == s.size()) return true;
  return s.size() == letters + 2 && s[letters] == '-' && s[letters + 1] >= 'A' &&
         s[letters + 1] <= 'Z';
}

std::string strip_quotes(std::string_view s) {
  static constexpr std::array<std::string_view, 7> kQuotes{
      "\"", "'", "`", "\xE2\x80\x9C", "\xE2\x80\x9D", "\xE2\x80\x98", "\xE2\x80\x99"};
  bool changed = true;
  while (changed) {
    changed = false;
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    for (auto q : kQuotes) {
      if (s.starts_with(q)) {
        s.remove_prefix(q.size());
        changed = true;
      }
      if (s.ends_with(q)) {
        s.remove_suffix(q.size());
        changed = true;
      }
    }
  }
  return std::string(s);
}

/// Keeps letters, digits and class separators; "." becomes "-"; trailing
/// separators (sentence punctuation) are dropped.
std::string clean_token(std::string_view token, bool uppercase) {
  std::string out;
  for (char c : token) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u)) {
      out += uppercase ? static_cast<char>(std::toupper(u)) : c;
    } else if (c == '.' || c == '-') {
      out += '-';
    }
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  while (!out.empty() && out.front() == '-') out.erase(out.begin());
  return out;
}

std::vector<std::string_view> split_tokens(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (is_space(s[i]) || s[i] == ':' || s[i] == ',')) ++i;
    const auto start = i;
    while (i < s.size() && !is_space(s[i]) && s[i] != ':' && s[i] != ',') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

std::string collapse_lower(std::string_view s) {
  std::string out;
  bool space = false;
  for (char c : s) {
    if (is_space(c)) {
      space = true;
      continue;
    }
    if (space && !out.empty()) out += ' ';
    space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

}  // namespace

std::string normalize_ticker(std::string_view raw) {
  const auto stripped = strip_quotes(raw);
  const auto tokens = split_tokens(stripped);
  if (tokens.empty()) return {};
  if (tokens.size() == 1) {
    auto t = clean_token(tokens[0], true);
    return matches_ticker_pattern(t) ? t : std::string{};
  }
  static constexpr std::array<std::string_view, 8> kSkippable{
      "I", "A", "NYSE", "NASDAQ", "AMEX", "ARCA", "BATS", "OTC"};
  std::vector<std::string> candidates;
  for (auto token : tokens) {
    auto t = clean_token(token, false);
    if (matches_ticker_pattern(t)) candidates.push_back(std::move(t));
  }
  for (const auto& c : candidates) {
    if (std::find(kSkippable.begin(), kSkippable.end(), c) == kSkippable.end()) return c;
  }
  // In prose "I" and "A" are words, not symbols.
  for (const auto& c : candidates) {
    if (c != "I" && c != "A") return c;
  }
  return {};
}

LocalRegistry::LocalRegistry(std::vector<CompanyRecord> companies)
    : companies_(std::move(companies)) {
  for (std::size_t i = 0; i < companies_.size(); ++i) {
    const auto& c = companies_[i];
    by_ticker_.emplace(c.ticker, i);
    by_name_.emplace(collapse_lower(c.name), c.ticker);
    for (const auto& a : c.aliases) by_name_.emplace(collapse_lower(a), c.ticker);
  }
}

LocalRegistry LocalRegistry::from_store(const MarketStore& store) {
  return LocalRegistry(store.companies());
}

std::optional<std::string> LocalRegistry::try_resolve(std::string_view name_or_alias) const {
  auto it = by_name_.find(collapse_lower(name_or_alias));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

std::string LocalRegistry::resolve_local(std::string_view name_or_alias) const {
  if (auto t = try_resolve(name_or_alias)) return *t;
  throw Error(ErrorKind::UnknownCompany, fmt::format("unknown company '{}'", name_or_alias));
}

bool LocalRegistry::has_ticker(std::string_view ticker) const {
  return by_ticker_.find(ticker) != by_ticker_.end();
}

const CompanyRecord* LocalRegistry::company(std::string_view ticker) const {
  auto it = by_ticker_.find(ticker);
  return it == by_ticker_.end() ? nullptr : &companies_[it->second];
}

}  // namespace finq
