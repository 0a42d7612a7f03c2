#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "finq/domain.hpp"

namespace finq {

class MarketStore;

/// Normalizes a model's ticker answer.
///
///  - surrounding whitespace, quotes and backticks are stripped;
///  - a single token is uppercased, "." share-class separators become "-";
///  - with several tokens, the first all-caps token matching
///    [A-Z]{1,5}(-[A-Z])? wins, skipping the words "I"/"A" and exchange
///    prefixes (NYSE, NASDAQ, ...) when another candidate exists; "I" and "A"
///    are never taken from multi-word text.
///
/// Returns an empty string when nothing ticker-shaped can be extracted.
/// normalize_ticker(normalize_ticker(x)) == normalize_ticker(x).
std::string normalize_ticker(std::string_view raw);

/// Deterministic name/alias -> ticker lookup over the company registry.
/// Matching is case-insensitive on whitespace-collapsed text; there is no
/// fuzzy matching.
class LocalRegistry {
 public:
  explicit LocalRegistry(std::vector<CompanyRecord> companies);
  static LocalRegistry from_store(const MarketStore& store);

  /// Throws UnknownCompany.
  std::string resolve_local(std::string_view name_or_alias) const;
  std::optional<std::string> try_resolve(std::string_view name_or_alias) const;
  bool has_ticker(std::string_view ticker) const;
  const std::vector<CompanyRecord>& companies() const { return companies_; }
  const CompanyRecord* company(std::string_view ticker) const;

 private:
  std::vector<CompanyRecord> companies_;
  std::map<std::string, std::string, std::less<>> by_name_;
  std::map<std::string, std::size_t, std::less<>> by_ticker_;
};

}  // namespace finq
