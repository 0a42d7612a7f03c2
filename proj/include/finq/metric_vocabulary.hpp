#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finq/domain.hpp"

namespace finq {

struct MetricInfo {
  std::string id;
  std::optional<StatementKind> statement;  // empty for ratios outside the statements
  std::string unit_kind;                   // currency | per_share | ratio
  std::vector<std::string> synonyms;
  int ordinal = 0;  // position in the vocabulary file
};

/// The closed, versioned metric vocabulary and its synonym table.
class MetricVocabulary {
 public:
  static MetricVocabulary load(std::istream& in);
  static MetricVocabulary load_file(const std::filesystem::path& path);
  static MetricVocabulary from_metrics(int version, std::vector<MetricInfo> metrics);

  int version() const { return version_; }
  const std::vector<MetricInfo>& all() const { return metrics_; }
  const MetricInfo* find(std::string_view id) const;
  bool contains(std::string_view id) const { return find(id) != nullptr; }
  /// Maps a vocabulary id or any listed synonym to the vocabulary id.
  std::optional<std::string> normalize(std::string_view user_text) const;
  std::vector<const MetricInfo*> metrics_for(StatementKind kind) const;

  /// Lowercase, punctuation folded to single spaces ('&' kept), trimmed.
  static std::string fold(std::string_view text);

 private:
  int version_ = 0;
  std::vector<MetricInfo> metrics_;
  std::map<std::string, std::size_t, std::less<>> by_id_;
  std::map<std::string, std::size_t, std::less<>> by_synonym_;
};

}  // namespace finq
