#include "finq/metric_vocabulary.hpp"

#include <cctype>
#include <fstream>

#include <fmt/format.h>

#include "finq/csv.hpp"
#include "finq/error.hpp"

namespace finq {

std::string MetricVocabulary::fold(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char raw : text) {
    const auto c = static_cast<unsigned char>(raw);
    if (std::isalnum(c) || c == '&') {
      if (pending_space && !out.empty()) out += ' ';
      pending_space = false;
      out += static_cast<char>(std::tolower(c));
    } else {
      pending_space = true;
    }
  }
  return out;
}

MetricVocabulary MetricVocabulary::from_metrics(int version, std::vector<MetricInfo> metrics) {
  MetricVocabulary vocab;
  vocab.version_ = version;
  vocab.metrics_ = std::move(metrics);
  for (std::size_t i = 0; i < vocab.metrics_.size(); ++i) {
    auto& m = vocab.metrics_[i];
    m.ordinal = static_cast<int>(i);
    if (!vocab.by_id_.emplace(m.id, i).second) {
      throw Error(ErrorKind::MalformedRow, fmt::format("duplicate metric '{}'", m.id));
    }
  }
  // Ids and their spelled-out forms win over synonyms.
  for (std::size_t i = 0; i < vocab.metrics_.size(); ++i) {
    vocab.by_synonym_.emplace(fold(vocab.metrics_[i].id), i);
  }
  for (std::size_t i = 0; i < vocab.metrics_.size(); ++i) {
    for (const auto& syn : vocab.metrics_[i].synonyms) {
      auto [it, inserted] = vocab.by_synonym_.emplace(fold(syn), i);
      if (!inserted && it->second != i) {
        throw Error(ErrorKind::MalformedRow,
                    fmt::format("synonym '{}' maps to both {} and {}", syn,
                                vocab.metrics_[it->second].id, vocab.metrics_[i].id));
      }
    }
  }
  return vocab;
}

MetricVocabulary MetricVocabulary::load(std::istream& in) {
  int version = 0;
  std::vector<MetricInfo> metrics;
  std::string line;
  bool header_seen = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("version:");
      if (pos != std::string::npos) version = std::stoi(line.substr(pos + 8));
      continue;
    }
    auto fields = split_csv_line(line);
    if (!header_seen) {
      if (fields != std::vector<std::string>{"metric", "statement_kind", "unit_kind", "synonyms"}) {
        throw Error(ErrorKind::MalformedHeader, "metric vocabulary header mismatch");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 4 || fields[0].empty()) {
      throw Error(ErrorKind::MalformedRow, fmt::format("metric vocabulary line {}", line_no));
    }
    MetricInfo info;
    info.id = fields[0];
    if (fields[1] != "none") {
      info.statement = parse_statement_kind(fields[1]);
      if (!info.statement) {
        throw Error(ErrorKind::MalformedRow,
                    fmt::format("unknown statement kind '{}' on line {}", fields[1], line_no));
      }
    }
    info.unit_kind = fields[2];
    std::size_t start = 0;
    const std::string& syns = fields[3];
    while (start <= syns.size() && !syns.empty()) {
      const auto bar = syns.find('|', start);
      auto piece = syns.substr(start, bar == std::string::npos ? std::string::npos : bar - start);
      if (!piece.empty()) info.synonyms.push_back(std::move(piece));
      if (bar == std::string::npos) break;
      start = bar + 1;
    }
    metrics.push_back(std::move(info));
  }
  if (version <= 0) throw Error(ErrorKind::MalformedHeader, "metric vocabulary lacks a version");
  return from_metrics(version, std::move(metrics));
}

MetricVocabulary MetricVocabulary::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read {}", path.string()));
  return load(in);
}

const MetricInfo* MetricVocabulary::find(std::string_view id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &metrics_[it->second];
}

std::optional<std::string> MetricVocabulary::normalize(std::string_view user_text) const {
  if (auto* exact = find(user_text)) return exact->id;
  auto it = by_synonym_.find(fold(user_text));
  if (it == by_synonym_.end()) return std::nullopt;
  return metrics_[it->second].id;
}

std::vector<const MetricInfo*> MetricVocabulary::metrics_for(StatementKind kind) const {
  std::vector<const MetricInfo*> out;
  for (const auto& m : metrics_) {
    if (m.statement == kind) out.push_back(&m);
  }
  return out;
}

}  // namespace finq
