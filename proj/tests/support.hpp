#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "finq/market_store.hpp"
#include "finq/metric_vocabulary.hpp"
#include "finq/query_library.hpp"
#include "finq/synth.hpp"

namespace finq::test {

inline std::filesystem::path source_dir() { return std::filesystem::path(FINQ_SOURCE_DIR); }
inline std::filesystem::path fixture(const std::string& name) {
  return source_dir() / "tests" / "fixtures" / name;
}

/// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("finq-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline MetricVocabulary vocabulary() {
  return MetricVocabulary::load_file(default_vocabulary_path());
}

/// The bundled companies plus synthetic prices and fundamentals.
inline std::filesystem::path make_synthetic_store(const TempDir& dir,
                                                  const SynthConfig& config = {}) {
  auto path = dir / "store.db";
  create_synthetic_store(path, default_companies_path(), vocabulary(), config);
  return path;
}

/// Company records parsed through the store's own ingest rules.
inline std::vector<CompanyRecord> load_companies(const std::filesystem::path& csv) {
  TempDir dir;
  auto store = MarketStore::create(dir / "companies.db", vocabulary());
  std::ifstream in(csv);
  const auto report = store.ingest_companies(in);
  if (report.rejected != 0) throw std::runtime_error("fixture rows rejected: " + csv.string());
  return store.companies();
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

}  // namespace finq::test
