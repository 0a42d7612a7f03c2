#pragma once

#include <chrono>
#include <filesystem>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "finq/domain.hpp"
#include "finq/llm_protocol.hpp"

namespace finq {

enum class BackendKind { None, Mock, Live };
std::string_view to_string(BackendKind k);

struct AppConfig {
  std::filesystem::path store_path;
  BackendKind backend = BackendKind::None;
  std::filesystem::path mock_script;
  std::string base_url;
  std::string api_key_env = "FINQ_API_KEY";
  std::string model = "gpt-4o";
  std::filesystem::path rate_card;
  std::filesystem::path cutoffs;
  std::filesystem::path templates;
  std::filesystem::path vocabulary;
  int max_tool_rounds = 3;
  int self_corrections = 1;
  std::chrono::milliseconds llm_timeout{60'000};
  std::chrono::milliseconds sql_timeout{10'000};
  std::size_t workers = 1;

  /// Defaults with the bundled data files filled in.
  static AppConfig defaults();
};

/// Applies one key=value setting. Unknown keys, malformed values and any
/// attempt to pass a secret directly raise ConfigError.
void apply_setting(AppConfig& config, std::string_view key, std::string_view value);

/// Reads `key = value` lines; blank lines and lines starting with '#' are
/// ignored. Later lines win.
void apply_config_stream(AppConfig& config, std::istream& in, std::string_view source = "config");
void apply_config_file(AppConfig& config, const std::filesystem::path& path);

/// Checks the backend settings: live needs a base URL and a non-empty key in
/// the named environment variable, mock needs a script. Throws ConfigError.
void require_backend(const AppConfig& config);

/// Builds the configured backend (after require_backend). The API key is
/// read from the environment here and nowhere else.
std::unique_ptr<llm::ChatBackend> make_backend(const AppConfig& config);

/// model_id -> knowledge cutoff, from a CSV with header
/// model_id,knowledge_cutoff.
class CutoffTable {
 public:
  static CutoffTable load_file(const std::filesystem::path& path);
  static CutoffTable load(std::istream& in);
  /// Throws UnknownModel.
  Date cutoff(std::string_view model) const;
  const std::map<std::string, Date, std::less<>>& entries() const { return cutoffs_; }

 private:
  std::map<std::string, Date, std::less<>> cutoffs_;
};

}  // namespace finq
