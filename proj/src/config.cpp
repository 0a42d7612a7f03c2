#include "finq/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "finq/csv.hpp"
#include "finq/error.hpp"
#include "finq/http_backend.hpp"
#include "finq/mock_backend.hpp"
#include "finq/query_library.hpp"

namespace finq {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

long long parse_int(std::string_view key, std::string_view value, long long lo) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || out < lo) {
    throw Error(ErrorKind::ConfigError,
                fmt::format("{} must be an integer >= {}, got '{}'", key, lo, value));
  }
  return out;
}

}  // namespace

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::None: return "none";
    case BackendKind::Mock: return "mock";
    case BackendKind::Live: return "live";
  }
  return "none";
}

AppConfig AppConfig::defaults() {
  AppConfig c;
  const std::filesystem::path data(FINQ_DATA_DIR);
  c.rate_card = data / "rate_card.csv";
  c.cutoffs = data / "cutoffs.csv";
  c.templates = default_template_path();
  c.vocabulary = default_vocabulary_path();
  return c;
}

void apply_setting(AppConfig& c, std::string_view key, std::string_view value) {
  if (key == "api_key" || key == "apikey" || key == "token" || key == "secret") {
    throw Error(ErrorKind::ConfigError,
                "secrets are read from the environment only; set api_key_env to the variable name");
  }
  if (key == "store" || key == "db") {
    c.store_path = std::string(value);
  } else if (key == "backend") {
    if (value == "mock") {
      c.backend = BackendKind::Mock;
    } else if (value == "live") {
      c.backend = BackendKind::Live;
    } else {
      throw Error(ErrorKind::ConfigError, fmt::format("backend must be mock or live, got '{}'", value));
    }
  } else if (key == "mock_script") {
    c.mock_script = std::string(value);
  } else if (key == "base_url") {
    c.base_url = std::string(value);
  } else if (key == "api_key_env") {
    c.api_key_env = std::string(value);
  } else if (key == "model") {
    c.model = std::string(value);
  } else if (key == "rate_card") {
    c.rate_card = std::string(value);
  } else if (key == "cutoffs") {
    c.cutoffs = std::string(value);
  } else if (key == "templates") {
    c.templates = std::string(value);
  } else if (key == "vocabulary") {
    c.vocabulary = std::string(value);
  } else if (key == "max_tool_rounds") {
    c.max_tool_rounds = static_cast<int>(parse_int(key, value, 1));
  } else if (key == "self_corrections") {
    c.self_corrections = static_cast<int>(parse_int(key, value, 0));
  } else if (key == "llm_timeout_ms") {
    c.llm_timeout = std::chrono::milliseconds{parse_int(key, value, 1)};
  } else if (key == "sql_timeout_ms") {
    c.sql_timeout = std::chrono::milliseconds{parse_int(key, value, 1)};
  } else if (key == "workers") {
    c.workers = static_cast<std::size_t>(parse_int(key, value, 1));
  } else {
    throw Error(ErrorKind::ConfigError, fmt::format("unknown setting '{}'", key));
  }
}

void apply_config_stream(AppConfig& config, std::istream& in, std::string_view source) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::ConfigError,
                  fmt::format("{}:{}: expected key = value", source, number));
    }
    try {
      apply_setting(config, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, fmt::format("{}:{}: {}", source, number, e.what()));
    }
  }
}

void apply_config_file(AppConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, fmt::format("cannot read config {}", path.string()));
  apply_config_stream(config, in, path.string());
}

void require_backend(const AppConfig& c) {
  switch (c.backend) {
    case BackendKind::None:
      throw Error(ErrorKind::ConfigError,
                  "no model backend configured; pass --backend mock --mock-script <file> or "
                  "--backend live --base-url <url>");
    case BackendKind::Mock:
      if (c.mock_script.empty()) {
        throw Error(ErrorKind::ConfigError, "the mock backend needs --mock-script");
      }
      return;
    case BackendKind::Live: {
      if (c.base_url.empty()) throw Error(ErrorKind::ConfigError, "the live backend needs --base-url");
      if (c.api_key_env.empty()) {
        throw Error(ErrorKind::ConfigError, "the live backend needs api_key_env");
      }
      const char* key = std::getenv(c.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        throw Error(ErrorKind::ConfigError,
                    fmt::format("environment variable {} is not set", c.api_key_env));
      }
      return;
    }
  }
}

std::unique_ptr<llm::ChatBackend> make_backend(const AppConfig& c) {
  require_backend(c);
  if (c.backend == BackendKind::Mock) {
    try {
      return std::make_unique<llm::MockBackend>(llm::MockBackend::load_file(c.mock_script));
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, e.what());
    }
  }
  llm::HttpBackendConfig hc;
  hc.base_url = c.base_url;
  hc.api_key = std::getenv(c.api_key_env.c_str());
  hc.timeout = c.llm_timeout;
  return std::make_unique<llm::HttpBackend>(std::move(hc));
}

CutoffTable CutoffTable::load(std::istream& in) {
  CsvReader reader(in);
  std::vector<std::string> f;
  if (!reader.next(f) || f != std::vector<std::string>{"model_id", "knowledge_cutoff"}) {
    throw Error(ErrorKind::ConfigError, "cutoff table header must be model_id,knowledge_cutoff");
  }
  CutoffTable t;
  while (reader.next(f)) {
    const auto d = f.size() == 2 ? Date::parse(f[1]) : std::nullopt;
    if (!d || f[0].empty()) {
      throw Error(ErrorKind::ConfigError,
                  fmt::format("cutoff table line {} is malformed", reader.line_number()));
    }
    if (!t.cutoffs_.emplace(f[0], *d).second) {
      throw Error(ErrorKind::ConfigError, fmt::format("duplicate cutoff for {}", f[0]));
    }
  }
  return t;
}

CutoffTable CutoffTable::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ConfigError, fmt::format("cannot read {}", path.string()));
  return load(in);
}

Date CutoffTable::cutoff(std::string_view model) const {
  auto it = cutoffs_.find(model);
  if (it == cutoffs_.end()) {
    throw Error(ErrorKind::UnknownModel, fmt::format("no knowledge cutoff configured for '{}'", model));
  }
  return it->second;
}

}  // namespace finq
