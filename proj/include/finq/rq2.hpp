#pragma once

#include <chrono>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finq/domain.hpp"
#include "finq/error.hpp"
#include "finq/json.hpp"
#include "finq/llm_protocol.hpp"

namespace finq {

struct TickerAnswer {
  std::string company;
  std::string expected;
  std::string raw;
  std::string normalized;  // empty when nothing ticker-shaped was found
  bool match = false;
  std::optional<ErrorKind> error;
  llm::TokenUsage usage;
  std::chrono::nanoseconds latency{0};
};

std::filesystem::path default_rq2_prompt_path();
std::string load_rq2_prompt(const std::filesystem::path& path);
/// Substitutes {company_name}.
std::string rq2_prompt(std::string_view prompt_template, std::string_view company_name);

/// One model call; the reply is normalized and compared with `expected`
/// (normalized too). Throws the backend's errors (LlmProtocolError, ...).
TickerAnswer resolve_via_llm(llm::ChatBackend& backend, const std::string& model,
                             const std::string& company_name, const std::string& expected,
                             std::string_view prompt_template);

/// Current constituents of `index`, ticker order.
std::vector<std::string> latest_constituents(const std::vector<CompanyRecord>& companies,
                                             IndexId index);
/// The latest constituents that were already members before `cutoff`.
std::vector<std::string> constituents_before(const std::vector<CompanyRecord>& companies,
                                             IndexId index, Date cutoff);

struct Accuracy {
  std::size_t matches = 0;
  std::size_t total = 0;
  double value = 0.0;  // matches / total, 0 for an empty set
};

/// Accuracy of the answers over `subset` (tickers). A subset ticker with no
/// answer counts as a miss.
Accuracy rq2_accuracy(const std::vector<TickerAnswer>& answers,
                      const std::vector<std::string>& subset);

struct Rq2Report {
  std::string model;
  IndexId index = IndexId::SP500;
  std::optional<Date> cutoff;
  std::vector<TickerAnswer> answers;
  Accuracy latest;
  std::optional<Accuracy> at_cutoff;
  Json to_json() const;
};

/// Asks once per current constituent; failures count as misses.
Rq2Report run_rq2(llm::ChatBackend& backend, const std::string& model,
                  const std::vector<CompanyRecord>& companies, IndexId index,
                  std::optional<Date> cutoff, std::string_view prompt_template,
                  std::size_t workers = 1);

}  // namespace finq
