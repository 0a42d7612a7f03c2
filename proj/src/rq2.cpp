#include "finq/rq2.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>

#include "finq/ticker_resolver.hpp"
#include "finq/worker_pool.hpp"

namespace finq {
namespace {

Json accuracy_json(const Accuracy& a) {
  return Json{{"matches", a.matches}, {"total", a.total}, {"accuracy", a.value}};
}

const CompanyRecord* find_company(const std::vector<CompanyRecord>& companies,
                                  std::string_view ticker) {
  for (const auto& c : companies) {
    if (c.ticker == ticker) return &c;
  }
  return nullptr;
}

}  // namespace

std::filesystem::path default_rq2_prompt_path() {
  return std::filesystem::path(FINQ_DATA_DIR) / "prompts" / "rq2_ticker.txt";
}

std::string load_rq2_prompt(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  auto text = ss.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  if (text.find("{company_name}") == std::string::npos) {
    throw Error(ErrorKind::ConfigError,
                fmt::format("{} has no {{company_name}} placeholder", path.string()));
  }
  return text;
}

std::string rq2_prompt(std::string_view prompt_template, std::string_view company_name) {
  static constexpr std::string_view kField = "{company_name}";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto hit = prompt_template.find(kField, pos);
    out += prompt_template.substr(pos, hit == std::string_view::npos ? hit : hit - pos);
    if (hit == std::string_view::npos) break;
    out += company_name;
    pos = hit + kField.size();
  }
  return out;
}

TickerAnswer resolve_via_llm(llm::ChatBackend& backend, const std::string& model,
                             const std::string& company_name, const std::string& expected,
                             std::string_view prompt_template) {
  TickerAnswer a;
  a.company = company_name;
  a.expected = expected;
  auto completion = llm::chat_complete(
      backend, model, {llm::ChatMessage::user(rq2_prompt(prompt_template, company_name))}, {});
  a.raw = completion.message.content;
  a.usage = completion.usage;
  a.latency = completion.latency;
  a.normalized = normalize_ticker(a.raw);
  a.match = !a.normalized.empty() && a.normalized == normalize_ticker(expected);
  return a;
}

std::vector<std::string> latest_constituents(const std::vector<CompanyRecord>& companies,
                                             IndexId index) {
  std::vector<std::string> out;
  for (const auto& c : companies) {
    for (const auto& m : c.index_memberships) {
      if (m.index == index && !m.end) {
        out.push_back(c.ticker);
        break;
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::string> constituents_before(const std::vector<CompanyRecord>& companies,
                                             IndexId index, Date cutoff) {
  std::vector<std::string> out;
  for (const auto& ticker : latest_constituents(companies, index)) {
    const auto* c = find_company(companies, ticker);
    for (const auto& m : c->index_memberships) {
      if (m.index == index && !m.end && m.start < cutoff) {
        out.push_back(ticker);
        break;
      }
    }
  }
  return out;
}

Accuracy rq2_accuracy(const std::vector<TickerAnswer>& answers,
                      const std::vector<std::string>& subset) {
  std::map<std::string, bool> matched;
  for (const auto& a : answers) matched[a.expected] = a.match;
  Accuracy acc;
  acc.total = subset.size();
  for (const auto& t : subset) {
    auto it = matched.find(t);
    if (it != matched.end() && it->second) ++acc.matches;
  }
  acc.value = acc.total == 0 ? 0.0
                             : static_cast<double>(acc.matches) / static_cast<double>(acc.total);
  return acc;
}

Rq2Report run_rq2(llm::ChatBackend& backend, const std::string& model,
                  const std::vector<CompanyRecord>& companies, IndexId index,
                  std::optional<Date> cutoff, std::string_view prompt_template,
                  std::size_t workers) {
  Rq2Report report;
  report.model = model;
  report.index = index;
  report.cutoff = cutoff;
  const auto latest = latest_constituents(companies, index);
  report.answers = parallel_map<TickerAnswer>(latest.size(), workers, [&](std::size_t i) {
    const auto* c = find_company(companies, latest[i]);
    try {
      return resolve_via_llm(backend, model, c->name, c->ticker, prompt_template);
    } catch (const Error& e) {
      TickerAnswer a;
      a.company = c->name;
      a.expected = c->ticker;
      a.error = e.kind();
      a.raw = e.what();
      return a;
    }
  });
  report.latest = rq2_accuracy(report.answers, latest);
  if (cutoff) {
    report.at_cutoff = rq2_accuracy(report.answers, constituents_before(companies, index, *cutoff));
  }
  return report;
}

Json Rq2Report::to_json() const {
  Json doc;
  doc["experiment"] = "rq2";
  doc["model"] = model;
  doc["index"] = to_string(index);
  doc["cutoff"] = cutoff ? Json(cutoff->to_string()) : Json(nullptr);
  doc["latest"] = accuracy_json(latest);
  doc["knowledge_cutoff"] = at_cutoff ? accuracy_json(*at_cutoff) : Json(nullptr);
  auto& as = doc["answers"] = Json::array();
  for (const auto& a : answers) {
    as.push_back(Json{{"company", a.company},
                      {"expected", a.expected},
                      {"raw", a.raw},
                      {"normalized", a.normalized},
                      {"match", a.match},
                      {"error", a.error ? Json(std::string(to_string(*a.error))) : Json(nullptr)}});
  }
  return doc;
}

}  // namespace finq
