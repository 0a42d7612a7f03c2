#include "finq/report.hpp"

#include <fstream>

#include <fmt/format.h>

#include "finq/csv.hpp"

namespace finq {
namespace {

std::string csv_row(const std::vector<std::string>& fields) {
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i > 0) line += ',';
    line += csv_escape(fields[i]);
  }
  return line + "\n";
}

std::string p_value(double p) {
  return p < 1e-4 ? fmt::format("{:.2e}", p) : fmt::format("{:.4f}", p);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, fmt::format("cannot write {}", path.string()));
  out << text;
  if (!out) throw Error(ErrorKind::IoError, fmt::format("write to {} failed", path.string()));
}

}  // namespace

std::optional<ReportFormat> parse_report_format(std::string_view text) {
  if (text == "json") return ReportFormat::Json;
  if (text == "csv") return ReportFormat::Csv;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  return std::nullopt;
}

std::string dump_json(const Json& doc) { return doc.dump(2) + "\n"; }

Json report_json(const ReportBundle& bundle) {
  Json doc;
  doc["report_version"] = 1;
  auto& r1 = doc["rq1"] = Json::array();
  for (const auto& r : bundle.rq1) r1.push_back(r.to_json());
  auto& r2 = doc["rq2"] = Json::array();
  for (const auto& r : bundle.rq2) r2.push_back(r.to_json());
  doc["rq3"] = bundle.rq3 ? bundle.rq3->to_json() : Json(nullptr);
  return doc;
}

namespace {

std::string opt_fixed(const Json& v, int digits = 2) {
  return v.is_number() ? fmt::format("{:.{}f}", v.get<double>(), digits) : std::string("n/a");
}

const Json* find_target(const Json& rq1, std::string_view target) {
  for (const auto& t : rq1.at("targets")) {
    if (t.at("target").get<std::string>() == target) return &t;
  }
  return nullptr;
}

std::string accuracy_cell(const Json& a) {
  if (a.is_null()) return "n/a";
  return fmt::format("{:.4f} ({}/{})", a.at("accuracy").get<double>(),
                     a.at("matches").get<std::size_t>(), a.at("total").get<std::size_t>());
}

std::string text_of(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace

std::string report_markdown(const Json& report) {
  static constexpr std::string_view kTargets[] = {"stock_price", "revenue", "net_income"};
  std::string md = "# Experiment report\n";
  const auto& rq1 = report.at("rq1");
  if (!rq1.empty()) {
    md += "\n## RQ1: average log(MSE), before | after the knowledge cutoff\n\n";
    md += "| Model | Cutoff | Stock Price | Revenue | Net Income |\n";
    md += "|---|---|---|---|---|\n";
    for (const auto& r : rq1) {
      md += fmt::format("| {} | {} |", r.at("model").get<std::string>(),
                        r.at("cutoff").get<std::string>());
      for (auto t : kTargets) {
        const auto* tj = find_target(r, t);
        md += tj ? fmt::format(" {} \\| {} |", opt_fixed(tj->at("before_cutoff").at("mean_log_mse")),
                               opt_fixed(tj->at("after_cutoff").at("mean_log_mse")))
                 : std::string(" n/a |");
      }
      md += "\n";
    }
    md += "\n## RQ1: one-sided Welch p-values (before < after)\n\n";
    md += "| Model | Stock Price | Revenue | Net Income |\n";
    md += "|---|---|---|---|\n";
    for (const auto& r : rq1) {
      md += fmt::format("| {} |", r.at("model").get<std::string>());
      for (auto t : kTargets) {
        const auto* tj = find_target(r, t);
        const bool has = tj && tj->at("welch").is_object();
        md += fmt::format(" {} |", has ? p_value(tj->at("welch").at("p").get<double>()) : "n/a");
      }
      md += "\n";
    }
  }
  const auto& rq2 = report.at("rq2");
  if (!rq2.empty()) {
    md += "\n## RQ2: ticker retrieval accuracy\n\n";
    md += "| Model | Index | Latest | Knowledge Cutoff | Cutoff date |\n";
    md += "|---|---|---|---|---|\n";
    for (const auto& r : rq2) {
      md += fmt::format("| {} | {} | {} | {} | {} |\n", r.at("model").get<std::string>(),
                        r.at("index").get<std::string>(), accuracy_cell(r.at("latest")),
                        accuracy_cell(r.at("knowledge_cutoff")),
                        r.at("cutoff").is_null() ? "n/a" : r.at("cutoff").get<std::string>());
    }
  }
  const auto& rq3 = report.at("rq3");
  if (!rq3.is_null()) {
    md += fmt::format("\n## RQ3: cost, time and accuracy ({})\n\n",
                      rq3.at("model").get<std::string>());
    md += "| System | Cases | Mean cost (USD) | Std cost | Mean latency (s) | Std latency | "
          "Accuracy |\n";
    md += "|---|---|---|---|---|---|---|\n";
    for (const auto& a : rq3.at("aggregates")) {
      md += fmt::format("| {} | {} | {:.6f} | {:.6f} | {:.3f} | {:.3f} | {:.4f} ({}/{}) |\n",
                        a.at("system").get<std::string>(), a.at("cases").get<std::size_t>(),
                        a.at("mean_cost").get<double>(), a.at("std_cost").get<double>(),
                        a.at("mean_latency_s").get<double>(), a.at("std_latency_s").get<double>(),
                        a.at("accuracy").get<double>(), a.at("successes").get<std::size_t>(),
                        a.at("cases").get<std::size_t>());
    }
  }
  return md;
}

std::string rq3_cases_csv(const Json& rq3) {
  std::string out = csv_row({"index", "system", "query", "success", "failure", "prompt_tokens",
                             "completion_tokens", "cost", "latency_ns", "model_calls", "detail"});
  for (const auto& c : rq3.at("cases")) {
    out += csv_row({text_of(c.at("index")), text_of(c.at("system")), text_of(c.at("query")),
                    text_of(c.at("success")), text_of(c.at("failure")),
                    text_of(c.at("prompt_tokens")), text_of(c.at("completion_tokens")),
                    text_of(c.at("cost")), text_of(c.at("latency_ns")),
                    text_of(c.at("model_calls")), text_of(c.at("detail"))});
  }
  return out;
}

std::string rq1_tasks_csv(const Json& rq1) {
  std::string out = csv_row({"task", "ticker", "target", "group", "first_truth_date", "log_mse",
                             "error", "prompt_tokens", "completion_tokens"});
  for (const auto& o : rq1.at("tasks")) {
    out += csv_row({text_of(o.at("task")), text_of(o.at("ticker")), text_of(o.at("target")),
                    text_of(o.at("group")), text_of(o.at("first_truth_date")),
                    text_of(o.at("log_mse")), text_of(o.at("error")),
                    text_of(o.at("prompt_tokens")), text_of(o.at("completion_tokens"))});
  }
  return out;
}

std::string rq2_answers_csv(const Json& rq2) {
  std::string out = csv_row({"index", "company", "expected", "normalized", "match", "raw"});
  for (const auto& a : rq2.at("answers")) {
    out += csv_row({text_of(rq2.at("index")), text_of(a.at("company")), text_of(a.at("expected")),
                    text_of(a.at("normalized")), text_of(a.at("match")), text_of(a.at("raw"))});
  }
  return out;
}

std::vector<std::filesystem::path> emit_report(const Json& report,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw Error(ErrorKind::IoError, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  }
  std::vector<std::filesystem::path> written;
  auto put = [&](const std::string& name, const std::string& text) {
    write_file(dir / name, text);
    written.push_back(dir / name);
  };
  for (const auto f : formats) {
    switch (f) {
      case ReportFormat::Json:
        put("report.json", dump_json(report));
        break;
      case ReportFormat::Csv:
        for (const auto& r : report.at("rq1")) {
          put(fmt::format("rq1_{}_tasks.csv", r.at("model").get<std::string>()), rq1_tasks_csv(r));
        }
        for (const auto& r : report.at("rq2")) {
          put(fmt::format("rq2_{}_{}.csv", r.at("model").get<std::string>(),
                          r.at("index").get<std::string>()),
              rq2_answers_csv(r));
        }
        if (!report.at("rq3").is_null()) put("rq3_cases.csv", rq3_cases_csv(report.at("rq3")));
        break;
      case ReportFormat::Markdown:
        put("report.md", report_markdown(report));
        break;
    }
  }
  return written;
}

std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir) {
  return emit_report(report_json(bundle), formats, dir);
}

Json load_report(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, fmt::format("cannot read {}", path.string()));
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::ParseFailure, fmt::format("{}: {}", path.string(), e.what()));
  }
  if (!doc.is_object() || !doc.contains("rq1") || !doc.contains("rq2") || !doc.contains("rq3")) {
    throw Error(ErrorKind::ParseFailure, fmt::format("{} is not a report document", path.string()));
  }
  return doc;
}

}  // namespace finq
