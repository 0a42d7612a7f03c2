#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "finq/json.hpp"
#include "finq/rq1.hpp"
#include "finq/rq2.hpp"
#include "finq/rq3.hpp"

namespace finq {

enum class ReportFormat { Json, Csv, Markdown };
std::optional<ReportFormat> parse_report_format(std::string_view text);

/// Results of one or more experiments written out together.
struct ReportBundle {
  std::vector<Rq1Report> rq1;
  std::vector<Rq2Report> rq2;
  std::optional<Rq3Report> rq3;
};

Json report_json(const ReportBundle& bundle);

// The renderers below read the report document, so a saved report.json can
// be re-rendered without rerunning anything.

/// One table per experiment present: log-MSE before | after per target,
/// Welch p-values, RQ2 accuracy per index, RQ3 cost/latency/accuracy.
std::string report_markdown(const Json& report);
/// Header plus one row per RQ3 case.
std::string rq3_cases_csv(const Json& rq3);
/// Header plus one row per RQ1 task outcome.
std::string rq1_tasks_csv(const Json& rq1);
/// Header plus one row per RQ2 answer.
std::string rq2_answers_csv(const Json& rq2);

/// Writes report.json / *.csv / report.md into `dir` (created if missing)
/// and returns the paths written, in a fixed order.
std::vector<std::filesystem::path> emit_report(const Json& report,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir);
std::vector<std::filesystem::path> emit_report(const ReportBundle& bundle,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& dir);
/// Reads and validates a report.json document.
Json load_report(const std::filesystem::path& path);

/// Formats json with two-space indentation and a trailing newline.
std::string dump_json(const Json& doc);

}  // namespace finq
