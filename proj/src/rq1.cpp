#include "finq/rq1.hpp"

#include <algorithm>
#include <map>
#include <random>

#include <fmt/format.h>

#include "finq/market_store.hpp"
#include "finq/mock_backend.hpp"
#include "finq/worker_pool.hpp"

namespace finq {
namespace {

struct SeriesPoint {
  std::string date;
  std::string value;
};

std::vector<SeriesPoint> load_series(const MarketStore& store, const std::string& ticker,
                                     Rq1Target target, bool adjusted) {
  std::vector<SeriesPoint> out;
  if (target == Rq1Target::StockPrice) {
    auto stmt = store.database().prepare(adjusted
                                             ? "SELECT date, adj_close FROM prices WHERE ticker = ?1 ORDER BY date"
                                             : "SELECT date, close FROM prices WHERE ticker = ?1 ORDER BY date");
    stmt.bind(1, ticker);
    while (stmt.step()) out.push_back({stmt.column_string(0), stmt.column_string(1)});
  } else {
    auto stmt = store.database().prepare(
        "SELECT period_end_date, value FROM fundamentals WHERE ticker = ?1 AND metric = ?2 "
        "AND period_kind = 'quarterly' ORDER BY period_end_date");
    stmt.bind(1, ticker).bind(2, target == Rq1Target::Revenue ? "revenue" : "net_income");
    while (stmt.step()) out.push_back({stmt.column_string(0), stmt.column_string(1)});
  }
  return out;
}

std::string_view target_phrase(Rq1Target t) {
  switch (t) {
    case Rq1Target::StockPrice: return "stock price";
    case Rq1Target::Revenue: return "revenue";
    case Rq1Target::NetIncome: return "net income";
  }
  return "";
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : ", ") + s;
  return out;
}

PredictionTask make_task(const std::string& ticker, const std::string& name, Rq1Target target,
                         Rq1Group group, const std::vector<SeriesPoint>& series, std::size_t start) {
  PredictionTask t;
  t.ticker = ticker;
  t.company_name = name;
  t.target = target;
  t.group = group;
  const auto in = static_cast<std::size_t>(rq1_input_length(target));
  const auto out = static_cast<std::size_t>(rq1_output_length(target));
  for (std::size_t i = start; i < start + in; ++i) {
    t.input_dates.push_back(series[i].date);
    t.input_values.push_back(series[i].value);
  }
  for (std::size_t i = start + in; i < start + in + out; ++i) {
    t.truth_dates.push_back(series[i].date);
    t.truth_values.push_back(Decimal::parse(series[i].value).value().to_double());
  }
  return t;
}

Json welch_json(const stats::WelchResult& w) {
  return Json{{"n_before", w.n1}, {"n_after", w.n2},   {"mean_before", w.mean_x},
              {"mean_after", w.mean_y}, {"var_before", w.var_x}, {"var_after", w.var_y},
              {"t", w.t},           {"df", w.df},       {"p", w.p},
              {"alternative", "before < after"}};
}

Json group_json(const Rq1GroupSummary& g) {
  Json j;
  j["tasks"] = g.tasks;
  j["scored"] = g.scored;
  j["parse_failures"] = g.parse_failures;
  j["zero_mse"] = g.zero_mse;
  j["errors"] = g.errors;
  j["mean_log_mse"] = g.mean_log_mse ? Json(*g.mean_log_mse) : Json(nullptr);
  return j;
}

}  // namespace

std::string_view to_string(Rq1Target t) {
  switch (t) {
    case Rq1Target::StockPrice: return "stock_price";
    case Rq1Target::Revenue: return "revenue";
    case Rq1Target::NetIncome: return "net_income";
  }
  return "";
}

std::optional<Rq1Target> parse_rq1_target(std::string_view text) {
  if (text == "stock_price" || text == "price") return Rq1Target::StockPrice;
  if (text == "revenue") return Rq1Target::Revenue;
  if (text == "net_income") return Rq1Target::NetIncome;
  return std::nullopt;
}

std::string_view to_string(Rq1Group g) {
  return g == Rq1Group::BeforeCutoff ? "before_cutoff" : "after_cutoff";
}

int rq1_input_length(Rq1Target t) { return t == Rq1Target::StockPrice ? 10 : 8; }
int rq1_output_length(Rq1Target t) { return t == Rq1Target::StockPrice ? 10 : 8; }

std::string build_rq1_prompt(const PredictionTask& task) {
  return fmt::format(
      "You are given the following {} data for the company {}.\n"
      "Predict the next {} values based on the past {} values.\n"
      "\n"
      "Instructions:\n"
      "- Do not add any explanations.\n"
      "- Do not include quotation marks, backticks, or annotations.\n"
      "- Return only the predicted values separated by commas (e.g., 1.0, 2.0, 3.0).\n"
      "\n"
      "Data:\n"
      "{}\n"
      "{}",
      target_phrase(task.target), task.company_name, task.truth_values.size(),
      task.input_values.size(), join(task.input_dates), join(task.input_values));
}

Rq1TaskSet build_rq1_tasks(const MarketStore& store, Date cutoff, const Rq1Config& config) {
  if (config.windows_per_ticker < 1) {
    throw Error(ErrorKind::ConfigError, "windows_per_ticker must be at least 1");
  }
  auto companies = store.companies();
  std::sort(companies.begin(), companies.end(),
            [](const auto& a, const auto& b) { return a.ticker < b.ticker; });
  if (!config.tickers.empty()) {
    std::erase_if(companies, [&](const CompanyRecord& c) {
      return std::find(config.tickers.begin(), config.tickers.end(), c.ticker) ==
             config.tickers.end();
    });
  }
  const auto cutoff_text = cutoff.to_string();
  const auto k = static_cast<std::size_t>(config.windows_per_ticker);

  Rq1TaskSet set;
  set.cutoff = cutoff;
  for (const auto target : config.targets) {
    const auto in = static_cast<std::size_t>(rq1_input_length(target));
    const auto out = static_cast<std::size_t>(rq1_output_length(target));
    const auto len = in + out;
    std::vector<PredictionTask> before, after;
    for (const auto& company : companies) {
      const auto series = load_series(store, company.ticker, target, config.use_adjusted_close);
      // Before: windows ending at the last point strictly before the cutoff.
      std::vector<PredictionTask> mine;
      const auto n_before = static_cast<std::size_t>(
          std::lower_bound(series.begin(), series.end(), cutoff_text,
                           [](const SeriesPoint& p, const std::string& d) { return p.date < d; }) -
          series.begin());
      for (std::size_t w = 0; w < k; ++w) {
        if (n_before < len + w * out) break;
        mine.push_back(make_task(company.ticker, company.name, target, Rq1Group::BeforeCutoff,
                                 series, n_before - len - w * out));
      }
      if (mine.size() < k) {
        set.skipped.push_back({company.ticker, target, Rq1Group::BeforeCutoff,
                               fmt::format("{} of {} windows before the cutoff", mine.size(), k)});
      }
      std::reverse(mine.begin(), mine.end());
      before.insert(before.end(), mine.begin(), mine.end());

      // After: the latest windows whose predicted points are all on or after
      // the cutoff.
      mine.clear();
      for (std::size_t w = 0; w < k; ++w) {
        if (series.size() < len + w * out) break;
        const auto start = series.size() - len - w * out;
        if (series[start + in].date < cutoff_text) break;
        mine.push_back(make_task(company.ticker, company.name, target, Rq1Group::AfterCutoff,
                                 series, start));
      }
      if (mine.size() < k) {
        set.skipped.push_back({company.ticker, target, Rq1Group::AfterCutoff,
                               fmt::format("{} of {} windows after the cutoff", mine.size(), k)});
      }
      std::reverse(mine.begin(), mine.end());
      after.insert(after.end(), mine.begin(), mine.end());
    }
    if (config.max_tasks_per_group > 0) {
      if (before.size() > config.max_tasks_per_group) before.resize(config.max_tasks_per_group);
      if (after.size() > config.max_tasks_per_group) after.resize(config.max_tasks_per_group);
    }
    set.tasks.insert(set.tasks.end(), before.begin(), before.end());
    set.tasks.insert(set.tasks.end(), after.begin(), after.end());
  }
  return set;
}

std::vector<Rq1TargetSummary> summarize_rq1(const Rq1TaskSet& tasks,
                                            const std::vector<Rq1TaskOutcome>& outcomes,
                                            const std::vector<Rq1Target>& targets) {
  std::vector<Rq1TargetSummary> out;
  for (const auto target : targets) {
    Rq1TargetSummary s;
    s.target = target;
    for (const auto& o : outcomes) {
      const auto& task = tasks.tasks.at(o.task);
      if (task.target != target) continue;
      auto& g = task.group == Rq1Group::BeforeCutoff ? s.before : s.after;
      ++g.tasks;
      if (o.log_mse) {
        ++g.scored;
        g.log_mses.push_back(*o.log_mse);
      } else if (o.error == ErrorKind::ParseFailure || o.error == ErrorKind::CountMismatch) {
        ++g.parse_failures;
      } else if (o.error == ErrorKind::ZeroMse) {
        ++g.zero_mse;
      } else {
        ++g.errors;
      }
    }
    for (auto* g : {&s.before, &s.after}) {
      if (!g->log_mses.empty()) g->mean_log_mse = stats::mean(g->log_mses);
    }
    try {
      s.welch = stats::welch_one_sided(s.before.log_mses, s.after.log_mses, stats::Alternative::Less);
    } catch (const Error& e) {
      s.welch_error = fmt::format("{}: {}", to_string(e.kind()), e.what());
    }
    out.push_back(std::move(s));
  }
  return out;
}

Rq1Report run_rq1(const Rq1TaskSet& tasks, llm::ChatBackend& backend, const std::string& model,
                  const std::vector<Rq1Target>& targets, std::size_t workers) {
  Rq1Report report;
  report.model = model;
  report.cutoff = tasks.cutoff;
  report.skipped = tasks.skipped;
  report.outcomes = parallel_map<Rq1TaskOutcome>(tasks.tasks.size(), workers, [&](std::size_t i) {
    const auto& task = tasks.tasks[i];
    Rq1TaskOutcome o;
    o.task = i;
    o.ticker = task.ticker;
    o.target = task.target;
    o.group = task.group;
    o.first_truth_date = task.truth_dates.front();
    try {
      auto completion =
          llm::chat_complete(backend, model, {llm::ChatMessage::user(build_rq1_prompt(task))}, {});
      o.usage = completion.usage;
      o.latency = completion.latency;
      o.raw_output = completion.message.content;
      const auto predicted = stats::parse_prediction(o.raw_output, task.truth_values.size());
      const auto r = stats::log_mse(predicted, task.truth_values);
      o.mse = r.mse;
      o.log_mse = r.log_mse;
    } catch (const Error& e) {
      o.error = e.kind();
      o.error_message = e.what();
    }
    return o;
  });
  report.targets = summarize_rq1(tasks, report.outcomes, targets);
  return report;
}

Json Rq1Report::to_json() const {
  Json doc;
  doc["experiment"] = "rq1";
  doc["model"] = model;
  doc["cutoff"] = cutoff.to_string();
  auto& ts = doc["targets"] = Json::array();
  for (const auto& t : targets) {
    Json tj;
    tj["target"] = to_string(t.target);
    tj["before_cutoff"] = group_json(t.before);
    tj["after_cutoff"] = group_json(t.after);
    tj["welch"] = t.welch ? welch_json(*t.welch) : Json(nullptr);
    if (!t.welch_error.empty()) tj["welch_error"] = t.welch_error;
    ts.push_back(std::move(tj));
  }
  auto& skips = doc["skipped"] = Json::array();
  for (const auto& s : skipped) {
    skips.push_back(Json{{"ticker", s.ticker},
                         {"target", to_string(s.target)},
                         {"group", to_string(s.group)},
                         {"reason", s.reason}});
  }
  auto& os = doc["tasks"] = Json::array();
  for (const auto& o : outcomes) {
    Json oj;
    oj["task"] = o.task;
    oj["ticker"] = o.ticker;
    oj["target"] = to_string(o.target);
    oj["group"] = to_string(o.group);
    oj["first_truth_date"] = o.first_truth_date;
    oj["raw_output"] = o.raw_output;
    oj["log_mse"] = o.log_mse ? Json(*o.log_mse) : Json(nullptr);
    oj["error"] = o.error ? Json(std::string(to_string(*o.error))) : Json(nullptr);
    oj["prompt_tokens"] = o.usage.prompt_tokens;
    oj["completion_tokens"] = o.usage.completion_tokens;
    os.push_back(std::move(oj));
  }
  return doc;
}

SyntheticForecastBackend::SyntheticForecastBackend(const std::vector<PredictionTask>& tasks,
                                                   NoiseModel noise, std::uint64_t seed)
    : noise_(noise), seed_(seed) {
  for (const auto& t : tasks) entries_.push_back({build_rq1_prompt(t), t.truth_values, t.group});
  std::sort(entries_.begin(), entries_.end(),
            [](const Entry& a, const Entry& b) { return a.prompt < b.prompt; });
}

llm::BackendReply SyntheticForecastBackend::send(const Json& request) {
  const auto req = llm::decode_request(request);
  if (req.messages.empty()) throw Error(ErrorKind::PreconditionViolated, "empty request");
  const auto& prompt = req.messages.back().content;
  auto it = std::lower_bound(entries_.begin(), entries_.end(), prompt,
                             [](const Entry& e, const std::string& p) { return e.prompt < p; });
  if (it == entries_.end() || it->prompt != prompt) {
    throw Error(ErrorKind::MockUnmatched, "prompt does not belong to a known task");
  }
  std::mt19937_64 rng(llm::fnv1a(prompt, seed_ ^ 0x9e3779b97f4a7c15ULL));
  std::normal_distribution<double> z(0.0, 1.0);
  const double sigma =
      it->group == Rq1Group::BeforeCutoff ? noise_.sigma_before : noise_.sigma_after;
  std::string text;
  for (double truth : it->truth) {
    text += fmt::format("{}{:.6f}", text.empty() ? "" : ", ", truth + sigma * z(rng));
  }
  const llm::TokenUsage usage{llm::estimate_tokens(prompt), llm::estimate_tokens(text)};
  const auto id = fmt::format("synth-{:016x}", llm::fnv1a(text, seed_));
  return {llm::encode_response(llm::ChatMessage::assistant(text), usage, req.model, id),
          std::chrono::nanoseconds{0}};
}

}  // namespace finq
