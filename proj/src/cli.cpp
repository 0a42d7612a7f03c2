#include "finq/cli.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "finq/assistant_router.hpp"
#include "finq/config.hpp"
#include "finq/error.hpp"
#include "finq/market_store.hpp"
#include "finq/report.hpp"
#include "finq/rq1.hpp"
#include "finq/rq2.hpp"
#include "finq/rq3.hpp"
#include "finq/service.hpp"
#include "finq/synth.hpp"
#include "finq/ticker_resolver.hpp"

namespace finq {
namespace {

// Setting key -> flag name. Secrets deliberately have no flag.
const std::vector<std::pair<std::string, std::string>> kSettingFlags{
    {"db", "--db"},
    {"backend", "--backend"},
    {"mock_script", "--mock-script"},
    {"base_url", "--base-url"},
    {"api_key_env", "--api-key-env"},
    {"model", "--model"},
    {"rate_card", "--rate-card"},
    {"cutoffs", "--cutoffs"},
    {"templates", "--templates"},
    {"vocabulary", "--vocabulary"},
    {"max_tool_rounds", "--max-tool-rounds"},
    {"self_corrections", "--self-corrections"},
    {"llm_timeout_ms", "--llm-timeout-ms"},
    {"sql_timeout_ms", "--sql-timeout-ms"},
    {"workers", "--workers"},
};

const std::map<std::string, std::string> kSettingHelp{
    {"db", "market store file (SQLite)"},
    {"backend", "model backend: mock or live"},
    {"mock_script", "JSON rule script for the mock backend"},
    {"base_url", "chat completions endpoint base URL for the live backend"},
    {"api_key_env", "name of the environment variable holding the API key (default FINQ_API_KEY)"},
    {"model", "model id; must appear in the rate card (default gpt-4o)"},
    {"rate_card", "CSV model_id,input_rate_per_1m,output_rate_per_1m"},
    {"cutoffs", "CSV model_id,knowledge_cutoff"},
    {"templates", "query template file"},
    {"vocabulary", "metric vocabulary CSV"},
    {"max_tool_rounds", "model calls per question in the function calling loop (default 3)"},
    {"self_corrections", "extra attempts after a rejected call or statement (default 1)"},
    {"llm_timeout_ms", "live backend request timeout (default 60000)"},
    {"sql_timeout_ms", "text-to-SQL statement timeout (default 10000)"},
    {"workers", "parallel workers for experiments (default 1)"},
};

struct Context {
  AppConfig config;
  std::ostream& out;
  std::ostream& err;
  std::istream& in;

  void require_store() const {
    if (config.store_path.empty()) throw Error(ErrorKind::ConfigError, "--db is required");
    if (!std::filesystem::exists(config.store_path)) {
      throw Error(ErrorKind::ConfigError,
                  fmt::format("store {} does not exist; run `finq ingest` first",
                              config.store_path.string()));
    }
  }
  MarketStore open_store() const {
    require_store();
    return MarketStore::open_read_only(config.store_path);
  }
  llm::RateCard rates() const {
    try {
      return llm::RateCard::load_file(config.rate_card);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError, e.what());
    }
  }
  Date cutoff_for_model(const std::string& flag) const {
    if (!flag.empty()) {
      auto d = Date::parse(flag);
      if (!d) throw Error(ErrorKind::UsageError, fmt::format("--cutoff '{}' is not YYYY-MM-DD", flag));
      return *d;
    }
    try {
      return CutoffTable::load_file(config.cutoffs).cutoff(config.model);
    } catch (const Error& e) {
      throw Error(ErrorKind::ConfigError,
                  fmt::format("{}; pass --cutoff or add the model to the cutoff table", e.what()));
    }
  }
  RouterConfig router_config() const {
    RouterConfig rc;
    rc.model = config.model;
    rc.max_tool_rounds = config.max_tool_rounds;
    rc.self_corrections = config.self_corrections;
    return rc;
  }
  BaselineConfig baseline_config() const {
    BaselineConfig bc;
    bc.model = config.model;
    bc.self_correct = config.self_corrections;
    bc.limits.timeout = config.sql_timeout;
    return bc;
  }
};

std::vector<ReportFormat> parse_formats(const std::vector<std::string>& names) {
  std::vector<ReportFormat> out;
  for (const auto& n : names) {
    auto f = parse_report_format(n);
    if (!f) throw Error(ErrorKind::UsageError, fmt::format("unknown report format '{}'", n));
    out.push_back(*f);
  }
  return out;
}

void print_written(std::ostream& out, const std::vector<std::filesystem::path>& paths) {
  for (const auto& p : paths) out << "wrote " << p.string() << "\n";
}

Json ingest_json(const IngestReport& r) {
  Json doc{{"rows", r.rows}, {"loaded", r.loaded}, {"rejected", r.rejected}};
  auto& rej = doc["rejections"] = Json::array();
  for (std::size_t i = 0; i < r.rejections.size() && i < 20; ++i) {
    const auto& x = r.rejections[i];
    rej.push_back(Json{{"line", x.line}, {"reason", x.reason}, {"detail", x.detail}});
  }
  return doc;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::IoError, fmt::format("cannot read {}", path));
  return f;
}

// ---- subcommands ----------------------------------------------------------

struct IngestArgs {
  std::string companies, prices, fundamentals;
  bool synthetic = false;
  std::uint64_t seed = SynthConfig{}.seed;
};

int cmd_ingest(Context& ctx, const IngestArgs& a) {
  const auto& db = ctx.config.store_path;
  if (db.empty()) throw Error(ErrorKind::ConfigError, "--db is required");
  const auto vocab = MetricVocabulary::load_file(ctx.config.vocabulary);
  Json doc{{"db", db.string()}};
  if (a.synthetic) {
    if (!a.prices.empty() || !a.fundamentals.empty()) {
      throw Error(ErrorKind::UsageError, "--synthetic generates prices and fundamentals itself");
    }
    SynthConfig sc;
    sc.seed = a.seed;
    const auto companies = a.companies.empty() ? default_companies_path()
                                               : std::filesystem::path(a.companies);
    const auto r = create_synthetic_store(db, companies, vocab, sc);
    doc["synthetic_seed"] = a.seed;
    doc["companies"] = ingest_json(r.companies);
    doc["prices"] = ingest_json(r.prices);
    doc["fundamentals"] = ingest_json(r.fundamentals);
  } else {
    if (a.companies.empty() && a.prices.empty() && a.fundamentals.empty()) {
      throw Error(ErrorKind::UsageError,
                  "nothing to ingest; pass --companies, --prices, --fundamentals or --synthetic");
    }
    auto store = MarketStore::create(db, vocab);
    if (!a.companies.empty()) {
      auto f = open_input(a.companies);
      doc["companies"] = ingest_json(store.ingest_companies(f));
    }
    if (!a.prices.empty()) {
      auto f = open_input(a.prices);
      doc["prices"] = ingest_json(store.ingest_prices(f));
    }
    if (!a.fundamentals.empty()) {
      auto f = open_input(a.fundamentals);
      doc["fundamentals"] = ingest_json(store.ingest_fundamentals(f));
    }
  }
  ctx.out << dump_json(doc);
  return kExitOk;
}

struct AskArgs {
  std::string question;
  bool json = false;
  bool trace = false;
};

void print_answer(std::ostream& out, const AnswerResult& r, bool json, bool trace) {
  if (json) {
    out << dump_json(r.to_json(trace));
  } else if (r.ok()) {
    out << r.answer_text << "\n";
  } else {
    out << fmt::format("error [{}]: {}\n", to_string(*r.failure), r.failure_message);
  }
}

int cmd_ask(Context& ctx, const AskArgs& a) {
  require_backend(ctx.config);
  auto store = ctx.open_store();
  auto backend = make_backend(ctx.config);
  const auto rates = ctx.rates();
  const auto library = QueryLibrary::standard(store.vocabulary(), ctx.config.templates);
  const auto registry = LocalRegistry::from_store(store);
  AssistantRouter router(library, store, registry, *backend, rates, ctx.router_config());
  const auto r = router.answer(a.question);
  print_answer(ctx.out, r, a.json, a.trace);
  return r.ok() ? kExitOk : kExitFailure;
}

int cmd_repl(Context& ctx, const AskArgs& a) {
  require_backend(ctx.config);
  auto store = ctx.open_store();
  auto backend = make_backend(ctx.config);
  const auto rates = ctx.rates();
  const auto library = QueryLibrary::standard(store.vocabulary(), ctx.config.templates);
  const auto registry = LocalRegistry::from_store(store);
  AssistantRouter router(library, store, registry, *backend, rates, ctx.router_config());
  std::string line;
  for (;;) {
    ctx.out << "finq> " << std::flush;
    if (!std::getline(ctx.in, line)) break;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
    if (line == "exit" || line == "quit") break;
    print_answer(ctx.out, router.answer(line), a.json, a.trace);
  }
  ctx.out << "\n";
  return kExitOk;
}

struct ServeArgs {
  std::string host = "127.0.0.1";
  int port = 8080;
};

int cmd_serve(Context& ctx, const ServeArgs& a) {
  require_backend(ctx.config);
  auto store = ctx.open_store();
  auto backend = make_backend(ctx.config);
  const auto rates = ctx.rates();
  const auto library = QueryLibrary::standard(store.vocabulary(), ctx.config.templates);
  const auto registry = LocalRegistry::from_store(store);
  AssistantRouter router(library, store, registry, *backend, rates, ctx.router_config());
  AskService service(router);
  HttpService http(service);
  const int port = http.bind(a.host, a.port);
  ctx.out << fmt::format("listening on http://{}:{} (POST /ask, GET /health)\n", a.host, port)
          << std::flush;
  http.run();
  return kExitOk;
}

struct Rq1Args {
  std::string cutoff;
  std::vector<std::string> targets{"stock_price", "revenue", "net_income"};
  int windows = 1;
  std::size_t max_per_group = 0;
  std::vector<std::string> tickers;
  bool adjusted = false;
  std::vector<double> synthetic_noise;
  std::uint64_t seed = 1;
  std::string report_dir = "reports/rq1";
  std::vector<std::string> formats{"json", "csv", "md"};
};

int cmd_rq1(Context& ctx, const Rq1Args& a) {
  const auto formats = parse_formats(a.formats);
  Rq1Config rc;
  rc.targets.clear();
  for (const auto& t : a.targets) {
    auto parsed = parse_rq1_target(t);
    if (!parsed) throw Error(ErrorKind::UsageError, fmt::format("unknown target '{}'", t));
    rc.targets.push_back(*parsed);
  }
  rc.windows_per_ticker = a.windows;
  rc.max_tasks_per_group = a.max_per_group;
  rc.tickers = a.tickers;
  rc.use_adjusted_close = a.adjusted;
  rc.workers = ctx.config.workers;
  if (a.synthetic_noise.empty()) require_backend(ctx.config);
  auto store = ctx.open_store();
  const auto cutoff = ctx.cutoff_for_model(a.cutoff);
  const auto tasks = build_rq1_tasks(store, cutoff, rc);
  std::unique_ptr<llm::ChatBackend> backend;
  if (!a.synthetic_noise.empty()) {
    if (a.synthetic_noise.size() != 2) {
      throw Error(ErrorKind::UsageError, "--synthetic-noise takes BEFORE,AFTER");
    }
    backend = std::make_unique<SyntheticForecastBackend>(
        tasks.tasks, NoiseModel{a.synthetic_noise[0], a.synthetic_noise[1]}, a.seed);
  } else {
    backend = make_backend(ctx.config);
  }
  ReportBundle bundle;
  bundle.rq1.push_back(run_rq1(tasks, *backend, ctx.config.model, rc.targets, ctx.config.workers));
  print_written(ctx.out, emit_report(bundle, formats, a.report_dir));
  return kExitOk;
}

struct Rq2Args {
  std::vector<std::string> indices{"NASDAQ100", "SP500"};
  std::string cutoff;
  std::string prompt;
  std::string report_dir = "reports/rq2";
  std::vector<std::string> formats{"json", "csv", "md"};
};

int cmd_rq2(Context& ctx, const Rq2Args& a) {
  const auto formats = parse_formats(a.formats);
  std::vector<IndexId> indices;
  for (const auto& name : a.indices) {
    auto id = parse_index_id(name);
    if (!id) throw Error(ErrorKind::UsageError, fmt::format("unknown index '{}'", name));
    indices.push_back(*id);
  }
  require_backend(ctx.config);
  auto store = ctx.open_store();
  const auto cutoff = ctx.cutoff_for_model(a.cutoff);
  const auto prompt =
      load_rq2_prompt(a.prompt.empty() ? default_rq2_prompt_path() : std::filesystem::path(a.prompt));
  auto backend = make_backend(ctx.config);
  const auto companies = store.companies();
  ReportBundle bundle;
  for (const auto index : indices) {
    bundle.rq2.push_back(run_rq2(*backend, ctx.config.model, companies, index, cutoff, prompt,
                                 ctx.config.workers));
  }
  print_written(ctx.out, emit_report(bundle, formats, a.report_dir));
  return kExitOk;
}

struct Rq3Args {
  std::string suite;
  std::string expected;
  std::string systems = "both";
  std::string report_dir = "reports/rq3";
  std::vector<std::string> formats{"json", "csv", "md"};
};

std::vector<BenchSystem> parse_systems(const std::string& text) {
  if (text == "both") return {BenchSystem::FunctionCalling, BenchSystem::TextToSql};
  std::vector<BenchSystem> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part == "function_calling" || part == "fc") {
      out.push_back(BenchSystem::FunctionCalling);
    } else if (part == "text_to_sql" || part == "sql") {
      out.push_back(BenchSystem::TextToSql);
    } else {
      throw Error(ErrorKind::UsageError, fmt::format("unknown system '{}'", part));
    }
  }
  if (out.empty()) throw Error(ErrorKind::UsageError, "--systems is empty");
  return out;
}

int cmd_rq3(Context& ctx, const Rq3Args& a) {
  const auto formats = parse_formats(a.formats);
  Rq3Config rc;
  rc.model = ctx.config.model;
  rc.systems = parse_systems(a.systems);
  rc.router = ctx.router_config();
  rc.baseline = ctx.baseline_config();
  rc.workers = ctx.config.workers;
  require_backend(ctx.config);
  auto store = ctx.open_store();

  std::filesystem::path expected = a.expected;
  if (expected.empty()) {
    // suites/x.txt -> suites/x.expected.json when present
    auto guess = std::filesystem::path(a.suite);
    guess.replace_extension(".expected.json");
    if (std::filesystem::exists(guess)) expected = guess;
  }
  std::vector<BenchCase> cases;
  if (expected.empty()) {
    ctx.err << "warning: no expected results; every case will be judged as an error\n";
    const auto queries = load_suite(a.suite);
    for (std::size_t i = 0; i < queries.size(); ++i) cases.push_back(BenchCase{i, queries[i], {}});
  } else {
    cases = load_bench(a.suite, expected);
  }
  auto backend = make_backend(ctx.config);
  const auto rates = ctx.rates();
  const auto library = QueryLibrary::standard(store.vocabulary(), ctx.config.templates);
  const auto registry = LocalRegistry::from_store(store);
  ReportBundle bundle;
  bundle.rq3 = run_rq3(cases, library, store, registry, *backend, rates, rc);
  for (const auto& agg : bundle.rq3->aggregates) {
    ctx.out << fmt::format("{}: {}/{} succeeded, mean cost {:.6f} USD, mean latency {:.3f} s\n",
                           to_string(agg.system), agg.successes, agg.cases, agg.mean_cost,
                           agg.mean_latency_s);
  }
  print_written(ctx.out, emit_report(bundle, formats, a.report_dir));
  return kExitOk;
}

struct ReportArgs {
  std::vector<std::string> inputs;
  std::string out_dir = "reports/combined";
  std::vector<std::string> formats{"json", "csv", "md"};
};

int cmd_report(Context& ctx, const ReportArgs& a) {
  const auto formats = parse_formats(a.formats);
  Json merged{{"report_version", 1}, {"rq1", Json::array()}, {"rq2", Json::array()}, {"rq3", nullptr}};
  for (const auto& path : a.inputs) {
    const auto doc = load_report(path);
    for (const auto& r : doc.at("rq1")) merged["rq1"].push_back(r);
    for (const auto& r : doc.at("rq2")) merged["rq2"].push_back(r);
    if (!doc.at("rq3").is_null()) {
      if (!merged["rq3"].is_null()) {
        throw Error(ErrorKind::UsageError, "more than one input holds an rq3 section");
      }
      merged["rq3"] = doc.at("rq3");
    }
  }
  print_written(ctx.out, emit_report(merged, formats, a.out_dir));
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ConfigError: return kExitConfig;
    case ErrorKind::UsageError: return kExitUsage;
    default: return kExitFailure;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"finq: natural language questions over a local market data store, "
               "answered through vetted query functions, plus the experiment harness."};
  app.name("finq");
  app.require_subcommand(1);
  app.footer(
      "Settings resolve as flags > --config file > defaults. The config file holds key = value\n"
      "lines using the flag names with '_' for '-' (e.g. mock_script = m.json). The live\n"
      "backend's API key is read only from the environment variable named by --api-key-env.\n"
      "Exit codes: 0 ok, 1 runtime error, 2 usage error, 3 configuration error.");

  std::string config_file;
  app.add_option("--config", config_file, "key = value settings file")->check(CLI::ExistingFile);
  std::map<std::string, std::string> flag_values;
  std::map<std::string, CLI::Option*> flag_options;
  for (const auto& [key, flag] : kSettingFlags) {
    flag_options[key] = app.add_option(flag, flag_values[key], kSettingHelp.at(key));
  }

  IngestArgs ingest_args;
  auto* ingest = app.add_subcommand("ingest", "create or extend the market store from CSV files");
  ingest->fallthrough();
  ingest->add_option("--companies", ingest_args.companies,
                     "companies CSV (ticker,name,aliases,index_memberships)");
  ingest->add_option("--prices", ingest_args.prices,
                     "daily prices CSV (ticker,date,open,high,low,close,adj_close,volume)");
  ingest->add_option("--fundamentals", ingest_args.fundamentals,
                     "fundamentals CSV (ticker,fiscal_period,period_end_date,metric,value,unit)");
  ingest->add_flag("--synthetic", ingest_args.synthetic,
                   "build a new store from the companies file plus generated, not real, prices "
                   "and fundamentals");
  ingest->add_option("--seed", ingest_args.seed, "seed for --synthetic");

  AskArgs ask_args;
  auto* ask = app.add_subcommand("ask", "answer one question through the function calling loop");
  ask->fallthrough();
  ask->add_option("question", ask_args.question, "the question")->required();
  ask->add_flag("--json", ask_args.json, "print the answer document as JSON");
  ask->add_flag("--trace", ask_args.trace, "include the step trace (with --json)");

  AskArgs repl_args;
  auto* repl = app.add_subcommand("repl", "interactive question loop on stdin; 'exit' quits");
  repl->fallthrough();
  repl->add_flag("--json", repl_args.json, "print answer documents as JSON");
  repl->add_flag("--trace", repl_args.trace, "include the step trace (with --json)");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve", "HTTP mode: POST /ask {\"question\", \"trace\"}, GET /health");
  serve->fallthrough();
  serve->add_option("--host", serve_args.host, "bind address (default 127.0.0.1)");
  serve->add_option("--port", serve_args.port, "port; 0 picks a free one (default 8080)");

  auto* eval = app.add_subcommand("eval", "run an experiment and write its report files");
  eval->fallthrough();
  eval->require_subcommand(1);

  Rq1Args rq1_args;
  auto* rq1 = eval->add_subcommand("rq1", "forecast accuracy before vs after the model's knowledge cutoff");
  rq1->fallthrough();
  rq1->add_option("--cutoff", rq1_args.cutoff, "knowledge cutoff (default: from the cutoff table)");
  rq1->add_option("--targets", rq1_args.targets, "stock_price, revenue, net_income")->delimiter(',');
  rq1->add_option("--windows", rq1_args.windows, "windows per ticker and group (default 1)");
  rq1->add_option("--max-per-group", rq1_args.max_per_group, "cap per target and group; 0 = none");
  rq1->add_option("--tickers", rq1_args.tickers, "restrict to these tickers")->delimiter(',');
  rq1->add_flag("--adjusted", rq1_args.adjusted, "use adjusted close instead of close");
  rq1->add_option("--synthetic-noise", rq1_args.synthetic_noise,
                  "BEFORE,AFTER: answer with truth plus Gaussian noise instead of a model")
      ->delimiter(',');
  rq1->add_option("--seed", rq1_args.seed, "seed for --synthetic-noise");
  rq1->add_option("--report-dir", rq1_args.report_dir, "output directory (default reports/rq1)");
  rq1->add_option("--formats", rq1_args.formats, "json, csv, md")->delimiter(',');

  Rq2Args rq2_args;
  auto* rq2 = eval->add_subcommand("rq2", "ticker retrieval accuracy on index constituents");
  rq2->fallthrough();
  rq2->add_option("--index", rq2_args.indices, "NASDAQ100, SP500 (default both)")->delimiter(',');
  rq2->add_option("--cutoff", rq2_args.cutoff, "knowledge cutoff (default: from the cutoff table)");
  rq2->add_option("--prompt", rq2_args.prompt, "prompt template with {company_name}");
  rq2->add_option("--report-dir", rq2_args.report_dir, "output directory (default reports/rq2)");
  rq2->add_option("--formats", rq2_args.formats, "json, csv, md")->delimiter(',');

  Rq3Args rq3_args;
  auto* rq3 = eval->add_subcommand("rq3", "cost, latency and accuracy: function calling vs text-to-SQL");
  rq3->fallthrough();
  rq3->add_option("--suite", rq3_args.suite, "one question per line")->required()->check(CLI::ExistingFile);
  rq3->add_option("--expected", rq3_args.expected,
                  "expected results JSON (default: <suite>.expected.json next to the suite)")
      ->check(CLI::ExistingFile);
  rq3->add_option("--systems", rq3_args.systems, "both, function_calling or text_to_sql");
  rq3->add_option("--report-dir", rq3_args.report_dir, "output directory (default reports/rq3)");
  rq3->add_option("--formats", rq3_args.formats, "json, csv, md")->delimiter(',');

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "merge saved report.json files and re-render them");
  report->fallthrough();
  report->add_option("inputs", report_args.inputs, "report.json files")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_args.out_dir, "output directory (default reports/combined)");
  report->add_option("--formats", report_args.formats, "json, csv, md")->delimiter(',');

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    Context ctx{AppConfig::defaults(), out, err, in};
    if (!config_file.empty()) apply_config_file(ctx.config, config_file);
    for (const auto& [key, flag] : kSettingFlags) {
      if (flag_options[key]->count() > 0) apply_setting(ctx.config, key, flag_values[key]);
    }
    if (ingest->parsed()) return cmd_ingest(ctx, ingest_args);
    if (ask->parsed()) return cmd_ask(ctx, ask_args);
    if (repl->parsed()) return cmd_repl(ctx, repl_args);
    if (serve->parsed()) return cmd_serve(ctx, serve_args);
    if (rq1->parsed()) return cmd_rq1(ctx, rq1_args);
    if (rq2->parsed()) return cmd_rq2(ctx, rq2_args);
    if (rq3->parsed()) return cmd_rq3(ctx, rq3_args);
    if (report->parsed()) return cmd_report(ctx, report_args);
    err << app.help();
    return kExitUsage;
  } catch (const Error& e) {
    err << fmt::format("error [{}]: {}\n", to_string(e.kind()), e.what());
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace finq
