#include "finq/query_library.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <regex>

#include <fmt/format.h>

#include "finq/error.hpp"
#include "finq/market_store.hpp"
#include "finq/sqlite.hpp"
#include "finq/ticker_resolver.hpp"

namespace finq {
namespace {

std::string lower_trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out;
  for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

/// "Income Statement", "income-statement" -> "income_statement"
std::string snake(std::string_view s) {
  auto out = lower_trim(s);
  std::string folded;
  for (char c : out) {
    if (c == ' ' || c == '-') {
      if (!folded.empty() && folded.back() != '_') folded += '_';
    } else {
      folded += c;
    }
  }
  return folded;
}

std::string lookup(const std::map<std::string_view, std::string_view>& table, const std::string& key) {
  auto it = table.find(key);
  return it == table.end() ? std::string{} : std::string(it->second);
}

const std::string& require_string(const ParamSpec& spec, const Json& value) {
  if (!value.is_string()) throw Error::invalid_parameter(spec.name, "must be a string");
  return value.get_ref<const std::string&>();
}

Json coerce_param(const ParamSpec& spec, const Json& value, const MetricVocabulary& vocabulary) {
  auto bad = [&](const std::string& reason) -> Error {
    return Error::invalid_parameter(spec.name, reason);
  };
  switch (spec.type) {
    case ParamType::Ticker: {
      const auto& s = require_string(spec, value);
      std::string_view v = s;
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.front()))) v.remove_prefix(1);
      while (!v.empty() && std::isspace(static_cast<unsigned char>(v.back()))) v.remove_suffix(1);
      if (v.empty()) throw bad("must not be empty");
      if (v.size() > 120) throw bad("is too long");
      for (char c : v) {
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) throw bad("contains control characters");
      }
      return std::string(v);
    }
    case ParamType::Date: {
      const auto& s = require_string(spec, value);
      auto d = Date::parse(lower_trim(s));
      if (!d) throw bad("must be a date in YYYY-MM-DD form");
      return d->to_string();
    }
    case ParamType::PositiveInt: {
      std::int64_t n = 0;
      if (value.is_number_integer()) {
        if (value.is_number_unsigned() && value.get<std::uint64_t>() > INT64_MAX) {
          throw bad("is out of range");
        }
        n = value.get<std::int64_t>();
      } else if (value.is_number_float()) {
        const double d = value.get<double>();
        if (!std::isfinite(d) || d != std::floor(d) || std::fabs(d) > 9e15) {
          throw bad("must be an integer");
        }
        n = static_cast<std::int64_t>(d);
      } else if (value.is_string()) {
        const auto s = lower_trim(value.get_ref<const std::string&>());
        static const std::regex kInt("[+-]?[0-9]{1,15}");
        if (!std::regex_match(s, kInt)) throw bad("must be an integer");
        n = std::stoll(s);
      } else {
        throw bad("must be an integer");
      }
      const std::int64_t lo = std::max<std::int64_t>(1, spec.min.value_or(1));
      if (n < lo) throw bad(fmt::format("must be ≥ {}", lo));
      if (spec.max && n > *spec.max) throw bad(fmt::format("must be ≤ {}", *spec.max));
      return n;
    }
    case ParamType::Periodicity: {
      static const std::map<std::string_view, std::string_view> kNames{
          {"daily", "daily"},     {"day", "daily"},        {"weekly", "weekly"},
          {"week", "weekly"},     {"monthly", "monthly"},  {"month", "monthly"},
          {"yearly", "yearly"},   {"year", "yearly"},      {"annual", "yearly"},
          {"annually", "yearly"}};
      auto v = lookup(kNames, snake(require_string(spec, value)));
      if (v.empty()) throw bad("must be one of daily, weekly, monthly, yearly");
      return v;
    }
    case ParamType::Frequency: {
      static const std::map<std::string_view, std::string_view> kNames{
          {"quarterly", "quarterly"}, {"quarter", "quarterly"}, {"q", "quarterly"},
          {"yearly", "yearly"},       {"year", "yearly"},       {"annual", "yearly"},
          {"annually", "yearly"},     {"fy", "yearly"}};
      auto v = lookup(kNames, snake(require_string(spec, value)));
      if (v.empty()) throw bad("must be quarterly or yearly");
      return v;
    }
    case ParamType::StatementKind: {
      static const std::map<std::string_view, std::string_view> kNames{
          {"income_statement", "income_statement"},
          {"income", "income_statement"},
          {"profit_and_loss", "income_statement"},
          {"balance_sheet", "balance_sheet"},
          {"balance", "balance_sheet"},
          {"cash_flow", "cash_flow"},
          {"cash_flow_statement", "cash_flow"},
          {"cashflow", "cash_flow"},
          {"statement_of_cash_flows", "cash_flow"}};
      auto v = lookup(kNames, snake(require_string(spec, value)));
      if (v.empty()) throw bad("must be income_statement, balance_sheet or cash_flow");
      return v;
    }
    case ParamType::Metric: {
      const auto& s = require_string(spec, value);
      auto id = vocabulary.normalize(s);
      if (!id) throw bad(fmt::format("unknown metric '{}'", s));
      return *id;
    }
    case ParamType::PeriodTag: {
      std::optional<PeriodTag> tag;
      if (value.is_number_integer()) {
        tag = PeriodTag::parse(std::to_string(value.get<std::int64_t>()));
      } else {
        tag = PeriodTag::parse(require_string(spec, value));
      }
      if (!tag) throw bad("must be a fiscal period such as 2023Q2 or 2023FY");
      return tag->to_string();
    }
    case ParamType::Choice: {
      const auto v = lower_trim(require_string(spec, value));
      for (const auto& allowed : spec.enum_values) {
        if (v == allowed || v + "s" == allowed) return allowed;
      }
      std::string list;
      for (const auto& a : spec.enum_values) list += (list.empty() ? "" : ", ") + a;
      throw bad(fmt::format("must be one of {}", list));
    }
  }
  throw bad("unsupported type");
}

Json default_json(const ParamSpec& spec) {
  // Defaults are written as text; integers go through the same coercion.
  return Json(*spec.default_value);
}

Json param_schema(const ParamSpec& p, const MetricVocabulary& vocabulary) {
  Json s;
  switch (p.type) {
    case ParamType::PositiveInt:
      s["type"] = "integer";
      s["minimum"] = std::max<std::int64_t>(1, p.min.value_or(1));
      if (p.max) s["maximum"] = *p.max;
      break;
    case ParamType::Periodicity:
      s["type"] = "string";
      s["enum"] = {"daily", "weekly", "monthly", "yearly"};
      break;
    case ParamType::Frequency:
      s["type"] = "string";
      s["enum"] = {"quarterly", "yearly"};
      break;
    case ParamType::StatementKind:
      s["type"] = "string";
      s["enum"] = {"income_statement", "balance_sheet", "cash_flow"};
      break;
    case ParamType::Metric: {
      s["type"] = "string";
      auto ids = Json::array();
      for (const auto& m : vocabulary.all()) ids.push_back(m.id);
      s["enum"] = std::move(ids);
      break;
    }
    case ParamType::Choice:
      s["type"] = "string";
      s["enum"] = p.enum_values;
      break;
    case ParamType::PeriodTag:
      s["type"] = "string";
      s["pattern"] = "^[0-9]{4}(Q[1-4]|FY)$";
      break;
    case ParamType::Date:
      s["type"] = "string";
      s["pattern"] = "^[0-9]{4}-[0-9]{2}-[0-9]{2}$";
      break;
    case ParamType::Ticker:
      s["type"] = "string";
      break;
  }
  s["description"] = p.description;
  if (p.default_value) {
    if (p.type == ParamType::PositiveInt) {
      s["default"] = std::stoll(*p.default_value);
    } else {
      s["default"] = *p.default_value;
    }
  }
  return s;
}

ParamSpec make_param(std::string name, ParamType type, bool required, std::string description,
                     std::optional<std::string> default_value = std::nullopt,
                     std::optional<std::int64_t> max = std::nullopt,
                     std::vector<std::string> enum_values = {}) {
  ParamSpec p;
  p.name = std::move(name);
  p.type = type;
  p.required = required;
  p.description = std::move(description);
  p.default_value = std::move(default_value);
  if (type == ParamType::PositiveInt) p.min = 1;
  p.max = max;
  p.enum_values = std::move(enum_values);
  return p;
}

const std::string kTickerDescription =
    "Ticker symbol (for example NVDA) or the company name as the user wrote it.";

LinkingFunction stock_price_function() {
  LinkingFunction f;
  f.name = "get_stock_price";
  f.description =
      "Price bars (open, high, low, close, adjusted close, volume) for one company, oldest "
      "first. Choose exactly one window: n_days for the most recent N trading days; "
      "lookback_count with lookback_unit for a calendar lookback ending on the latest trading "
      "day; or start_date with end_date for an inclusive date range. Without a window the "
      "latest trading day is returned. periodicity keeps the last trading day of each week, "
      "month or year.";
  f.params = {
      make_param("ticker", ParamType::Ticker, true, kTickerDescription),
      make_param("n_days", ParamType::PositiveInt, false,
                 "Number of most recent trading days.", "1", 5000),
      make_param("lookback_count", ParamType::PositiveInt, false,
                 "Length of a calendar lookback, counted in lookback_unit.", std::nullopt, 100),
      make_param("lookback_unit", ParamType::Choice, false,
                 "Unit of lookback_count. days counts trading days.", "days", std::nullopt,
                 {"days", "weeks", "months", "years"}),
      make_param("start_date", ParamType::Date, false, "First date of the range, YYYY-MM-DD."),
      make_param("end_date", ParamType::Date, false, "Last date of the range, YYYY-MM-DD."),
      make_param("periodicity", ParamType::Periodicity, false, "Sampling of the returned bars.",
                 "daily"),
  };
  f.exclusive_groups = {{{"n_days"}}, {{"lookback_count", "lookback_unit"}},
                        {{"start_date", "end_date"}}};
  f.default_group = 0;
  f.template_ids = {"ticker_presence", "price_last_n", "price_range"};
  f.finalize = [](Json& args) {
    if (args.contains("lookback_unit") && !args.contains("lookback_count")) {
      throw Error::missing_parameter("lookback_count");
    }
    if (args.contains("start_date") &&
        args.at("end_date").get<std::string>() < args.at("start_date").get<std::string>()) {
      throw Error::invalid_parameter("end_date", "must not be before start_date");
    }
  };
  return f;
}

LinkingFunction fundamental_metric_function() {
  LinkingFunction f;
  f.name = "get_fundamental_metric";
  f.description =
      "The most recent values of one fundamental metric (for example revenue, net_income, "
      "total_assets) for one company at quarterly or yearly frequency, oldest first.";
  f.params = {
      make_param("ticker", ParamType::Ticker, true, kTickerDescription),
      make_param("metric", ParamType::Metric, true, "Metric identifier."),
      make_param("n_periods", ParamType::PositiveInt, false, "Number of most recent periods.",
                 "1", 200),
      make_param("frequency", ParamType::Frequency, false, "Reporting frequency.", "quarterly"),
  };
  f.template_ids = {"ticker_presence", "fundamental_series"};
  return f;
}

LinkingFunction financial_statement_function() {
  LinkingFunction f;
  f.name = "get_financial_statement";
  f.description =
      "A whole income statement, balance sheet or cash flow statement for one company, one "
      "row per period and line item, missing items as null. Choose the periods either with "
      "n_periods (most recent) or with from_period and to_period (inclusive fiscal period "
      "tags such as 2023Q1 or 2022FY). Without either the latest period is returned. "
      "frequency defaults to quarterly, or follows the period tags.";
  f.params = {
      make_param("ticker", ParamType::Ticker, true, kTickerDescription),
      make_param("statement_kind", ParamType::StatementKind, true, "Which statement."),
      make_param("frequency", ParamType::Frequency, false, "Reporting frequency."),
      make_param("n_periods", ParamType::PositiveInt, false, "Number of most recent periods.",
                 "1", 200),
      make_param("from_period", ParamType::PeriodTag, false, "First fiscal period, e.g. 2021Q1."),
      make_param("to_period", ParamType::PeriodTag, false, "Last fiscal period, e.g. 2022Q2."),
  };
  f.exclusive_groups = {{{"n_periods"}}, {{"from_period", "to_period"}}};
  f.default_group = 0;
  f.template_ids = {"ticker_presence", "statement_last_n", "statement_range"};
  f.finalize = [](Json& args) {
    if (args.contains("from_period")) {
      const auto from = *PeriodTag::parse_canonical(args.at("from_period").get<std::string>());
      const auto to = *PeriodTag::parse_canonical(args.at("to_period").get<std::string>());
      if (from.frequency() != to.frequency()) {
        throw Error::invalid_parameter("to_period", "must use the same frequency as from_period");
      }
      if (to < from) throw Error::invalid_parameter("to_period", "must not precede from_period");
      const std::string inferred(to_string(from.frequency()));
      if (args.contains("frequency") && args.at("frequency").get<std::string>() != inferred) {
        throw Error::invalid_parameter("frequency",
                                       fmt::format("conflicts with the {} period tags", inferred));
      }
      args["frequency"] = inferred;
    } else if (!args.contains("frequency")) {
      args["frequency"] = "quarterly";
    }
  };
  return f;
}

/// Binds validated values to a template and collects its rows as text.
class TemplateRunner {
 public:
  TemplateRunner(const QueryLibrary& lib, const sql::Database& db, ExecutionResult& out)
      : lib_(lib), db_(db), out_(out) {}

  ResultTable run(std::string_view id, const std::map<std::string, Json>& values) {
    const auto* t = lib_.find_template(id);
    if (t == nullptr) throw Error(ErrorKind::StoreError, fmt::format("no template '{}'", id));
    auto stmt = db_.prepare(t->sql_text);
    for (const auto& p : t->params) {
      const auto& v = values.at(p.name);
      const std::string placeholder = ":" + p.name;
      if (v.is_number_integer()) {
        stmt.bind(placeholder, v.get<std::int64_t>());
      } else {
        stmt.bind(placeholder, v.get_ref<const std::string&>());
      }
    }
    ResultTable table;
    table.columns = t->result_shape;
    while (stmt.step()) {
      std::vector<Cell> row;
      for (int c = 0; c < stmt.column_count(); ++c) row.push_back(stmt.column_text(c));
      table.rows.push_back(std::move(row));
    }
    out_.template_ids.emplace_back(id);
    return table;
  }

 private:
  const QueryLibrary& lib_;
  const sql::Database& db_;
  ExecutionResult& out_;
};

struct Presence {
  bool known = false;
  std::optional<Date> latest;
};

Presence presence_of(TemplateRunner& runner, const std::string& ticker) {
  auto t = runner.run("ticker_presence", {{"ticker", ticker}});
  Presence p;
  p.known = t.rows.at(0).at(0).value_or("0") != "0";
  if (const auto& d = t.rows.at(0).at(1)) p.latest = Date::parse(*d);
  return p;
}

bool has_space(std::string_view s) {
  return std::any_of(s.begin(), s.end(), [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::pair<std::string, Presence> resolve_ticker(TemplateRunner& runner, const LocalRegistry& registry,
                                                const std::string& arg) {
  std::vector<std::string> candidates{arg};
  std::string upper;
  for (char c : arg) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  if (upper != arg) candidates.push_back(upper);
  const auto normalized = has_space(arg) ? std::string{} : normalize_ticker(arg);
  if (!normalized.empty() && std::find(candidates.begin(), candidates.end(), normalized) == candidates.end()) {
    candidates.push_back(normalized);
  }
  for (const auto& c : candidates) {
    auto p = presence_of(runner, c);
    if (p.known) return {c, p};
  }
  if (auto t = registry.try_resolve(arg)) return {*t, presence_of(runner, *t)};
  if (!normalized.empty()) {
    throw Error(ErrorKind::UnknownTicker, fmt::format("unknown ticker '{}'", normalized));
  }
  throw Error(ErrorKind::UnknownCompany, fmt::format("unknown company '{}'", arg));
}

std::size_t distinct_periods(const ResultTable& t) {
  std::set<std::string> periods;
  for (const auto& row : t.rows) periods.insert(row.at(1).value_or(""));
  return periods.size();
}

}  // namespace

const ParamSpec* LinkingFunction::param(std::string_view n) const {
  for (const auto& p : params) {
    if (p.name == n) return &p;
  }
  return nullptr;
}

int LinkingFunction::group_of(std::string_view n) const {
  for (std::size_t g = 0; g < exclusive_groups.size(); ++g) {
    const auto& m = exclusive_groups[g].members;
    if (std::find(m.begin(), m.end(), n) != m.end()) return static_cast<int>(g);
  }
  return -1;
}

std::filesystem::path default_template_path() {
  return std::filesystem::path(FINQ_DATA_DIR) / "query_library.sql";
}

std::filesystem::path default_vocabulary_path() {
  return std::filesystem::path(FINQ_DATA_DIR) / "metrics.csv";
}

Date lookback_start(Date latest, int count, std::string_view unit) {
  if (count < 1) throw Error(ErrorKind::PreconditionViolated, "lookback count must be >= 1");
  if (unit == "weeks") return latest.plus_days(-7 * count + 1);
  if (unit == "months") return latest.minus_months(count).plus_days(1);
  if (unit == "years") return latest.minus_years(count).plus_days(1);
  if (unit == "days") return latest.plus_days(-count + 1);
  throw Error(ErrorKind::PreconditionViolated, fmt::format("unknown lookback unit '{}'", unit));
}

LibraryBuilder::LibraryBuilder(MetricVocabulary vocabulary) : vocabulary_(std::move(vocabulary)) {}

LibraryBuilder& LibraryBuilder::add_template(QueryTemplate t) {
  for (const auto& existing : templates_) {
    if (existing.id == t.id) {
      throw Error(ErrorKind::RegistrationError,
                  fmt::format("template '{}' is already registered", t.id));
    }
  }
  auto schema_db = sql::Database::open(":memory:", sql::Access::ReadWrite);
  schema_db.exec(store_schema_sql());
  check_template(t, schema_db);
  for (const auto& p : t.params) {
    if (p.default_value) {
      try {
        coerce_param(p, default_json(p), vocabulary_);
      } catch (const Error& e) {
        throw Error(ErrorKind::RegistrationError,
                    fmt::format("template '{}': default of {}: {}", t.id, p.name, e.what()));
      }
    }
  }
  templates_.push_back(std::move(t));
  return *this;
}

LibraryBuilder& LibraryBuilder::add_function(LinkingFunction f) {
  auto reject = [&](const std::string& why) {
    throw Error(ErrorKind::RegistrationError, fmt::format("function '{}': {}", f.name, why));
  };
  static const std::regex kName("[A-Za-z0-9_-]{1,64}");
  if (!std::regex_match(f.name, kName)) reject("name must match [A-Za-z0-9_-]{1,64}");
  for (const auto& existing : functions_) {
    if (existing.name == f.name) reject("already registered");
  }
  if (f.description.empty()) reject("missing description");
  std::set<std::string> names;
  for (const auto& p : f.params) {
    if (!names.insert(p.name).second) reject(fmt::format("duplicate param '{}'", p.name));
    if (p.default_value) {
      try {
        coerce_param(p, default_json(p), vocabulary_);
      } catch (const Error& e) {
        reject(fmt::format("default of {} violates its constraints: {}", p.name, e.what()));
      }
    }
  }
  for (const auto& g : f.exclusive_groups) {
    for (const auto& m : g.members) {
      const auto* p = f.param(m);
      if (p == nullptr) reject(fmt::format("group member '{}' is not a param", m));
      if (p->required) reject(fmt::format("group member '{}' cannot be required", m));
    }
  }
  if (f.default_group >= static_cast<int>(f.exclusive_groups.size())) reject("bad default group");
  if (f.default_group >= 0) {
    for (const auto& m : f.exclusive_groups[f.default_group].members) {
      if (!f.param(m)->default_value) reject(fmt::format("default group member '{}' has no default", m));
    }
  }
  if (f.template_ids.empty()) reject("no templates");
  for (const auto& id : f.template_ids) {
    const bool found = std::any_of(templates_.begin(), templates_.end(),
                                   [&](const QueryTemplate& t) { return t.id == id; });
    if (!found) reject(fmt::format("unknown template '{}'", id));
  }
  functions_.push_back(std::move(f));
  return *this;
}

QueryLibrary LibraryBuilder::build() && {
  return QueryLibrary(std::move(vocabulary_), std::move(templates_), std::move(functions_));
}

QueryLibrary::QueryLibrary(MetricVocabulary vocabulary, std::vector<QueryTemplate> templates,
                           std::vector<LinkingFunction> functions)
    : vocabulary_(std::move(vocabulary)),
      templates_(std::move(templates)),
      functions_(std::move(functions)) {}

QueryLibrary QueryLibrary::standard(MetricVocabulary vocabulary,
                                    const std::filesystem::path& template_file) {
  LibraryBuilder builder(std::move(vocabulary));
  for (auto& t : load_template_file(template_file)) builder.add_template(std::move(t));
  builder.add_function(stock_price_function());
  builder.add_function(fundamental_metric_function());
  builder.add_function(financial_statement_function());
  return std::move(builder).build();
}

const LinkingFunction* QueryLibrary::function(std::string_view name) const {
  for (const auto& f : functions_) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const QueryTemplate* QueryLibrary::find_template(std::string_view id) const {
  for (const auto& t : templates_) {
    if (t.id == id) return &t;
  }
  return nullptr;
}

ValidatedArgs QueryLibrary::validate_args(std::string_view name, const Json& raw_args) const {
  const auto* f = function(name);
  if (f == nullptr) {
    throw Error(ErrorKind::UnknownFunction, fmt::format("unknown function '{}'", name));
  }
  const Json raw = raw_args.is_null() ? Json::object() : raw_args;
  if (!raw.is_object()) throw Error::invalid_parameter("arguments", "must be a JSON object");

  auto present = [&](const std::string& key) { return raw.contains(key) && !raw.at(key).is_null(); };
  for (const auto& [key, value] : raw.items()) {
    if (f->param(key) == nullptr) throw Error::invalid_parameter(key, "unknown parameter");
  }

  // Which exclusive groups does the call touch?
  int active = -1;
  std::string active_member;
  for (std::size_t g = 0; g < f->exclusive_groups.size(); ++g) {
    for (const auto& m : f->exclusive_groups[g].members) {
      if (!present(m)) continue;
      if (active >= 0 && active != static_cast<int>(g)) {
        throw Error::invalid_parameter(m, fmt::format("cannot be combined with {}", active_member));
      }
      if (active < 0) {
        active = static_cast<int>(g);
        active_member = m;
      }
    }
  }
  if (active < 0 && !f->exclusive_groups.empty()) {
    if (f->default_group < 0) throw Error::missing_parameter(f->exclusive_groups[0].members[0]);
    active = f->default_group;
  }

  Json out = Json::object();
  for (const auto& p : f->params) {
    const int g = f->group_of(p.name);
    if (g >= 0 && g != active) continue;
    if (present(p.name)) {
      out[p.name] = coerce_param(p, raw.at(p.name), vocabulary_);
    } else if (p.default_value) {
      out[p.name] = coerce_param(p, default_json(p), vocabulary_);
    } else if (p.required || g >= 0) {
      throw Error::missing_parameter(p.name);
    }
  }
  if (f->finalize) f->finalize(out);

  Json ordered = Json::object();
  for (const auto& p : f->params) {
    if (out.contains(p.name)) ordered[p.name] = out.at(p.name);
  }
  return {f->name, std::move(ordered)};
}

ExecutionResult QueryLibrary::execute(const ValidatedArgs& validated, const MarketStore& store,
                                      const LocalRegistry& registry) const {
  const auto started = std::chrono::steady_clock::now();
  const auto* f = function(validated.function);
  if (f == nullptr) {
    throw Error(ErrorKind::UnknownFunction, fmt::format("unknown function '{}'", validated.function));
  }
  const auto& args = validated.args;
  auto arg_string = [&](const char* key) { return args.at(key).get<std::string>(); };
  auto arg_int = [&](const char* key) { return args.at(key).get<std::int64_t>(); };

  ExecutionResult out;
  TemplateRunner runner(*this, store.database(), out);
  auto [ticker, presence] = resolve_ticker(runner, registry, arg_string("ticker"));
  out.ticker = ticker;

  if (f->name == "get_stock_price") {
    const auto periodicity = arg_string("periodicity");
    auto range = [&](const std::string& start, const std::string& end) {
      auto t = runner.run("price_range", {{"ticker", ticker},
                                          {"start_date", start},
                                          {"end_date", end},
                                          {"periodicity", periodicity}});
      if (t.rows.empty()) {
        throw Error(ErrorKind::EmptyRange,
                    fmt::format("no {} bars between {} and {}", ticker, start, end));
      }
      return t;
    };
    const bool trading_days =
        args.contains("n_days") ||
        (args.contains("lookback_unit") && arg_string("lookback_unit") == "days");
    if (trading_days) {
      const auto n = args.contains("n_days") ? arg_int("n_days") : arg_int("lookback_count");
      if (!presence.latest) {
        throw Error(ErrorKind::InsufficientData,
                    fmt::format("{} has 0 bars, {} requested", ticker, n));
      }
      auto t = runner.run("price_last_n",
                          {{"ticker", ticker}, {"end_date", presence.latest->to_string()}, {"n", n}});
      if (static_cast<std::int64_t>(t.rows.size()) < n) {
        throw Error(ErrorKind::InsufficientData,
                    fmt::format("{} has {} bars, {} requested", ticker, t.rows.size(), n));
      }
      if (periodicity != "daily") t = range(*t.rows.front().at(1), presence.latest->to_string());
      out.table = std::move(t);
    } else if (args.contains("lookback_count")) {
      if (!presence.latest) {
        throw Error(ErrorKind::EmptyRange, fmt::format("no {} price bars", ticker));
      }
      const auto start = lookback_start(*presence.latest, static_cast<int>(arg_int("lookback_count")),
                                        arg_string("lookback_unit"));
      out.table = range(start.to_string(), presence.latest->to_string());
    } else {
      out.table = range(arg_string("start_date"), arg_string("end_date"));
    }
  } else if (f->name == "get_fundamental_metric") {
    const auto n = arg_int("n_periods");
    auto t = runner.run("fundamental_series", {{"ticker", ticker},
                                               {"metric", arg_string("metric")},
                                               {"frequency", arg_string("frequency")},
                                               {"n_periods", n}});
    if (static_cast<std::int64_t>(t.rows.size()) < n) {
      throw Error(ErrorKind::InsufficientData,
                  fmt::format("{} {} has {} {} periods, {} requested", ticker, arg_string("metric"),
                              t.rows.size(), arg_string("frequency"), n));
    }
    out.table = std::move(t);
  } else if (f->name == "get_financial_statement") {
    const auto kind = arg_string("statement_kind");
    const auto frequency = arg_string("frequency");
    if (args.contains("n_periods")) {
      const auto n = arg_int("n_periods");
      auto t = runner.run("statement_last_n", {{"ticker", ticker},
                                               {"statement_kind", kind},
                                               {"frequency", frequency},
                                               {"n_periods", n}});
      if (t.rows.empty()) {
        throw Error(ErrorKind::EmptyRange,
                    fmt::format("no {} {} data for {}", frequency, kind, ticker));
      }
      const auto periods = distinct_periods(t);
      if (static_cast<std::int64_t>(periods) < n) {
        throw Error(ErrorKind::InsufficientData,
                    fmt::format("{} has {} {} periods, {} requested", ticker, periods, kind, n));
      }
      out.table = std::move(t);
    } else {
      const auto from = arg_string("from_period");
      const auto to = arg_string("to_period");
      auto t = runner.run("statement_range", {{"ticker", ticker},
                                              {"statement_kind", kind},
                                              {"frequency", frequency},
                                              {"from_period", from},
                                              {"to_period", to}});
      if (t.rows.empty()) {
        throw Error(ErrorKind::EmptyRange,
                    fmt::format("no {} data for {} between {} and {}", kind, ticker, from, to));
      }
      out.table = std::move(t);
    }
  } else {
    throw Error(ErrorKind::UnknownFunction,
                fmt::format("function '{}' has no execution route", f->name));
  }
  out.elapsed = std::chrono::duration_cast<std::chrono::nanoseconds>(
      std::chrono::steady_clock::now() - started);
  return out;
}

ExecutionResult QueryLibrary::execute(const ValidatedArgs& args, const MarketStore& store) const {
  return execute(args, store, LocalRegistry::from_store(store));
}

std::vector<llm::ToolSpec> QueryLibrary::to_tool_specs() const {
  std::vector<llm::ToolSpec> specs;
  for (const auto& f : functions_) {
    Json parameters;
    parameters["type"] = "object";
    auto& props = parameters["properties"] = Json::object();
    auto required = Json::array();
    for (const auto& p : f.params) {
      props[p.name] = param_schema(p, vocabulary_);
      if (p.required) required.push_back(p.name);
    }
    parameters["required"] = std::move(required);
    parameters["additionalProperties"] = false;
    specs.push_back({f.name, f.description, std::move(parameters)});
  }
  return specs;
}

std::set<std::string> QueryLibrary::statement_texts() const {
  std::set<std::string> out;
  for (const auto& t : templates_) out.insert(t.sql_text);
  return out;
}

}  // namespace finq
