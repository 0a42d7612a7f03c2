#include "finq/date.hpp"

#include <fmt/format.h>

#include "finq/error.hpp"

namespace finq {

using namespace std::chrono;

Date Date::from_ymd(int y, unsigned m, unsigned d) {
  const year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!ymd.ok()) {
    throw Error(ErrorKind::PreconditionViolated, fmt::format("invalid date {}-{}-{}", y, m, d));
  }
  return Date{sys_days{ymd}};
}

std::optional<Date> Date::parse(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return std::nullopt;
  auto digits = [&](std::size_t from, std::size_t count) -> std::optional<int> {
    int v = 0;
    for (std::size_t i = from; i < from + count; ++i) {
      if (text[i] < '0' || text[i] > '9') return std::nullopt;
      v = v * 10 + (text[i] - '0');
    }
    return v;
  };
  auto y = digits(0, 4);
  auto m = digits(5, 2);
  auto d = digits(8, 2);
  if (!y || !m || !d) return std::nullopt;
  const year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                           std::chrono::day{static_cast<unsigned>(*d)}};
  if (!ymd.ok()) return std::nullopt;
  return Date{sys_days{ymd}};
}

int Date::year() const { return static_cast<int>(ymd().year()); }
unsigned Date::month() const { return static_cast<unsigned>(ymd().month()); }
unsigned Date::day() const { return static_cast<unsigned>(ymd().day()); }

unsigned Date::iso_weekday() const { return weekday{days_}.iso_encoding(); }

Date Date::minus_months(int n) const {
  const auto base = ymd();
  year_month_day shifted = base - months{n};
  if (!shifted.ok()) {
    shifted = year_month_day{year_month_day_last{shifted.year(), month_day_last{shifted.month()}}};
  }
  return Date{sys_days{shifted}};
}

Date Date::week_start() const {
  return plus_days(-static_cast<int>(iso_weekday() - 1));
}

std::string Date::to_string() const {
  return fmt::format("{:04}-{:02}-{:02}", year(), month(), day());
}

}  // namespace finq
