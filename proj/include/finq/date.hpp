#pragma once

#include <chrono>
#include <compare>
#include <optional>
#include <string>
#include <string_view>

namespace finq {

/// Calendar date (proleptic Gregorian), ISO-8601 text form.
class Date {
 public:
  constexpr Date() = default;
  constexpr explicit Date(std::chrono::sys_days days) : days_(days) {}

  /// Throws PreconditionViolated for impossible dates.
  static Date from_ymd(int year, unsigned month, unsigned day);
  /// Strict YYYY-MM-DD.
  static std::optional<Date> parse(std::string_view text);

  constexpr std::chrono::sys_days days() const { return days_; }
  std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }
  int year() const;
  unsigned month() const;
  unsigned day() const;
  /// 1 = Monday ... 7 = Sunday.
  unsigned iso_weekday() const;
  bool is_weekend() const { return iso_weekday() >= 6; }

  Date plus_days(int n) const { return Date{days_ + std::chrono::days{n}}; }
  /// Month arithmetic clamps to the last valid day (03-31 minus 1 month is 02-28/29).
  Date minus_months(int n) const;
  Date minus_years(int n) const { return minus_months(12 * n); }
  Date week_start() const;

  std::string to_string() const;

  friend constexpr auto operator<=>(Date, Date) = default;

 private:
  std::chrono::sys_days days_{};
};

}  // namespace finq
