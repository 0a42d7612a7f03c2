#include "finq/decimal.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>

#include "finq/error.hpp"

namespace finq {
namespace {

std::optional<std::int64_t> parse_fixed(std::string_view text, int fraction_digits) {
  if (text.empty()) return std::nullopt;
  bool negative = false;
  std::size_t pos = 0;
  if (text[0] == '-' || text[0] == '+') {
    negative = text[0] == '-';
    pos = 1;
  }
  std::int64_t value = 0;
  int int_digits = 0;
  int frac_digits = 0;
  bool seen_point = false;
  for (; pos < text.size(); ++pos) {
    const char c = text[pos];
    if (c == '.') {
      if (seen_point) return std::nullopt;
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') return std::nullopt;
    const int digit = c - '0';
    if (seen_point) {
      ++frac_digits;
      if (frac_digits > fraction_digits) {
        if (digit != 0) return std::nullopt;
        continue;
      }
    } else {
      ++int_digits;
    }
    if (__builtin_mul_overflow(value, 10, &value)) return std::nullopt;
    if (__builtin_add_overflow(value, digit, &value)) return std::nullopt;
  }
  if (int_digits == 0 && frac_digits == 0) return std::nullopt;
  for (int i = std::min(frac_digits, fraction_digits); i < fraction_digits; ++i) {
    if (__builtin_mul_overflow(value, 10, &value)) return std::nullopt;
  }
  return negative ? -value : value;
}

std::int64_t pow10(int n) {
  std::int64_t p = 1;
  while (n-- > 0) p *= 10;
  return p;
}

std::string format_fixed(std::int64_t units, int scale_digits, int shown_digits, bool trim) {
  const bool negative = units < 0;
  // magnitude in unsigned to survive INT64_MIN
  std::uint64_t magnitude = negative ? std::uint64_t{0} - static_cast<std::uint64_t>(units)
                                     : static_cast<std::uint64_t>(units);
  const auto scale = static_cast<std::uint64_t>(pow10(scale_digits));
  if (shown_digits < scale_digits) {
    const auto drop = static_cast<std::uint64_t>(pow10(scale_digits - shown_digits));
    magnitude = (magnitude + drop / 2) / drop * drop;
  }
  const std::uint64_t whole = magnitude / scale;
  std::uint64_t frac = magnitude % scale;
  std::string out = negative && magnitude != 0 ? "-" : "";
  out += std::to_string(whole);
  std::string frac_text = std::to_string(frac);
  frac_text.insert(0, static_cast<std::size_t>(scale_digits) - frac_text.size(), '0');
  frac_text.resize(static_cast<std::size_t>(shown_digits));
  if (trim) {
    while (!frac_text.empty() && frac_text.back() == '0') frac_text.pop_back();
  }
  if (!frac_text.empty()) out += "." + frac_text;
  return out;
}

}  // namespace

Decimal Decimal::from_integer(std::int64_t value) {
  std::int64_t units = 0;
  if (__builtin_mul_overflow(value, kScale, &units)) {
    throw Error(ErrorKind::PreconditionViolated, "decimal overflow");
  }
  return from_scaled(units);
}

Decimal Decimal::from_double(double value) {
  const double scaled = std::round(value * static_cast<double>(kScale));
  if (!std::isfinite(scaled) || std::fabs(scaled) >= 9.2e18) {
    throw Error(ErrorKind::PreconditionViolated, "decimal overflow");
  }
  return from_scaled(static_cast<std::int64_t>(scaled));
}

std::optional<Decimal> Decimal::parse(std::string_view text) {
  auto units = parse_fixed(text, kFractionDigits);
  if (!units) return std::nullopt;
  return from_scaled(*units);
}

double Decimal::to_double() const {
  return static_cast<double>(units_) / static_cast<double>(kScale);
}

std::string Decimal::to_string() const {
  return format_fixed(units_, kFractionDigits, kFractionDigits, true);
}

std::string Decimal::to_string(int fraction_digits) const {
  if (fraction_digits < 0 || fraction_digits > kFractionDigits) {
    throw Error(ErrorKind::PreconditionViolated, "fraction digits out of range");
  }
  return format_fixed(units_, kFractionDigits, fraction_digits, false);
}

Decimal operator+(Decimal a, Decimal b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a.units_, b.units_, &out)) {
    throw Error(ErrorKind::PreconditionViolated, "decimal overflow");
  }
  return Decimal::from_scaled(out);
}

Decimal operator-(Decimal a, Decimal b) {
  std::int64_t out = 0;
  if (__builtin_sub_overflow(a.units_, b.units_, &out)) {
    throw Error(ErrorKind::PreconditionViolated, "decimal overflow");
  }
  return Decimal::from_scaled(out);
}

Decimal Decimal::operator-() const { return from_scaled(0) - *this; }

std::optional<Money> Money::parse(std::string_view text) {
  auto pico = parse_fixed(text, kFractionDigits);
  if (!pico) return std::nullopt;
  return from_pico(*pico);
}

double Money::to_double() const {
  return static_cast<double>(pico_) / static_cast<double>(kScale);
}

std::string Money::to_string() const {
  return format_fixed(pico_, kFractionDigits, kFractionDigits, true);
}

Money operator+(Money a, Money b) {
  std::int64_t out = 0;
  if (__builtin_add_overflow(a.pico_, b.pico_, &out)) {
    throw Error(ErrorKind::PreconditionViolated, "money overflow");
  }
  return Money::from_pico(out);
}

Money& Money::operator+=(Money other) {
  *this = *this + other;
  return *this;
}

}  // namespace finq
