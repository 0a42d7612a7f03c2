#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace finq {

/// Fixed-point decimal with six fractional digits held in a scaled int64.
/// Representable magnitude is about 9.2e12, which covers prices and
/// fundamentals reported in whole currency units.
class Decimal {
 public:
  static constexpr int kFractionDigits = 6;
  static constexpr std::int64_t kScale = 1'000'000;

  constexpr Decimal() = default;

  static constexpr Decimal from_scaled(std::int64_t units) {
    Decimal d;
    d.units_ = units;
    return d;
  }
  static Decimal from_integer(std::int64_t value);
  /// Rounds half away from zero onto the 1e-6 grid.
  static Decimal from_double(double value);

  /// Plain decimal notation only: optional sign, digits, optional fraction.
  /// No exponents, no thousands separators. Digits beyond the sixth
  /// fractional place must be zero.
  static std::optional<Decimal> parse(std::string_view text);

  constexpr std::int64_t scaled() const { return units_; }
  double to_double() const;
  /// Canonical text: no trailing fractional zeros, no "-0".
  std::string to_string() const;
  /// Fixed number of fractional digits (0..6), rounding half away from zero.
  std::string to_string(int fraction_digits) const;

  friend constexpr auto operator<=>(Decimal, Decimal) = default;
  friend Decimal operator+(Decimal a, Decimal b);
  friend Decimal operator-(Decimal a, Decimal b);
  Decimal operator-() const;

 private:
  std::int64_t units_ = 0;
};

/// Exact monetary amount counted in picodollars (1e-12 currency units).
/// A token rate quoted per million tokens with six decimals maps onto this
/// grid without rounding: tokens * rate.scaled() is the cost in picodollars.
class Money {
 public:
  static constexpr int kFractionDigits = 12;
  static constexpr std::int64_t kScale = 1'000'000'000'000;

  constexpr Money() = default;
  static constexpr Money from_pico(std::int64_t pico) {
    Money m;
    m.pico_ = pico;
    return m;
  }
  static std::optional<Money> parse(std::string_view text);

  constexpr std::int64_t pico() const { return pico_; }
  double to_double() const;
  std::string to_string() const;

  friend constexpr auto operator<=>(Money, Money) = default;
  friend Money operator+(Money a, Money b);
  Money& operator+=(Money other);

 private:
  std::int64_t pico_ = 0;
};

}  // namespace finq
