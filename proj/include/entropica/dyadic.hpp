#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace entropica {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

// Exact value mantissa * 2^exponent. Canonical form: odd mantissa, or
// zero mantissa with zero exponent. Add, sub and mul never round.
class Dyadic {
 public:
  Dyadic() = default;
  Dyadic(long long value);  // NOLINT(google-explicit-constructor)
  Dyadic(BigInt mantissa, std::int64_t exponent);

  // k * 2^-level
  static Dyadic ratio(BigInt numerator, std::int64_t level);
  static Dyadic pow2(std::int64_t exponent);

  const BigInt& mantissa() const noexcept { return mantissa_; }
  std::int64_t exponent() const noexcept { return exponent_; }

  bool is_zero() const noexcept { return mantissa_.is_zero(); }
  int sign() const noexcept { return mantissa_.sign(); }
  bool is_integer() const noexcept { return exponent_ >= 0 || is_zero(); }

  // Smallest level k >= 0 with value * 2^k an integer.
  std::int64_t level() const noexcept { return exponent_ < 0 ? -exponent_ : 0; }

  Dyadic operator-() const;
  Dyadic& operator+=(const Dyadic& rhs);
  Dyadic& operator-=(const Dyadic& rhs);
  Dyadic& operator*=(const Dyadic& rhs);
  friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }
  friend Dyadic operator-(Dyadic a, const Dyadic& b) { return a -= b; }
  friend Dyadic operator*(Dyadic a, const Dyadic& b) { return a *= b; }

  friend bool operator==(const Dyadic& a, const Dyadic& b) noexcept {
    return a.exponent_ == b.exponent_ && a.mantissa_ == b.mantissa_;
  }
  friend std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b);

  // value * 2^k, exact.
  Dyadic shifted(std::int64_t k) const;
  Dyadic abs() const { return sign() < 0 ? -*this : *this; }

  BigInt floor() const;
  BigInt ceil() const;
  // Largest multiple of 2^-level that is <= value.
  Dyadic floor_to(std::int64_t level) const;
  // Nearest multiple of 2^-level (ties toward +inf); error <= 2^-(level+1).
  Dyadic round_to(std::int64_t level) const;
  // value - floor(value), in [0, 1).
  Dyadic frac() const;

  Rational to_rational() const;
  double to_double() const;

  // Exact decimal expansion, e.g. "-0.375".
  std::string to_decimal() const;
  // Round-trippable literal "m*2^e" (or just "m" when e == 0).
  std::string to_literal() const;
  static Dyadic parse(std::string_view text);

  // Floor of log2|value|; value must be nonzero.
  std::int64_t floor_log2() const;

 private:
  void canonicalize();

  BigInt mantissa_{0};
  std::int64_t exponent_{0};
};

std::ostream& operator<<(std::ostream& os, const Dyadic& d);

// Rational helpers shared by measures and estimators.
Rational make_rational(long long num, long long den = 1);
Rational parse_rational(std::string_view text);  // "3", "1/4", "0.25"
std::string rational_to_string(const Rational& q);
double rational_to_double(const Rational& q);
// Largest k with 2^k <= q (q > 0).
std::int64_t floor_log2(const Rational& q);

}  // namespace entropica
