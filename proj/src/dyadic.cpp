#include "entropica/dyadic.hpp"

#include "entropica/error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <charconv>
#include <cmath>
#include <ostream>

namespace entropica {

namespace mp = boost::multiprecision;

namespace {

// cpp_int reads a leading 0 as octal and accepts 0x; only plain decimal here.
BigInt decimal(std::string digits) {
  bool negative = !digits.empty() && digits.front() == '-';
  if (negative) digits.erase(0, 1);
  if (digits.empty() || digits.find_first_not_of("0123456789") != std::string::npos) {
    throw std::invalid_argument("not a decimal integer");
  }
  const auto nz = digits.find_first_not_of('0');
  BigInt v(nz == std::string::npos ? std::string("0") : digits.substr(nz));
  return negative ? BigInt(-v) : v;
}

}  // namespace

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::UnknownName: return "unknown-name";
    case ErrorCode::ConsistencyViolation: return "consistency-violation";
    case ErrorCode::PrecisionUnreachable: return "precision-unreachable";
    case ErrorCode::Boundary: return "boundary-point";
    case ErrorCode::ZeroMass: return "zero-mass";
    case ErrorCode::ZeroCylinder: return "zero-cylinder";
    case ErrorCode::ZeroCell: return "zero-cell";
    case ErrorCode::EmptyCell: return "empty-cell";
    case ErrorCode::SearchExhausted: return "search-exhausted";
    case ErrorCode::Unsupported: return "unsupported";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    case ErrorCode::Parse: return "parse";
  }
  return "unknown";
}

Dyadic::Dyadic(long long value) : mantissa_(value), exponent_(0) { canonicalize(); }

Dyadic::Dyadic(BigInt mantissa, std::int64_t exponent)
    : mantissa_(std::move(mantissa)), exponent_(exponent) {
  canonicalize();
}

Dyadic Dyadic::ratio(BigInt numerator, std::int64_t level) {
  return Dyadic(std::move(numerator), -level);
}

Dyadic Dyadic::pow2(std::int64_t exponent) { return Dyadic(BigInt(1), exponent); }

void Dyadic::canonicalize() {
  if (mantissa_.is_zero()) {
    exponent_ = 0;
    return;
  }
  const auto tz = static_cast<std::int64_t>(mp::lsb(mp::abs(mantissa_)));
  if (tz > 0) {
    mantissa_ >>= static_cast<unsigned>(tz);
    exponent_ += tz;
  }
}

Dyadic Dyadic::operator-() const {
  Dyadic r = *this;
  r.mantissa_ = -r.mantissa_;
  return r;
}

Dyadic& Dyadic::operator+=(const Dyadic& rhs) {
  if (rhs.is_zero()) return *this;
  if (is_zero()) return *this = rhs;
  if (exponent_ <= rhs.exponent_) {
    mantissa_ += rhs.mantissa_ << static_cast<unsigned>(rhs.exponent_ - exponent_);
  } else {
    mantissa_ = (mantissa_ << static_cast<unsigned>(exponent_ - rhs.exponent_)) + rhs.mantissa_;
    exponent_ = rhs.exponent_;
  }
  canonicalize();
  return *this;
}

Dyadic& Dyadic::operator-=(const Dyadic& rhs) { return *this += -rhs; }

Dyadic& Dyadic::operator*=(const Dyadic& rhs) {
  mantissa_ *= rhs.mantissa_;
  exponent_ += rhs.exponent_;
  canonicalize();
  return *this;
}

std::strong_ordering operator<=>(const Dyadic& a, const Dyadic& b) {
  const Dyadic diff = a - b;
  const int s = diff.sign();
  if (s < 0) return std::strong_ordering::less;
  if (s > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

Dyadic Dyadic::shifted(std::int64_t k) const {
  if (is_zero()) return *this;
  return Dyadic(mantissa_, exponent_ + k);
}

BigInt Dyadic::floor() const {
  if (exponent_ >= 0) return mantissa_ << static_cast<unsigned>(exponent_);
  const auto s = static_cast<unsigned>(-exponent_);
  // Arithmetic shift on negative cpp_int rounds toward zero; fix up.
  if (mantissa_.sign() >= 0) return mantissa_ >> s;
  BigInt q = -((-mantissa_) >> s);
  if ((q << s) != mantissa_) q -= 1;
  return q;
}

BigInt Dyadic::ceil() const { return -((-*this).floor()); }

Dyadic Dyadic::floor_to(std::int64_t level) const {
  if (this->level() <= level) return *this;
  return Dyadic(shifted(level).floor(), -level);
}

Dyadic Dyadic::round_to(std::int64_t level) const {
  if (this->level() <= level) return *this;
  const Dyadic half = Dyadic::pow2(-level - 1);
  return (*this + half).floor_to(level);
}

Dyadic Dyadic::frac() const { return *this - Dyadic(floor(), 0); }

Rational Dyadic::to_rational() const {
  if (exponent_ >= 0) return Rational(mantissa_ << static_cast<unsigned>(exponent_));
  return Rational(mantissa_, BigInt(1) << static_cast<unsigned>(-exponent_));
}

double Dyadic::to_double() const {
  if (is_zero()) return 0.0;
  // Keep the top 64 bits of the mantissa to avoid overflow in conversion.
  const auto bits = static_cast<std::int64_t>(mp::msb(mp::abs(mantissa_))) + 1;
  BigInt m = mantissa_;
  std::int64_t e = exponent_;
  if (bits > 64) {
    const auto drop = static_cast<unsigned>(bits - 64);
    m = (m.sign() < 0) ? BigInt(-((-m) >> drop)) : BigInt(m >> drop);
    e += drop;
  }
  return std::ldexp(m.convert_to<double>(), static_cast<int>(e));
}

std::string Dyadic::to_decimal() const {
  if (exponent_ >= 0) return BigInt(mantissa_ << static_cast<unsigned>(exponent_)).str();
  // m * 2^-k = m * 5^k / 10^k
  const auto k = static_cast<unsigned>(-exponent_);
  BigInt scaled = mp::abs(mantissa_) * mp::pow(BigInt(5), k);
  std::string digits = scaled.str();
  if (digits.size() <= k) digits.insert(0, k + 1 - digits.size(), '0');
  std::string out = digits.substr(0, digits.size() - k) + "." + digits.substr(digits.size() - k);
  if (mantissa_.sign() < 0) out.insert(0, 1, '-');
  return out;
}

std::string Dyadic::to_literal() const {
  if (exponent_ == 0) return mantissa_.str();
  return mantissa_.str() + "*2^" + std::to_string(exponent_);
}

Dyadic Dyadic::parse(std::string_view text) {
  auto fail = [&] { return Error(ErrorCode::Parse, "bad dyadic literal: " + std::string(text)); };
  if (text.empty()) throw fail();
  const auto star = text.find('*');
  std::int64_t exponent = 0;
  std::string_view mant = text;
  if (star != std::string_view::npos) {
    mant = text.substr(0, star);
    auto rest = text.substr(star + 1);
    if (rest.substr(0, 2) != "2^") throw fail();
    rest.remove_prefix(2);
    auto [ptr, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), exponent);
    if (ec != std::errc() || ptr != rest.data() + rest.size()) throw fail();
  }
  const auto dot = mant.find('.');
  if (dot != std::string_view::npos) {
    if (star != std::string_view::npos) throw fail();
    // Decimal input must be exactly dyadic.
    const Rational q = parse_rational(mant);
    const BigInt den = mp::denominator(q);
    if ((den & (den - 1)) != 0) throw fail();
    const auto k = static_cast<std::int64_t>(mp::msb(den));
    return Dyadic(mp::numerator(q), -k);
  }
  try {
    return Dyadic(decimal(std::string(mant)), exponent);
  } catch (const std::exception&) {
    throw fail();
  }
}

std::int64_t Dyadic::floor_log2() const {
  if (is_zero()) throw Error(ErrorCode::InvalidArgument, "floor_log2 of zero");
  return static_cast<std::int64_t>(mp::msb(mp::abs(mantissa_))) + exponent_;
}

std::ostream& operator<<(std::ostream& os, const Dyadic& d) { return os << d.to_decimal(); }

Rational make_rational(long long num, long long den) { return Rational(BigInt(num), BigInt(den)); }

Rational parse_rational(std::string_view text) {
  auto fail = [&] { return Error(ErrorCode::Parse, "bad rational: " + std::string(text)); };
  if (text.empty()) throw fail();
  try {
    const auto slash = text.find('/');
    if (slash != std::string_view::npos) {
      const BigInt num = decimal(std::string(text.substr(0, slash)));
      const BigInt den = decimal(std::string(text.substr(slash + 1)));
      if (den.is_zero()) throw fail();
      return Rational(num, den);
    }
    const auto dot = text.find('.');
    if (dot == std::string_view::npos) {
      return Rational(decimal(std::string(text)));
    }
    bool negative = !text.empty() && text.front() == '-';
    std::string whole(text.substr(negative ? 1 : 0, dot - (negative ? 1 : 0)));
    std::string fraction(text.substr(dot + 1));
    if (whole.empty()) whole = "0";
    if (fraction.empty()) fraction = "0";
    const BigInt num = decimal(whole + fraction);
    const BigInt den = mp::pow(BigInt(10), static_cast<unsigned>(fraction.size()));
    Rational q(num, den);
    return negative ? Rational(-q) : q;
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw fail();
  }
}

std::string rational_to_string(const Rational& q) {
  if (mp::denominator(q) == 1) return mp::numerator(q).str();
  return mp::numerator(q).str() + "/" + mp::denominator(q).str();
}

double rational_to_double(const Rational& q) {
  const BigInt& num = mp::numerator(q);
  const BigInt& den = mp::denominator(q);
  if (num.is_zero()) return 0.0;
  const auto nb = static_cast<std::int64_t>(mp::msb(mp::abs(num)));
  const auto db = static_cast<std::int64_t>(mp::msb(den));
  // Scale to ~64 significant bits before dividing.
  const std::int64_t shift = 64 - (nb - db);
  BigInt scaled = shift >= 0 ? BigInt((num << static_cast<unsigned>(shift)) / den)
                             : BigInt(num / (den << static_cast<unsigned>(-shift)));
  return std::ldexp(scaled.convert_to<double>(), static_cast<int>(-shift));
}

std::int64_t floor_log2(const Rational& q) {
  if (q <= 0) throw Error(ErrorCode::InvalidArgument, "floor_log2 of nonpositive rational");
  const BigInt& num = mp::numerator(q);
  const BigInt& den = mp::denominator(q);
  auto k = static_cast<std::int64_t>(mp::msb(num)) - static_cast<std::int64_t>(mp::msb(den));
  // 2^k <= q  <=>  den * 2^k <= num
  auto le = [&](std::int64_t e) {
    return e >= 0 ? (den << static_cast<unsigned>(e)) <= num
                  : den <= (num << static_cast<unsigned>(-e));
  };
  while (!le(k)) --k;
  while (le(k + 1)) ++k;
  return k;
}

}  // namespace entropica
