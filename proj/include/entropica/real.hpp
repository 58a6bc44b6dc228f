#pragma once

#include "entropica/dyadic.hpp"

#include <functional>
#include <memory>
#include <optional>

namespace entropica {

// A computable real given by a fast Cauchy approximator: approx(n) is a
// dyadic within 2^-n of the value. Approximations are memoized per
// instance; copies share the cache, and cache updates are mutex-guarded.
class Real {
 public:
  using Approximator = std::function<Dyadic(std::int64_t)>;

  Real();  // zero
  Real(Dyadic exact);  // NOLINT(google-explicit-constructor)
  Real(long long exact) : Real(Dyadic(exact)) {}  // NOLINT(google-explicit-constructor)

  static Real from_approximator(Approximator f);
  // floor(q * 2^n) / 2^n
  static Real from_rational(const Rational& q);
  // sqrt(k) for a nonnegative integer k, by integer square roots.
  static Real sqrt_of(unsigned long long k);

  // Throws ErrorCode::ConsistencyViolation when the approximator contradicts
  // a cached value by more than 2^-n + 2^-m.
  Dyadic approx(std::int64_t n) const;

  // Certified bounds, monotone in n (tightest seen over precisions <= n).
  Dyadic lower(std::int64_t n) const;
  Dyadic upper(std::int64_t n) const;

  // Set when the value is a known dyadic (constants and exact combinations).
  const std::optional<Dyadic>& exact() const;

  // Smallest k with |x| <= 2^k, from the precision-0 approximation.
  std::int64_t magnitude_bound() const;

  friend Real operator+(const Real& a, const Real& b);
  friend Real operator-(const Real& a, const Real& b);
  friend Real operator*(const Real& a, const Real& b);
  Real operator-() const;
  // value * 2^k
  Real scaled_pow2(std::int64_t k) const;

 private:
  struct Impl;
  explicit Real(std::shared_ptr<Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<Impl> impl_;
};

enum class Apart { Less, Greater, Indistinguishable };

// Decisive only when the approximations at precision n certify
// |x - y| > 2^-(n-1); never wrong when decisive.
Apart compare_apart(const Real& x, const Real& y, std::int64_t n);

}  // namespace entropica
