#include "entropica/real.hpp"

#include "entropica/error.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace entropica {

namespace mp = boost::multiprecision;

struct Real::Impl {
  Approximator approximator;
  std::optional<Dyadic> exact;
  mutable std::mutex mutex;
  mutable std::map<std::int64_t, Dyadic> cache;
  mutable std::map<std::int64_t, Dyadic> lower_seen;
  mutable std::map<std::int64_t, Dyadic> upper_seen;
};

namespace {

bool consistent(const Dyadic& a, std::int64_t n, const Dyadic& b, std::int64_t m) {
  return (a - b).abs() <= Dyadic::pow2(-n) + Dyadic::pow2(-m);
}

}  // namespace

Real::Real() : Real(Dyadic(0)) {}

Real::Real(Dyadic exact) : impl_(std::make_shared<Impl>()) {
  impl_->exact = exact;
  impl_->approximator = [v = std::move(exact)](std::int64_t) { return v; };
}

Real Real::from_approximator(Approximator f) {
  auto impl = std::make_shared<Impl>();
  impl->approximator = std::move(f);
  return Real(std::move(impl));
}

Real Real::from_rational(const Rational& q) {
  const BigInt num = mp::numerator(q);
  const BigInt den = mp::denominator(q);
  if ((den & (den - 1)) == 0) {
    return Real(Dyadic(num, -static_cast<std::int64_t>(mp::msb(den))));
  }
  return from_approximator([num, den](std::int64_t n) {
    const std::int64_t k = std::max<std::int64_t>(n, 0);
    BigInt scaled = num << static_cast<unsigned>(k);
    // floor division for negative numerators
    BigInt quotient = scaled / den;
    if (scaled.sign() < 0 && quotient * den != scaled) quotient -= 1;
    return Dyadic(quotient, -k);
  });
}

Real Real::sqrt_of(unsigned long long k) {
  return from_approximator([k](std::int64_t n) {
    const std::int64_t p = std::max<std::int64_t>(n, 0);
    // floor(sqrt(k * 4^p)) / 2^p is within 2^-p of sqrt(k).
    const BigInt scaled = BigInt(k) << static_cast<unsigned>(2 * p);
    return Dyadic(mp::sqrt(scaled), -p);
  });
}

Dyadic Real::approx(std::int64_t n) const {
  {
    std::lock_guard lock(impl_->mutex);
    if (auto it = impl_->cache.find(n); it != impl_->cache.end()) return it->second;
  }
  Dyadic q = impl_->approximator(n);
  std::lock_guard lock(impl_->mutex);
  auto& cache = impl_->cache;
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  // Check against the neighbouring cached precisions.
  auto above = cache.lower_bound(n);
  if (above != cache.end() && !consistent(q, n, above->second, above->first)) {
    throw Error(ErrorCode::ConsistencyViolation,
                "approximation at precision " + std::to_string(n) +
                    " contradicts cached precision " + std::to_string(above->first));
  }
  if (above != cache.begin()) {
    auto below = std::prev(above);
    if (!consistent(q, n, below->second, below->first)) {
      throw Error(ErrorCode::ConsistencyViolation,
                  "approximation at precision " + std::to_string(n) +
                      " contradicts cached precision " + std::to_string(below->first));
    }
  }
  cache.emplace(n, q);
  return q;
}

Dyadic Real::lower(std::int64_t n) const {
  if (impl_->exact) return *impl_->exact;
  Dyadic best = approx(n) - Dyadic::pow2(-n);
  std::lock_guard lock(impl_->mutex);
  auto& seen = impl_->lower_seen;
  auto it = seen.upper_bound(n);
  if (it != seen.begin() && std::prev(it)->second > best) best = std::prev(it)->second;
  seen[n] = best;
  return best;
}

Dyadic Real::upper(std::int64_t n) const {
  if (impl_->exact) return *impl_->exact;
  Dyadic best = approx(n) + Dyadic::pow2(-n);
  std::lock_guard lock(impl_->mutex);
  auto& seen = impl_->upper_seen;
  auto it = seen.upper_bound(n);
  if (it != seen.begin() && std::prev(it)->second < best) best = std::prev(it)->second;
  seen[n] = best;
  return best;
}

const std::optional<Dyadic>& Real::exact() const { return impl_->exact; }

std::int64_t Real::magnitude_bound() const {
  // |x| <= |q0| + 1 < 2^ceil(log2(|q0| + 2))
  const Dyadic bound = approx(0).abs() + Dyadic(2);
  const std::int64_t fl = bound.floor_log2();
  return Dyadic::pow2(fl) == bound ? fl : fl + 1;
}

Real operator+(const Real& a, const Real& b) {
  if (a.exact() && b.exact()) return Real(*a.exact() + *b.exact());
  if (a.exact() && a.exact()->is_zero()) return b;
  if (b.exact() && b.exact()->is_zero()) return a;
  return Real::from_approximator([a, b](std::int64_t n) {
    return (a.approx(n + 2) + b.approx(n + 2)).round_to(n + 1);
  });
}

Real Real::operator-() const {
  if (exact()) return Real(-*exact());
  Real self = *this;
  return from_approximator([self](std::int64_t n) { return -self.approx(n); });
}

Real operator-(const Real& a, const Real& b) { return a + (-b); }

Real operator*(const Real& a, const Real& b) {
  if (a.exact() && b.exact()) return Real(*a.exact() * *b.exact());
  if ((a.exact() && a.exact()->is_zero()) || (b.exact() && b.exact()->is_zero())) return Real();
  return Real::from_approximator([a, b](std::int64_t n) {
    // |ab - pq| <= |a||b - q| + |q||a - p| with |a| <= 2^ka, |q| <= 2^kb.
    const std::int64_t ka = a.magnitude_bound();
    const std::int64_t kb = b.magnitude_bound() + 1;
    const Dyadic q = b.approx(n + ka + 2);
    const Dyadic p = a.approx(n + kb + 2);
    return (p * q).round_to(n + 1);
  });
}

Real Real::scaled_pow2(std::int64_t k) const {
  if (exact()) return Real(exact()->shifted(k));
  Real self = *this;
  return from_approximator([self, k](std::int64_t n) { return self.approx(n + k).shifted(k); });
}

Apart compare_apart(const Real& x, const Real& y, std::int64_t n) {
  if (x.exact() && y.exact()) {
    // Exact operands: decisive once the gap exceeds the threshold.
    const Dyadic gap = *x.exact() - *y.exact();
    if (gap.abs() <= Dyadic::pow2(-n + 1)) return Apart::Indistinguishable;
    return gap.sign() < 0 ? Apart::Less : Apart::Greater;
  }
  const Dyadic gap = x.approx(n) - y.approx(n);
  const Dyadic threshold = Dyadic::pow2(-n + 1);
  if (gap > threshold) return Apart::Greater;
  if (gap < -threshold) return Apart::Less;
  return Apart::Indistinguishable;
}

}  // namespace entropica
