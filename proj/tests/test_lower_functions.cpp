#include <doctest.h>

#include "entropica/lower_function.hpp"

#include <random>
#include <set>

using namespace entropica;

namespace {

Dyadic frac(long long k, int level) { return Dyadic::ratio(BigInt(k), level); }

Ball iball(const Dyadic& c, const Dyadic& r) {
  return Ball::around(*builtin_space("interval"), IdealPoint{{c}, {}}, Real(r));
}

bool in_ball(const Rational& x, const Ball& b) {
  Rational g = x - b.center_point.coords[0].to_rational();
  if (g < 0) g = -g;
  return g < b.radius.exact()->to_rational();
}

// Exact integral of sup_i r_i [B_i] over U (or [0,1]) by splitting [0,1] at
// every ball endpoint and evaluating the integrand at segment midpoints.
Rational piecewise_oracle(const std::vector<StepPair>& pairs, const std::vector<Ball>* u) {
  std::set<Rational> cuts{Rational(0), Rational(1)};
  auto add = [&](const Ball& b) {
    for (int s : {-1, 1}) {
      Rational e = b.center_point.coords[0].to_rational() + s * b.radius.exact()->to_rational();
      if (e > 0 && e < 1) cuts.insert(e);
    }
  };
  for (auto& p : pairs) add(p.ball);
  if (u) for (auto& b : *u) add(b);
  Rational total = 0;
  for (auto it = cuts.begin(); std::next(it) != cuts.end(); ++it) {
    const Rational a = *it, b = *std::next(it), mid = (a + b) / 2;
    if (u && std::none_of(u->begin(), u->end(), [&](const Ball& ub) { return in_ball(mid, ub); })) continue;
    Rational v = 0;
    for (auto& p : pairs) {
      if (in_ball(mid, p.ball) && p.value > v) v = p.value;
    }
    total += v * (b - a);
  }
  return total;
}

}  // namespace

TEST_CASE("eval_lower examples") {
  auto space = builtin_space("interval");
  const Point half = Point::exact(space, IdealPoint{{frac(1, 1)}, {}});
  CHECK(eval_lower(LowerFunction{}, half, 10) == 0);
  const auto whole = LowerFunction::finite({{iball(frac(1, 1), Dyadic(2)), Rational(3)}});
  CHECK(eval_lower(whole, half, 1) == 3);
  const auto indicator = LowerFunction::finite({{iball(frac(1, 1), frac(1, 2)), Rational(1)}});
  CHECK(eval_lower(indicator, half, 4) == 1);
  CHECK(eval_lower(indicator, half, 0) == 0);
}

TEST_CASE("integration examples") {
  auto leb = builtin_measure("lebesgue_interval");
  CHECK(integrate(LowerFunction{}, *leb, 10) == 0);
  const auto one = LowerFunction::finite({{iball(frac(1, 1), Dyadic(1)), Rational(1)}});
  CHECK(integrate(one, *leb, 4) == 1);
  const auto steps = LowerFunction::finite(
      {{iball(frac(1, 2), frac(1, 2)), Rational(1)}, {iball(frac(1, 1), frac(1, 1)), make_rational(1, 2)}});
  CHECK(integrate(steps, *leb, 8) == make_rational(3, 4));

  auto cantor = uniform_cantor();
  const Ball cyl0 = Ball::around(*cantor->space(), IdealPoint{{}, {0}}, Real(frac(3, 2)));
  CHECK(integrate(LowerFunction::finite({{cyl0, Rational(2)}}), *cantor, 4) == 1);
}

TEST_CASE("integration over an open set uses refinement cells") {
  auto leb = builtin_measure("lebesgue_interval");
  const auto one = LowerFunction::finite({{iball(frac(1, 1), Dyadic(1)), Rational(1)}});
  const auto u = EnumerableOpenSet::finite({iball(frac(1, 2), frac(1, 2))});
  CHECK(integrate_open(one, u, *leb, 10) == make_rational(1, 2));

  auto cantor = uniform_cantor();
  const Ball cyl01 = Ball::around(*cantor->space(), IdealPoint{{}, {0, 1}}, Real(frac(3, 3)));
  const Ball whole = Ball::around(*cantor->space(), IdealPoint{}, Real(2));
  const auto f = LowerFunction::finite({{whole, Rational(4)}});
  CHECK(integrate_open(f, EnumerableOpenSet::finite({cyl01}), *cantor, 8) == 1);
}

TEST_CASE("property: monotone in effort and bounded by a test") {
  auto cantor = uniform_cantor();
  // t = sup_n 2^(n-1) on the cylinder 0^(2n); its integral is 3/8.
  auto t = LowerFunction::enumerated([&](std::size_t i) -> std::optional<StepPair> {
    const std::size_t n = i + 1;
    if (n > 20) return std::nullopt;
    IdealPoint c;
    c.bits.assign(2 * n, 0);
    const Ball b = Ball::around(*cantor->space(), c, Real(frac(3, static_cast<int>(2 * n) + 1)));
    return StepPair{b, Dyadic::pow2(static_cast<std::int64_t>(n) - 1).to_rational()};
  });
  Rational prev = 0;
  for (int e = 0; e <= 44; ++e) {
    const Rational v = integrate(t, *cantor, e);
    CHECK(v >= prev);
    CHECK(v <= 1 + Dyadic::pow2(-8).to_rational());
    prev = v;
  }
  CHECK(prev > make_rational(3, 8) - Dyadic::pow2(-10).to_rational());
}

TEST_CASE("property: recursion matches the piecewise oracle") {
  std::mt19937_64 rng(17);
  auto leb = builtin_measure("lebesgue_interval");
  std::uniform_int_distribution<long long> c(0, 64), r(1, 32), v(1, 16), count(1, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<StepPair> pairs;
    const auto n = count(rng);
    for (int i = 0; i < n; ++i) pairs.push_back({iball(frac(c(rng), 6), frac(r(rng), 6)), make_rational(v(rng), 4)});
    const bool with_u = trial % 2 == 1;
    std::vector<Ball> u_balls;
    if (with_u) u_balls = {iball(frac(c(rng), 6), frac(r(rng), 6))};
    const Rational exact = piecewise_oracle(pairs, with_u ? &u_balls : nullptr);
    const auto u = with_u ? EnumerableOpenSet::finite(u_balls) : EnumerableOpenSet::whole_space();
    const Rational got = integrate_open(LowerFunction::finite(pairs), u, *leb, 24);
    CHECK(got <= exact);
    CHECK(exact - got <= Dyadic::pow2(-10).to_rational());
    CHECK(integrate_open(LowerFunction::finite(pairs), u, *leb, 12) <= got);
  }
}
