#include <doctest.h>

#include "entropica/error.hpp"
#include "entropica/space.hpp"

#include <random>
#include <set>

using namespace entropica;

namespace {

IdealPoint at(std::initializer_list<Dyadic> coords) { return IdealPoint{coords, {}}; }
IdealPoint bits(std::initializer_list<std::uint8_t> b) { return IdealPoint{{}, b}; }
Dyadic frac(long long k, int level) { return Dyadic::ratio(BigInt(k), level); }

}  // namespace

TEST_CASE("index pairing is a bijection on the first indices") {
  for (const char* name : {"cantor", "interval", "circle", "torus2", "torus3", "nonneg_reals"}) {
    auto space = builtin_space(name);
    for (std::uint64_t i = 0; i < 3000; ++i) {
      const IdealPoint p = space->ideal(i);
      auto back = space->index_of(p);
      REQUIRE(back.has_value());
      CHECK(*back == i);
    }
  }
  CHECK(builtin_space("interval")->ideal(2).coords[0] == frac(1, 1));
  CHECK(builtin_space("interval")->ideal(5).coords[0] == frac(1, 3));
  CHECK(builtin_space("cantor")->ideal(4).bits == std::vector<std::uint8_t>{0, 1});
  for (std::uint64_t z = 0; z < 5000; ++z) {
    auto [a, b] = cantor_unpair(z);
    CHECK(cantor_pair(a, b) == z);
  }
}

TEST_CASE("distance examples") {
  auto interval = builtin_space("interval");
  const Point x = Point::exact(interval, at({0}));
  CHECK(distance(x, x).approx(20) == Dyadic(0));
  const Point half = Point::exact(interval, at({frac(1, 1)}));
  for (int n = 0; n <= 20; ++n) CHECK(distance(x, half).approx(n) == frac(1, 1));
  CHECK(interval->ideal_distance(at({0}), at({1})).exact() == Dyadic(1));

  auto cantor = builtin_space("cantor");
  CHECK(*cantor->ideal_distance(bits({0, 0, 0}), bits({0, 0, 1})).exact() == frac(1, 2));
  CHECK(*cantor->ideal_distance(bits({}), bits({1})).exact() == Dyadic(1));

  auto torus = builtin_space("torus2");
  CHECK(*torus->ideal_distance(at({0, 0}), at({frac(15, 4), 0})).exact() == frac(1, 4));
}

TEST_CASE("distance between approximated points") {
  auto interval = builtin_space("interval");
  const Point third = Point::from_reals(interval, {Real::from_rational(make_rational(1, 3))});
  const Point zero = Point::ideal(interval, 0);
  const Real d = distance(third, zero);
  for (int n = 0; n <= 30; ++n) {
    Rational gap = d.approx(n).to_rational() - make_rational(1, 3);
    if (gap < 0) gap = -gap;
    CHECK(gap <= Dyadic::pow2(-n).to_rational());
  }
}

TEST_CASE("ball membership examples") {
  auto interval = builtin_space("interval");
  const Ball b = Ball::around(*interval, at({frac(1, 1)}), Real(frac(1, 2)));
  CHECK(ball_membership(Point::exact(interval, at({frac(1, 1)})), b, 4) == Membership::Inside);
  const Ball far = Ball::around(*interval, at({frac(3, 2)}), Real(frac(1, 3)));
  CHECK(ball_membership(Point::exact(interval, at({0})), far, 8) == Membership::Outside);
  const Ball edge = Ball::around(*interval, at({frac(1, 2)}), Real(frac(1, 2)));
  CHECK(ball_membership(Point::exact(interval, at({frac(1, 1)})), edge, 30) == Membership::Unknown);
}

TEST_CASE("cantor cells are cylinders") {
  auto cantor = builtin_space("cantor");
  auto cells = cantor->dyadic_cells(3);
  REQUIRE(cells.size() == 8);
  const Point p = Point::exact(cantor, bits({1, 0, 1, 1, 1}));
  int inside = 0;
  for (auto& c : cells) {
    const auto m = ball_membership(p, c, 20);
    CHECK(m != Membership::Unknown);
    if (m == Membership::Inside) {
      ++inside;
      CHECK(c.center_point.bits == std::vector<std::uint8_t>{1, 0, 1});
    }
  }
  CHECK(inside == 1);
}

TEST_CASE("ball containment certificate") {
  auto interval = builtin_space("interval");
  const Ball big = Ball::around(*interval, at({frac(1, 1)}), Real(frac(1, 1)));
  const Ball small = Ball::around(*interval, at({frac(1, 2)}), Real(frac(1, 2)));
  CHECK(ball_contains(*interval, big, small, 20));
  CHECK_FALSE(ball_contains(*interval, small, big, 20));
}

TEST_CASE("property: metric axioms at precision") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::uint64_t> idx(0, 5000);
  for (const char* name : {"cantor", "interval", "circle", "torus2", "torus3", "nonneg_reals"}) {
    auto space = builtin_space(name);
    for (int trial = 0; trial < 200; ++trial) {
      const auto i = idx(rng), j = idx(rng), k = idx(rng);
      CHECK(space->distance(i, i).approx(16) == Dyadic(0));
      CHECK(space->distance(i, j).approx(16) == space->distance(j, i).approx(16));
      for (int n = 0; n <= 16; n += 4) {
        CHECK(space->distance(i, k).approx(n) <=
              space->distance(i, j).approx(n) + space->distance(j, k).approx(n) + Dyadic::pow2(-n) * Dyadic(3));
      }
    }
  }
}

TEST_CASE("property: membership decisions agree with exact oracle") {
  std::mt19937_64 rng(5);
  auto interval = builtin_space("interval");
  std::uniform_int_distribution<long long> k(0, 256);
  for (int trial = 0; trial < 500; ++trial) {
    const Dyadic c = frac(k(rng), 8), r = frac(k(rng) + 1, 9), x = frac(k(rng), 8);
    const Ball b = Ball::around(*interval, at({c}), Real(r));
    const auto m = ball_membership(Point::exact(interval, at({x})), b, 12);
    const Dyadic d = (x - c).abs();
    if (m == Membership::Inside) CHECK(d < r);
    if (m == Membership::Outside) CHECK(d > r);
  }
}

TEST_CASE("property: density witness") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (const char* name : {"cantor", "interval", "circle", "torus2", "torus3", "nonneg_reals"}) {
    auto space = builtin_space(name);
    for (int trial = 0; trial < 5; ++trial) {
      Point x = Point::exact(space, {});
      if (std::string(name) == "cantor") {
        IdealPoint p;
        for (int i = 0; i < 40; ++i) p.bits.push_back(u(rng) < 0.5);
        x = Point::exact(space, p);
      } else {
        const int dim = std::string(name) == "torus2" ? 2 : std::string(name) == "torus3" ? 3 : 1;
        std::vector<Real> coords;
        for (int c = 0; c < dim; ++c) coords.push_back(Real::from_rational(make_rational(static_cast<long long>(u(rng) * 1e6), 999983)));
        x = Point::from_reals(space, coords);
      }
      for (int m = 0; m <= 12; ++m) {
        auto idx = nearby_ideal(x, m);
        REQUIRE(idx.has_value());
        CHECK(distance(x, Point::ideal(space, *idx)).upper(m + 4) <= Dyadic::pow2(-m));
      }
    }
  }
}

TEST_CASE("unknown space") {
  CHECK_THROWS_AS(builtin_space("hilbert"), Error);
}
