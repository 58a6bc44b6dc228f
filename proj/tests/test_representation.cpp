#include <doctest.h>

#include "entropica/error.hpp"
#include "entropica/representation.hpp"

#include <map>
#include <random>

using namespace entropica;

namespace {

Dyadic frac(long long k, int level) { return Dyadic::ratio(BigInt(k), level); }

Point inexact(SpacePtr space, std::vector<Dyadic> coords) {
  std::vector<Real> reals;
  for (auto& c : coords) reals.push_back(Real::from_approximator([c](std::int64_t) { return c; }));
  return Point::from_reals(std::move(space), std::move(reals));
}

// Exact Lebesgue mass of the cell of a basis representation on the interval,
// from the sorted ball endpoints.
Rational interval_cell_oracle(const Basis& basis, const Bits& bits) {
  std::vector<Rational> cuts{0, 1};
  auto space = builtin_space("interval");
  for (auto& b : basis.balls) {
    const Rational c = space->ideal(b.center).coords[0].to_rational(), r = b.radius.to_rational();
    for (const Rational& e : {Rational(c - r), Rational(c + r)}) {
      if (e > 0 && e < 1) cuts.push_back(e);
    }
  }
  std::sort(cuts.begin(), cuts.end());
  Rational total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Rational mid = (cuts[i] + cuts[i + 1]) / 2;
    bool match = true;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      const auto& b = basis.balls[k];
      Rational g = mid - space->ideal(b.center).coords[0].to_rational();
      if (g < 0) g = -g;
      match = match && ((g < b.radius.to_rational()) == (bits[k] == 1));
    }
    if (match) total += cuts[i + 1] - cuts[i];
  }
  return total;
}

}  // namespace

TEST_CASE("identity representation") {
  auto repr = identity_representation(uniform_cantor());
  const Point x = Point::exact(builtin_space("cantor"), IdealPoint{{}, {1, 0, 1}});
  CHECK(*repr->encode(x, 5, 0) == Bits{1, 0, 1, 0, 0});
  CHECK(repr->decode({1, 1}, 0).exact()->bits == Bits{1, 1});
  CHECK(repr->cylinder_bounds({}, 8).lower == 1);
  CHECK(repr->cylinder_bounds({0, 1, 1}, 8).upper == make_rational(1, 8));
  const auto logs = repr->cylinder_neg_log2({0, 1, 1, 0}, 4, 8);
  CHECK(logs[3] == 4.0);
}

TEST_CASE("dyadic representation digits") {
  auto leb = builtin_measure("lebesgue_interval");
  auto repr = dyadic_representation(leb);
  auto interval = builtin_space("interval");
  CHECK(*repr->encode(Point::exact(interval, IdealPoint{{frac(1, 3)}, {}}), 4, 20) == Bits{0, 0, 1, 0});
  CHECK(*repr->encode(Point::exact(interval, IdealPoint{{Dyadic(1)}, {}}), 3, 20) == Bits{1, 1, 1});
  CHECK_FALSE(repr->encode(inexact(interval, {frac(1, 1)}), 2, 20).has_value());
  CHECK(*repr->encode(inexact(interval, {frac(3, 3)}), 2, 20) == Bits{0, 1});
  CHECK(repr->cylinder_bounds({1, 0, 1}, 8).lower == make_rational(1, 8));
  CHECK(repr->decode({1, 0}, 8).exact()->coords[0] == frac(5, 3));
  CHECK(repr->decode({}, 8).exact()->coords[0] == Dyadic(0));

  auto torus = builtin_space("torus2");
  auto trepr = dyadic_representation(builtin_measure("lebesgue_torus2"));
  CHECK(*trepr->encode(Point::exact(torus, IdealPoint{{frac(1, 1), frac(1, 2)}, {}}), 4, 20) == Bits{1, 0, 0, 1});
  CHECK(trepr->cell_diameter({1, 0, 0}) == make_rational(1, 2));
  CHECK(trepr->cell_diameter({1, 0, 0, 1}) == make_rational(1, 4));
  const auto logs = trepr->cylinder_neg_log2(Bits(40, 1), 40, 8);
  for (std::size_t n = 0; n < logs.size(); ++n) CHECK(logs[n] == static_cast<double>(n + 1));

  // Mixed exact and computed coordinates.
  const Point mixed = Point::from_reals(torus, {Real(0), Real::sqrt_of(2) - Real(1)});
  CHECK(*trepr->encode(mixed, 6, 30) == Bits{0, 0, 0, 1, 0, 1});
}

TEST_CASE("dyadic representation without a box formula") {
  auto interval = builtin_space("interval");
  auto mix = sum({builtin_measure("lebesgue_interval"), atomic(interval, {{{*interval->index_of({{frac(1, 3)}, {}}),
                                                                           make_rational(1, 2)}}})});
  auto repr = dyadic_representation(mix);
  const Bracket b = repr->cylinder_bounds({0, 0}, 20);
  CHECK(b.lower <= make_rational(3, 4));
  CHECK(b.upper >= make_rational(3, 4));
  CHECK(b.width() < make_rational(1, 1000));
  const Bracket other = repr->cylinder_bounds({1, 1}, 20);
  CHECK(other.lower <= make_rational(1, 4));
  CHECK(other.upper >= make_rational(1, 4));
}

TEST_CASE("basis construction examples") {
  auto interval = builtin_space("interval");
  auto leb = builtin_measure("lebesgue_interval");
  const Basis plain = build_basis(interval, *leb, nullptr, 3, 8);
  REQUIRE(plain.balls.size() == 3);
  CHECK(plain.balls[2].center == 2);
  CHECK(plain.balls[2].radius == frac(1, 2));

  const auto atom_at = [&](const Dyadic& x) {
    return atomic(interval, {{{*interval->index_of({{x}, {}}), Rational(1)}}});
  };
  auto heavy = normalize(sum({leb, atom_at(frac(3, 2))}));
  CHECK_FALSE(admissible_radius(*interval, 2, frac(1, 2), {heavy.get()}, 4, 16));
  const Basis avoiding = build_basis(interval, *heavy, nullptr, 3, 4);
  const Dyadic r = avoiding.balls[2].radius;
  CHECK(r != frac(1, 2));
  CHECK((r - frac(1, 2)).abs() <= frac(1, 3));

  auto nu = atom_at(frac(1, 2));
  const Basis dual = build_basis(interval, *leb, nu.get(), 3, 4);
  CHECK(dual.balls[2].radius != frac(1, 2));
  for (auto& b : dual.balls) {
    CHECK(admissible_radius(*interval, b.center, b.radius, {leb.get(), nu.get()}, 4, 16));
  }
  CHECK_THROWS_AS(build_basis(interval, *leb, nullptr, 3, 1u << 30, 2), Error);
}

TEST_CASE("basis serialization round trip") {
  const Basis basis = build_basis(builtin_space("torus2"), *builtin_measure("lebesgue_torus2"), nullptr, 6, 16);
  const std::string text = serialize_basis(basis);
  CHECK(text.rfind("entropica-basis 1\nspace torus2\n", 0) == 0);
  const Basis back = parse_basis(text);
  REQUIRE(back.balls.size() == basis.balls.size());
  for (std::size_t i = 0; i < back.balls.size(); ++i) {
    CHECK(back.balls[i].center == basis.balls[i].center);
    CHECK(back.balls[i].radius == basis.balls[i].radius);
  }
  CHECK(serialize_basis(back) == text);
  CHECK_THROWS_AS(parse_basis("entropica-basis 2\nspace x\n"), Error);
  CHECK_THROWS_AS(parse_basis("entropica-basis 1\nspace interval\n1 0.5\n"), Error);
}

TEST_CASE("basis representation encode and decode") {
  auto interval = builtin_space("interval");
  auto leb = builtin_measure("lebesgue_interval");
  const Basis basis = build_basis(interval, *leb, nullptr, 8, 64);
  auto repr = basis_representation(leb, basis);
  // A center is inside its own ball.
  for (std::size_t k = 0; k < 8; ++k) {
    const auto bits = repr->encode(Point::ideal(interval, basis.balls[k].center), 8, 30);
    REQUIRE(bits.has_value());
    CHECK((*bits)[k] == 1);
  }
  // On a sphere the bit is undecidable.
  const Dyadic edge = interval->ideal(basis.balls[2].center).coords[0] + basis.balls[2].radius;
  CHECK_FALSE(repr->encode(inexact(interval, {edge}), 8, 30).has_value());
  CHECK(repr->decode({}, 8).exact()->coords[0] == Dyadic(0));
  CHECK(repr->cylinder_bounds({}, 8).lower == 1);

  // Child masses add up to the parent mass.
  for (const Bits& parent : {Bits{}, Bits{1}, Bits{0, 1}, Bits{1, 0, 1}}) {
    Bits zero = parent, one = parent;
    zero.push_back(0);
    one.push_back(1);
    const Bracket p = repr->cylinder_bounds(parent, 24), a = repr->cylinder_bounds(zero, 24),
                  b = repr->cylinder_bounds(one, 24);
    CHECK(a.lower + b.lower <= p.upper);
    CHECK(a.upper + b.upper >= p.lower);
  }
}

TEST_CASE("contradictory bits name an empty cell") {
  auto interval = builtin_space("interval");
  auto leb = builtin_measure("lebesgue_interval");
  Basis basis{"interval", {{3, frac(1, 4), 1, 16}, {4, frac(1, 4), 1, 16}}};  // B(1/4, 1/16), B(3/4, 1/16)
  basis.balls[0].radius = frac(1, 4);
  basis.balls[1].radius = frac(1, 4);
  auto repr = basis_representation(leb, basis);
  CHECK_THROWS_AS(repr->decode({1, 1}, 8), Error);
  try {
    repr->decode({1, 1}, 8);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCell);
  }
}

TEST_CASE("property: cylinder bounds match an interval oracle") {
  auto interval = builtin_space("interval");
  auto leb = builtin_measure("lebesgue_interval");
  const Basis basis = build_basis(interval, *leb, nullptr, 6, 64);
  auto repr = basis_representation(leb, basis);
  for (std::uint32_t v = 0; v < 64; ++v) {
    Bits bits(6);
    for (int k = 0; k < 6; ++k) bits[k] = (v >> k) & 1U;
    const Rational exact = interval_cell_oracle(basis, bits);
    const Bracket b = repr->cylinder_bounds(bits, 24);
    CHECK(b.lower <= exact);
    CHECK(exact <= b.upper);
    CHECK(b.width() < make_rational(1, 10000));
  }
}

TEST_CASE("property: round trip and sample frequencies") {
  auto interval = builtin_space("interval");
  auto leb = builtin_measure("lebesgue_interval");
  auto repr = basis_representation(leb, build_basis(interval, *leb, nullptr, 8, 256));
  std::map<Bits, int> counts;
  const int samples = 20000;
  int boundary = 0;
  for (int i = 0; i < samples; ++i) {
    const Point x = leb->sample(99, static_cast<std::uint64_t>(i));
    const auto bits = repr->encode(x, 8, 24);
    if (!bits) {
      ++boundary;
      continue;
    }
    ++counts[*bits];
    if (i < 200) {
      const Point y = repr->decode(*bits, 12);
      CHECK(*repr->encode(y, 8, 24) == *bits);
      const Rational d = distance(x, y).upper(30).to_rational();
      CHECK(d <= repr->cell_diameter(*bits) + Dyadic::pow2(-28).to_rational());
    }
  }
  CHECK(boundary == 0);
  double l1 = 0;
  for (std::uint32_t v = 0; v < 256; ++v) {
    Bits bits(8);
    for (int k = 0; k < 8; ++k) bits[k] = (v >> k) & 1U;
    const double expected = rational_to_double(repr->cylinder_bounds(bits, 24).midpoint());
    const auto it = counts.find(bits);
    const double seen = it == counts.end() ? 0.0 : static_cast<double>(it->second) / samples;
    l1 += std::abs(seen - expected);
  }
  CHECK(l1 < 0.05);
}

TEST_CASE("named representations") {
  CHECK(builtin_representation("identity", uniform_cantor())->name() == "identity");
  CHECK(builtin_representation("dyadic", builtin_measure("lebesgue_circle"))->name() == "dyadic");
  CHECK(builtin_representation("basis:4:8", builtin_measure("lebesgue_interval"))->name() == "basis");
  CHECK_THROWS_AS(builtin_representation("gray", uniform_cantor()), Error);
  CHECK_THROWS_AS(builtin_representation("dyadic", uniform_cantor()), Error);
}
