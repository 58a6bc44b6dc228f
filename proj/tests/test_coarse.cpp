#include <doctest.h>

#include "entropica/coarse.hpp"
#include "entropica/error.hpp"

#include <cmath>

using namespace entropica;

namespace {

Dyadic frac(long long k, int level) { return Dyadic::ratio(BigInt(k), level); }

Point at(const SpacePtr& space, const Dyadic& x) { return Point::exact(space, IdealPoint{{x}, {}}); }

// K^(i | condition) computed from the emitted codeword.
std::size_t index_code(std::uint64_t i, const std::string& condition) {
  const Bits cond = to_bits(condition);
  return codec::encode_default(to_bits(i), &cond).size();
}

}  // namespace

TEST_CASE("coarse entropy examples") {
  auto interval = builtin_space("interval");
  auto mu = builtin_measure("lebesgue_interval");
  auto approx = default_compressor();
  const OpenPartition halves = OpenPartition::dyadic(interval, 1, *approx, mu->name());
  REQUIRE(halves.size() == 2);
  for (std::size_t i = 1; i <= 2; ++i) {
    const auto h = coarse_entropy(halves, i, *mu, 16);
    CHECK(h.mass.lower == make_rational(1, 2));
    CHECK(h.mass.upper == make_rational(1, 2));
    CHECK(h.index_complexity == index_code(i, mu->name()));
    CHECK(h.value == static_cast<double>(index_code(i, mu->name())) - 1);
  }

  const OpenPartition whole(interval, {{CellBall{{{frac(1, 1)}, {}}, Dyadic(1)}}}, *approx, mu->name());
  CHECK(coarse_entropy(whole, 1, *mu, 16).value == static_cast<double>(index_code(1, mu->name())));

  auto doubled = scaled(mu, make_rational(2));
  for (std::size_t i = 1; i <= 2; ++i) {
    CHECK(coarse_entropy(halves, i, *doubled, 16).value == coarse_entropy(halves, i, *mu, 16).value + 1);
  }

  auto atom = atomic(interval, FiniteRationalMeasure{{{*interval->index_of({{frac(1, 2)}, {}}), make_rational(1)}}});
  CHECK(coarse_entropy(halves, 1, *atom, 16).value == static_cast<double>(index_code(1, mu->name())));
  CHECK_THROWS_AS(coarse_entropy(halves, 2, *atom, 16), Error);
  CHECK_THROWS_AS(coarse_entropy(halves, 3, *mu, 16), Error);
  CHECK_THROWS_AS(coarse_entropy(halves, 1, *uniform_cantor(), 16), Error);
}

TEST_CASE("cell_of examples") {
  auto interval = builtin_space("interval");
  const OpenPartition halves = OpenPartition::dyadic(interval, 1, *default_compressor(), "");
  CHECK(cell_of(at(interval, frac(1, 2)), halves, 20) == std::optional<std::size_t>(1));
  CHECK_FALSE(cell_of(at(interval, frac(1, 1)), halves, 20).has_value());
  CHECK(cell_of(at(interval, frac(3, 2)), halves, 20) == std::optional<std::size_t>(2));
  CHECK(cell_of(Point::from_reals(interval, {Real::sqrt_of(2) - Real(1)}), halves, 20) ==
        std::optional<std::size_t>(1));
}

TEST_CASE("property: cells are never both certified") {
  auto interval = builtin_space("interval");
  const OpenPartition eighths = OpenPartition::dyadic(interval, 3, *default_compressor(), "");
  std::size_t decided = 0;
  for (long long k = 0; k <= 1024; ++k) {
    const auto c = cell_of(at(interval, frac(k, 10)), eighths, 20);
    if (c) {
      ++decided;
      CHECK(*c == static_cast<std::size_t>(std::min(k / 128, 7LL)) + 1);
    }
  }
  CHECK(decided == 1025 - 9);

  const OpenPartition overlapping(interval,
                                  {{CellBall{{{frac(1, 2)}, {}}, frac(1, 2)}},
                                   {CellBall{{{frac(1, 1)}, {}}, frac(1, 2)}}},
                                  *default_compressor(), "");
  CHECK_THROWS_AS(cell_of(at(interval, frac(3, 3)), overlapping, 20), Error);
}

TEST_CASE("partition serialization") {
  auto approx = default_compressor();
  for (const char* name : {"interval", "torus2", "cantor"}) {
    const OpenPartition p = OpenPartition::dyadic(builtin_space(name), 2, *approx, "x");
    const std::string text = p.serialize();
    const OpenPartition q = OpenPartition::parse(text, *approx, "x");
    CHECK(q.serialize() == text);
    CHECK(q.size() == p.size());
    CHECK(q.description_length() == approx->code_length(to_bits(text)));
  }
  const OpenPartition halves = OpenPartition::dyadic(builtin_space("interval"), 1, *approx, "");
  CHECK(halves.serialize() == "entropica-partition 1\nspace interval\n0.25@0.25\n0.75@0.25\n");
  const OpenPartition two =
      OpenPartition::parse("entropica-partition 1\nspace cantor\nb:00@0.375 b:01@0.375\nb:1@0.75\n", *approx, "");
  CHECK(two.cell(1).size() == 2);
  CHECK(two.cell(1)[1].center.bits == Bits{0, 1});
  CHECK_THROWS_AS(OpenPartition::parse("entropica-partition 2\nspace interval\n0.5@0.5\n", *approx, ""), Error);
  CHECK_THROWS_AS(OpenPartition::parse("entropica-partition 1\nspace interval\n0.5@0\n", *approx, ""), Error);
  CHECK_THROWS_AS(OpenPartition::parse("entropica-partition 1\nspace interval\n0.5,0.5@0.5\n", *approx, ""), Error);
  CHECK_THROWS_AS(OpenPartition::parse("entropica-partition 1\nspace interval\n0.3@0.5\n", *approx, ""), Error);
  CHECK_THROWS_AS(OpenPartition::parse("entropica-partition 1\nspace interval\n", *approx, ""), Error);
}

TEST_CASE("stability table") {
  auto mu = builtin_measure("lebesgue_interval");
  auto repr = dyadic_representation(mu);
  auto approx = default_compressor();
  const OpenPartition quarters = OpenPartition::dyadic(mu->space(), 2, *approx, mu->name());
  const auto draws = sample_entropies(quarters, *repr, *approx, 20000, 11, {}, 4);
  std::size_t abstained = 0;
  for (auto& d : draws) abstained += !d.cell || !d.entropy;
  CHECK(abstained == 0);
  for (std::size_t i = 1; i <= 4; ++i) {
    const auto t = stability_table(quarters, i, *mu, draws, 8, 16);
    REQUIRE(t.rows.size() == 9);
    CHECK(t.rows[0].fraction <= 1.0);
    CHECK(t.rows[0].in_cell > 4000);
    CHECK(t.rows[0].in_cell < 6000);
    for (std::size_t m = 1; m < t.rows.size(); ++m) {
      CHECK(t.rows[m].fraction <= t.rows[m - 1].fraction);
      CHECK(t.rows[m].fraction_unshifted <= t.rows[m - 1].fraction_unshifted);
      CHECK(t.rows[m].within_envelope);
    }
  }
  // The same draws give the same table whatever the thread count.
  const auto serial = sample_entropies(quarters, *repr, *approx, 500, 11, {}, 1);
  for (std::size_t k = 0; k < serial.size(); ++k) {
    CHECK(serial[k].cell == draws[k].cell);
    CHECK(serial[k].entropy == draws[k].entropy);
  }
}

TEST_CASE("fine versus coarse entropy") {
  auto mu = uniform_cantor();
  auto repr = identity_representation(mu);
  auto approx = default_compressor();
  const OpenPartition single = OpenPartition::dyadic(mu->space(), 0, *approx, mu->name());
  REQUIRE(single.size() == 1);
  CHECK(coarse_entropy(single, 1, *mu, 16).value >= 0);
  const auto small = fine_vs_coarse_check(single, *mu, *repr, *approx, 2000, 3, {}, 4);
  const auto large = fine_vs_coarse_check(single, *mu, *repr, *approx, 20000, 3, {}, 4);
  CHECK(small[0].count == 2000);
  CHECK(large[0].max_difference < small[0].max_difference + 2);

  auto leb = builtin_measure("lebesgue_interval");
  auto dyadic = dyadic_representation(leb);
  const auto four = fine_vs_coarse_check(OpenPartition::dyadic(leb->space(), 2, *approx, leb->name()), *leb,
                                         *dyadic, *approx, 4000, 9, {}, 4);
  const auto eight = fine_vs_coarse_check(OpenPartition::dyadic(leb->space(), 3, *approx, leb->name()), *leb,
                                          *dyadic, *approx, 4000, 9, {}, 4);
  double fitted = -1e300;
  for (auto& c : four) fitted = std::max(fitted, c.max_difference);
  for (auto& c : eight) {
    CHECK(c.count > 0);
    CHECK(c.max_difference <= fitted + 2);
  }
}
