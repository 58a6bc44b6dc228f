#include <doctest.h>

#include "entropica/error.hpp"
#include "entropica/random.hpp"
#include "entropica/randomness.hpp"

#include <cmath>

using namespace entropica;

namespace {

Bits uniform_bits(std::uint64_t seed, std::uint64_t index, std::size_t n) {
  Bits x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = counter_hash(seed, index, i) & 1U;
  return x;
}

}  // namespace

TEST_CASE("deficiency examples") {
  auto c = default_compressor();
  auto uniform = uniform_cantor();
  const Bits zeros(64, 0);
  const auto d = deficiency(zeros, *uniform, *c, 64, 16);
  CHECK(d.value >= 24);
  CHECK(d.value >= 64.0 - static_cast<double>(c->code_length(zeros)));
  CHECK(d.argmax >= 1);
  CHECK(d.argmax <= 64);
  CHECK(d.approximator == "default");

  // Under bernoulli(1/4) the all-zero prefix is typical: -log mu = 64 log2(4/3).
  auto b = bernoulli(make_rational(1, 4));
  const auto logs = b->cylinder_neg_log2(zeros, 64, 16);
  CHECK(logs[63] == doctest::Approx(64 * std::log2(4.0 / 3.0)).epsilon(1e-9));
  CHECK(logs[63] <= 64 * std::log2(4.0 / 3.0));
  const auto db = deficiency(zeros, *b, *c, 64, 16);
  CHECK(db.value < d.value - 30);
}

TEST_CASE("zero cylinders give an infinite deficiency") {
  auto cantor = builtin_space("cantor");
  auto never_one = atomic(cantor, {{{*cantor->index_of(IdealPoint{}), Rational(1)}}});
  const auto d = deficiency(Bits{0, 0, 1, 0}, *never_one, *default_compressor(), 4, 8);
  CHECK(d.infinite);
  CHECK(std::isinf(d.value));
  CHECK(d.argmax == 3);
  CHECK_THROWS_AS(deficiency(Bits{0, 1}, *never_one, *default_compressor(), 3, 8), Error);
}

TEST_CASE("entropy examples") {
  auto c = default_compressor();
  auto repr = identity_representation(uniform_cantor());
  const Point origin = Point::exact(builtin_space("cantor"), IdealPoint{});
  const auto h = entropy(origin, *repr, *c, 64, 0, 16);
  CHECK(h.value <= -24);
  CHECK(h.value == -h.deficiency.value);

  // Scaling the measure by c shifts entropy by log2 c.
  auto scaled_repr = identity_representation(scaled(uniform_cantor(), Rational(4)));
  const Point x = Point::exact(builtin_space("cantor"), IdealPoint{{}, uniform_bits(3, 0, 128)});
  const auto h1 = entropy(x, *repr, *c, 128, 0, 16);
  const auto h4 = entropy(x, *scaled_repr, *c, 128, 0, 16);
  CHECK(h4.value == h1.value + 2);

  auto dyadic = dyadic_representation(builtin_measure("lebesgue_interval"));
  std::vector<Real> half{Real::from_approximator([](std::int64_t) { return Dyadic::ratio(BigInt(1), 1); })};
  const Point edge = Point::from_reals(builtin_space("interval"), half);
  CHECK_FALSE(try_entropy(edge, *dyadic, *c, 8, 20, 16).has_value());
  CHECK_THROWS_AS(entropy(edge, *dyadic, *c, 8, 20, 16), Error);
}

TEST_CASE("property: deficiency is monotone in depth") {
  auto c = default_compressor();
  auto mu = bernoulli(make_rational(1, 3));
  for (std::uint64_t i = 0; i < 30; ++i) {
    Bits x = uniform_bits(5, i, 200);
    if (i % 3 == 0) std::fill(x.begin(), x.begin() + 40, 0);
    double prev = -1e300;
    for (std::size_t depth = 1; depth <= 200; depth += 7) {
      const double v = deficiency(x, *mu, *c, depth, 16).value;
      CHECK(v >= prev);
      prev = v;
    }
  }
}

TEST_CASE("property: a shorter code never lowers the deficiency") {
  register_compressor("default-plus-three", [](const std::vector<std::uint8_t>& x, const std::vector<std::uint8_t>* y) {
    return default_compressor()->code_length(x, y) + 3;
  });
  auto longer = find_compressor("default-plus-three");
  auto uniform = uniform_cantor();
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Bits x = uniform_bits(8, i, 128);
    const double a = deficiency(x, *uniform, *default_compressor(), 128, 16).value;
    const double b = deficiency(x, *uniform, *longer, 128, 16).value;
    CHECK(a == b + 3);
    CHECK(deficiency(x, *uniform, *literal_compressor(), 128, 16).value <= a + 1);
  }
}

TEST_CASE("property: conservation tail under the uniform measure") {
  auto c = default_compressor();
  auto uniform = uniform_cantor();
  const int samples = 4000;
  std::vector<int> at_least(17, 0);
  for (int i = 0; i < samples; ++i) {
    const double d = deficiency(uniform_bits(11, static_cast<std::uint64_t>(i), 256), *uniform, *c, 256, 16).value;
    for (int k = 0; k <= 16; ++k) {
      if (d >= k) ++at_least[k];
    }
  }
  for (int k = 0; k <= 16; ++k) {
    const double p = std::min(1.0, std::ldexp(1.0, -k + 1));
    const double sigma = std::sqrt(p * (1 - p) / samples);
    CHECK(static_cast<double>(at_least[k]) / samples <= p + 3 * sigma);
  }
}
