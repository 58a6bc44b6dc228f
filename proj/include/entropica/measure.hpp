#pragma once

#include "entropica/space.hpp"

#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace entropica {

struct Bracket {
  Rational lower;
  Rational upper;

  Rational width() const { return upper - lower; }
  Rational midpoint() const { return (lower + upper) / 2; }
};

// A computable Borel measure, given by certified bounds on finite unions of
// ideal balls. Lower bounds are nondecreasing in effort and converge.
class Measure {
 public:
  virtual ~Measure() = default;

  virtual std::string name() const = 0;
  virtual const SpacePtr& space() const = 0;
  virtual Bracket union_bounds(const std::vector<Ball>& balls, int effort) const = 0;
  virtual Real total_mass() const = 0;
  virtual bool is_probability() const = 0;
  // Draws sample `index` of stream `seed`; the result depends on nothing else.
  virtual Point sample(std::uint64_t seed, std::uint64_t index) const;

  // Cantor-space measures: lower bounds on -log2 mu(cylinder x[0..n)) for
  // n = 1..depth. The default goes through union_bounds.
  virtual std::vector<double> cylinder_neg_log2(const std::vector<std::uint8_t>& bits, std::size_t depth,
                                                int effort) const;

  // Bounds on the mass of a half-open box prod [lo_k, hi_k) of real
  // coordinates in [0, 1], when the measure has a direct formula.
  virtual std::optional<Bracket> box_bounds(const std::vector<std::pair<Dyadic, Dyadic>>& box, int effort) const;

  Rational union_lower(const std::vector<Ball>& balls, int effort) const {
    return union_bounds(balls, effort).lower;
  }
  Rational union_upper(const std::vector<Ball>& balls, int effort) const {
    return union_bounds(balls, effort).upper;
  }
  Bracket total_mass_bounds(int effort) const;
};

using MeasurePtr = std::shared_ptr<const Measure>;

// Ideal point of the measure space: finitely many atoms with rational weights.
struct FiniteRationalMeasure {
  std::vector<std::pair<std::uint64_t, Rational>> atoms;

  Rational total() const;
  // Merges repeated indices and drops zero weights; throws on negative weights.
  FiniteRationalMeasure canonical() const;
};

MeasurePtr lebesgue(SpacePtr space);  // interval, circle, torus2, torus3
MeasurePtr bernoulli(const Rational& p);  // Cantor space, P(bit = 1) = p
MeasurePtr uniform_cantor();
MeasurePtr scaled(MeasurePtr base, const Rational& factor);
MeasurePtr atomic(SpacePtr space, FiniteRationalMeasure atoms);
MeasurePtr sum(std::vector<MeasurePtr> parts);
// Throws ZeroMass unless total_mass is certified > 2^-min_log2_mass.
MeasurePtr normalize(MeasurePtr mu, int min_log2_mass = 40);

// uniform_cantor, lebesgue_interval, lebesgue_circle, lebesgue_torus2,
// lebesgue_torus3, bernoulli(p), scaled(name,c)
MeasurePtr builtin_measure(const std::string& name);

// Prokhorov distance inf{e : mu(A) <= nu(A^e) + e for all Borel A} between
// finite probability measures, within 2^-precision (the returned value is an
// upper end of the final bisection interval).
Rational prokhorov(const FiniteRationalMeasure& mu, const FiniteRationalMeasure& nu, const Space& space,
                   int precision, std::size_t atom_limit = 16);

// Certified measure of a Cantor cylinder, exact for Bernoulli measures.
Rational bernoulli_cylinder(const Rational& p, const std::vector<std::uint8_t>& bits);

}  // namespace entropica
