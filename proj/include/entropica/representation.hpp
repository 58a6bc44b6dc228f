#pragma once

#include "entropica/complexity.hpp"
#include "entropica/measure.hpp"

#include <optional>
#include <string>
#include <vector>

namespace entropica {

// A binary representation of a measure space: points encode to bit strings,
// cylinders pull back to cells, and the measure pushes forward to cylinder
// masses. Representations are immutable and shareable across threads.
class Representation {
 public:
  virtual ~Representation() = default;
  virtual std::string name() const = 0;
  virtual const MeasurePtr& measure() const = 0;
  const SpacePtr& space() const { return measure()->space(); }

  // The first `depth` bits of x, or nullopt when some bit is undecided at
  // `precision` (x is on or near a cell boundary).
  virtual std::optional<Bits> encode(const Point& x, std::size_t depth, int precision) const = 0;
  // A point of the cell named by `bits`. Throws EmptyCell when the cell is
  // certified empty and SearchExhausted when no point is found in budget.
  virtual Point decode(const Bits& bits, int precision) const = 0;
  // Bounds on mu(cell(bits)).
  virtual Bracket cylinder_bounds(const Bits& bits, int effort) const = 0;
  // Upper bound on the diameter of cell(bits).
  virtual Rational cell_diameter(const Bits& bits) const = 0;
  // Lower bounds on -log2 mu(cell(bits[0..n))) for n = 1..depth; +inf marks a
  // cylinder certified to have zero mass.
  virtual std::vector<double> cylinder_neg_log2(const Bits& bits, std::size_t depth, int effort) const;
};

using RepresentationPtr = std::shared_ptr<const Representation>;

// Cantor space: a point is its own bit sequence.
RepresentationPtr identity_representation(MeasurePtr mu);
// interval, circle, torus2, torus3: binary digits of the coordinates,
// interleaved (bit k is digit k / d + 1 of coordinate k mod d).
RepresentationPtr dyadic_representation(MeasurePtr mu);

struct BasisBall {
  std::uint64_t center = 0;
  Dyadic radius;
  std::uint32_t quality = 1;
  int effort = 0;
};

struct Basis {
  std::string space;
  std::vector<BasisBall> balls;
};

// Sphere test: upper(B(c, r + 2^-effort)) - lower(B(c, r)) < 1/quality for
// every measure.
bool admissible_radius(const Space& space, std::uint64_t center, const Dyadic& radius,
                       const std::vector<const Measure*>& measures, std::uint32_t quality, int effort);

// Balls on the first `count` ideal points. Radii are scanned on dyadic grids
// of increasing resolution inside [1/4, 3/4] * diameter * 2^-level(center);
// candidates must be finer than every center level, which keeps them off
// all center-to-center distances. Throws SearchExhausted.
Basis build_basis(const SpacePtr& space, const Measure& mu, const Measure* nu, std::size_t count,
                  std::uint32_t quality, int effort = 16);

// "entropica-basis 1" header, a space line, then one ball per line:
// center index, radius literal, quality, effort.
std::string serialize_basis(const Basis& basis);
Basis parse_basis(const std::string& text);

// Bit k is membership in basis ball k (Inside -> 1, Outside -> 0).
RepresentationPtr basis_representation(MeasurePtr mu, Basis basis);

// Builds a representation by name: identity, dyadic, or basis:<count>:<quality>.
RepresentationPtr builtin_representation(const std::string& name, MeasurePtr mu);

}  // namespace entropica
