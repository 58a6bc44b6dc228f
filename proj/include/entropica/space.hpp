#pragma once

#include "entropica/real.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace entropica {

// Datum of an ideal point. Real-valued spaces use `coords`; the Cantor space
// uses `bits`, a finite string standing for bits followed by zeros.
struct IdealPoint {
  std::vector<Dyadic> coords;
  std::vector<std::uint8_t> bits;

  friend bool operator==(const IdealPoint&, const IdealPoint&) = default;
};

struct Ball;

// A computable metric space: an enumeration of ideal points with a
// computable distance between them. Each built-in space fixes a bijective
// index <-> datum pairing (see builtin_space).
class Space {
 public:
  virtual ~Space() = default;

  virtual std::string name() const = 0;
  virtual IdealPoint ideal(std::uint64_t index) const = 0;
  // Inverse of `ideal` for data produced by this space.
  virtual std::optional<std::uint64_t> index_of(const IdealPoint& p) const = 0;
  virtual Real ideal_distance(const IdealPoint& a, const IdealPoint& b) const = 0;

  // Generation of the ideal point in the enumeration; balls built on it use
  // radii proportional to 2^-level.
  virtual int ideal_level(std::uint64_t index) const = 0;
  // Upper bound on the diameter; empty for unbounded spaces.
  virtual std::optional<Dyadic> diameter() const = 0;
  // Disjoint open cells of the dyadic refinement at `level`, as balls.
  virtual std::vector<Ball> dyadic_cells(int level) const = 0;

  // Certified inclusion B(inner) in B(outer); the default is the triangle
  // certificate d(c1, c2) + r2 <= r1.
  virtual bool ball_subset(const Ball& outer, const Ball& inner, std::int64_t precision) const;

  Real distance(std::uint64_t i, std::uint64_t j) const {
    return ideal_distance(ideal(i), ideal(j));
  }
};

using SpacePtr = std::shared_ptr<const Space>;

struct Ball {
  static constexpr std::uint64_t kNoIndex = UINT64_MAX;

  std::uint64_t center = 0;
  IdealPoint center_point;
  Real radius;

  static Ball make(const Space& space, std::uint64_t center, Real radius);
  // `center` is kNoIndex when the datum is too fine for a 64-bit index.
  static Ball around(const Space& space, IdealPoint center, Real radius);
};

// A point given by ideal approximations: approx(n) is within 2^-n of the
// point, so approx(n + 2) for n = 0, 1, ... is a fast Cauchy sequence.
class Point {
 public:
  using Approximator = std::function<IdealPoint(std::int64_t)>;

  Point(SpacePtr space, Approximator approximator);
  // As above, with the coordinates that are known exactly.
  Point(SpacePtr space, Approximator approximator, std::vector<std::optional<Dyadic>> exact_coords);
  static Point ideal(SpacePtr space, std::uint64_t index);
  static Point exact(SpacePtr space, IdealPoint datum);
  // Real-valued coordinates given as computable reals.
  static Point from_reals(SpacePtr space, std::vector<Real> coords);

  IdealPoint approx(std::int64_t n) const;
  // n-th element of the fast Cauchy encoding, d(x_n, x_{n+1}) < 2^-n.
  IdealPoint cauchy(std::int64_t n) const { return approx(n + 2); }
  // Present when the point is an exact ideal datum.
  const std::optional<IdealPoint>& exact() const;
  // Coordinates known to be exact dyadics (from_reals); empty otherwise.
  const std::vector<std::optional<Dyadic>>& exact_coords() const { return exact_coords_; }

  const Space& space() const { return *space_; }
  const SpacePtr& space_ptr() const { return space_; }

 private:
  struct Cache;
  SpacePtr space_;
  Approximator approximator_;
  std::optional<IdealPoint> exact_;
  std::vector<std::optional<Dyadic>> exact_coords_;
  std::shared_ptr<Cache> cache_;
};

// Union of an enumerated (possibly finite) sequence of balls.
class EnumerableOpenSet {
 public:
  using Enumerator = std::function<std::optional<Ball>(std::size_t)>;

  static EnumerableOpenSet whole_space();
  static EnumerableOpenSet finite(std::vector<Ball> balls);
  static EnumerableOpenSet enumerated(Enumerator enumerator);

  bool is_whole_space() const { return whole_; }
  // First `count` balls (fewer if the enumeration is finite).
  std::vector<Ball> first(std::size_t count) const;

 private:
  bool whole_ = false;
  Enumerator enumerator_;
};

enum class Membership { Inside, Outside, Unknown };

Real distance(const Point& x, const Point& y);
Real distance(const Space& space, const Point& x, const IdealPoint& y);
Membership ball_membership(const Point& x, const Ball& ball, std::int64_t precision);
// Sound inclusion test; see Space::ball_subset.
bool ball_contains(const Space& space, const Ball& outer, const Ball& inner, std::int64_t precision);

// Index of an ideal point within 2^-m of x, found from x's approximations.
std::optional<std::uint64_t> nearby_ideal(const Point& x, int m);

// cantor, interval, circle, torus2, torus3, nonneg_reals
SpacePtr builtin_space(const std::string& name);

// Length of the Cantor cylinder B(s, r): min{i >= 0 : 2^-i < r}.
std::size_t cantor_cylinder_length(const Dyadic& r);

// Pairing functions shared by product spaces.
std::uint64_t cantor_pair(std::uint64_t a, std::uint64_t b);
std::pair<std::uint64_t, std::uint64_t> cantor_unpair(std::uint64_t z);

}  // namespace entropica
