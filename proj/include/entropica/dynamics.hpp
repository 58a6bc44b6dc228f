#pragma once

#include "entropica/measure.hpp"

#include <memory>
#include <string>
#include <vector>

namespace entropica {

enum class TimeKind { Continuous, Discrete };
enum class Verdict { Pass, Fail, Indistinguishable };

std::string to_string(Verdict v);

// A computable measure-preserving group (or semigroup) action G^t.
class Dynamics {
 public:
  virtual ~Dynamics() = default;
  virtual std::string name() const = 0;
  virtual TimeKind time_kind() const = 0;
  virtual const SpacePtr& space() const = 0;
  virtual MeasurePtr invariant_measure() const = 0;
  // False for semigroups, which only accept t >= 0.
  virtual bool invertible() const { return true; }
  // Bits of accuracy lost per unit of time; 0 for isometries.
  virtual int expansion() const { return 0; }

  // G^t x. The result's approximation at `precision` is computed before
  // returning, so PrecisionUnreachable surfaces here. Discrete systems need
  // an integer t.
  Point evolve(const Real& t, const Point& x, int precision) const;
  Point evolve(long long t, const Point& x, int precision) const { return evolve(Real(t), x, precision); }

 protected:
  // The lazy point G^t x; `t` has already been validated.
  virtual Point flow(const Real& t, const Point& x) const = 0;
};

using DynamicsPtr = std::shared_ptr<const Dynamics>;

// rotation_flow(w), torus_translation_flow(w1,w2), bakers_map, cat_map,
// shift_cantor, baker_rotation(v). Parameters are real expressions (see
// parse_real) and default to irrational values.
DynamicsPtr builtin_dynamics(const std::string& spec);
std::vector<std::string> builtin_dynamics_names();

// Real expressions over rationals and sqrt(k): + - * ( ), and division by a
// rational, e.g. "8*(sqrt(2)-1)" or "1/4".
Real parse_real(const std::string& text);

// Compares d(G^t G^s x, G^(t+s) x) with 2^(-precision+2).
Verdict check_group_law(const Dynamics& g, const Real& t, const Real& s, const Point& x, int precision);
// Compares d(G^-t G^t x, x) with 2^(-precision+2).
Verdict check_reversibility(const Dynamics& g, const Real& t, const Point& x, int precision);

struct PreservationReport {
  Bracket region_mass;  // mu(region)
  double estimate = 0;  // fraction of samples x ~ mu with G^t x in the region
  double std_error = 0;
  std::size_t samples = 0;
  std::size_t inside = 0;
  std::size_t unknown = 0;  // membership undecided at the test precision
  bool pass = false;  // |estimate - mu(region)| within 3 sigma plus slack
};

// Monte Carlo estimate of mu(G^-t(region)) for each region, sharing samples.
std::vector<PreservationReport> check_measure_preservation(const Dynamics& g, const Real& t,
                                                           const std::vector<std::vector<Ball>>& regions,
                                                           std::size_t samples, std::uint64_t seed,
                                                           unsigned threads = 1, int precision = 32);

}  // namespace entropica
