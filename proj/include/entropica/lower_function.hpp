#pragma once

#include "entropica/measure.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace entropica {

struct StepPair {
  Ball ball;
  Rational value;  // > 0
};

// f(x) = sup{ r_i : x in B_i } over an enumerated sequence of pairs.
class LowerFunction {
 public:
  using Enumerator = std::function<std::optional<StepPair>(std::size_t)>;

  LowerFunction() = default;
  static LowerFunction finite(std::vector<StepPair> pairs);
  static LowerFunction enumerated(Enumerator enumerator);

  std::vector<StepPair> first(std::size_t count) const;

 private:
  Enumerator enumerator_;
};

// Max of r_i over the first `effort` pairs whose ball certifies x at
// precision `effort`; 0 when none does.
Rational eval_lower(const LowerFunction& f, const Point& x, int effort);

// Lower bound on the integral of f over U; half the effort bounds the
// number of pairs, half goes to measure bounds and refinement depth.
Rational integrate_open(const LowerFunction& f, const EnumerableOpenSet& u, const Measure& mu, int effort);
Rational integrate(const LowerFunction& f, const Measure& mu, int effort);

// Integral of max_i r_i [B_i] over U for a fixed finite list, by peeling the
// minimal level; exposed for the step-function recursion itself.
Rational integrate_steps(std::vector<StepPair> pairs, const EnumerableOpenSet& u, const Measure& mu,
                         int measure_effort);

}  // namespace entropica
