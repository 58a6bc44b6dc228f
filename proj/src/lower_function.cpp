#include "entropica/lower_function.hpp"

#include <algorithm>

namespace entropica {

namespace {

// Finest refinement level keeping the cell count near 2^12.
int refinement_cap(const Space& space) {
  if (space.name() == "nonneg_reals") return 8;
  const std::size_t dim = std::max<std::size_t>(1, space.ideal(0).coords.size());
  return static_cast<int>(12 / dim);
}

// Lower bound on mu((union of balls) ∩ U) through refinement cells that sit
// inside some ball and inside some ball of U.
Rational intersection_lower(const std::vector<Ball>& balls, const EnumerableOpenSet& u, std::size_t u_budget,
                            const Measure& mu, int effort) {
  if (u.is_whole_space()) return mu.union_lower(balls, effort);
  const Space& space = *mu.space();
  const auto u_balls = u.first(u_budget);
  if (u_balls.empty()) return 0;
  const int level = std::min(effort, refinement_cap(space));
  std::vector<Ball> good;
  for (auto& cell : space.dyadic_cells(level)) {
    auto inside = [&](const Ball& b) { return space.ball_subset(b, cell, effort); };
    if (std::any_of(balls.begin(), balls.end(), inside) && std::any_of(u_balls.begin(), u_balls.end(), inside)) {
      good.push_back(cell);
    }
  }
  if (good.empty()) return 0;
  return mu.union_lower(good, effort);
}

Rational peel(std::vector<StepPair> pairs, const EnumerableOpenSet& u, std::size_t u_budget, const Measure& mu,
              int effort) {
  Rational total = 0;
  while (!pairs.empty()) {
    // Lowest index wins ties.
    std::size_t j = 0;
    for (std::size_t i = 1; i < pairs.size(); ++i) {
      if (pairs[i].value < pairs[j].value) j = i;
    }
    const Rational q = pairs[j].value;
    std::vector<Ball> balls;
    for (auto& p : pairs) balls.push_back(p.ball);
    total += q * intersection_lower(balls, u, u_budget, mu, effort);
    std::vector<StepPair> rest;
    for (auto& p : pairs) {
      if (p.value > q) rest.push_back({p.ball, p.value - q});
    }
    pairs = std::move(rest);
  }
  return total;
}

}  // namespace

LowerFunction LowerFunction::finite(std::vector<StepPair> pairs) {
  LowerFunction f;
  f.enumerator_ = [pairs = std::move(pairs)](std::size_t i) -> std::optional<StepPair> {
    if (i >= pairs.size()) return std::nullopt;
    return pairs[i];
  };
  return f;
}

LowerFunction LowerFunction::enumerated(Enumerator enumerator) {
  LowerFunction f;
  f.enumerator_ = std::move(enumerator);
  return f;
}

std::vector<StepPair> LowerFunction::first(std::size_t count) const {
  std::vector<StepPair> out;
  if (!enumerator_) return out;
  for (std::size_t i = 0; i < count; ++i) {
    auto p = enumerator_(i);
    if (!p) break;
    if (p->value > 0) out.push_back(std::move(*p));
  }
  return out;
}

Rational eval_lower(const LowerFunction& f, const Point& x, int effort) {
  Rational best = 0;
  for (auto& p : f.first(static_cast<std::size_t>(std::max(effort, 0)))) {
    if (p.value > best && ball_membership(x, p.ball, effort) == Membership::Inside) best = p.value;
  }
  return best;
}

Rational integrate_steps(std::vector<StepPair> pairs, const EnumerableOpenSet& u, const Measure& mu,
                         int measure_effort) {
  const std::size_t u_budget = pairs.size() + static_cast<std::size_t>(std::max(measure_effort, 1));
  return peel(std::move(pairs), u, u_budget, mu, measure_effort);
}

Rational integrate_open(const LowerFunction& f, const EnumerableOpenSet& u, const Measure& mu, int effort) {
  const int pair_budget = (effort + 1) / 2;
  const int measure_effort = effort / 2;
  auto pairs = f.first(static_cast<std::size_t>(pair_budget));
  return peel(std::move(pairs), u, static_cast<std::size_t>(pair_budget), mu, measure_effort);
}

Rational integrate(const LowerFunction& f, const Measure& mu, int effort) {
  return integrate_open(f, EnumerableOpenSet::whole_space(), mu, effort);
}

}  // namespace entropica
