#pragma once

#include "entropica/complexity.hpp"
#include "entropica/representation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace entropica {

// D^ = max over 1 <= n <= depth of (-log2 mu(x[0..n)) - K^(x[0..n))), using
// an upper bound on the cylinder mass. `infinite` marks a cylinder certified
// to have zero mass, in which case value is +inf.
struct DeficiencyEstimate {
  double value = 0;
  bool infinite = false;
  std::size_t depth = 0;
  std::size_t argmax = 0;  // prefix length attaining the maximum
  std::string approximator;
};

// From precomputed lower bounds on -log2 mu of the prefixes.
DeficiencyEstimate deficiency_from_masses(const Bits& x, const std::vector<double>& neg_log2_mass,
                                          const Compressor& approx, std::size_t depth);
// Against a measure on the Cantor space.
DeficiencyEstimate deficiency(const Bits& x, const Measure& mu, const Compressor& approx, std::size_t depth,
                              int effort);
// Against the cylinder measure of a representation.
DeficiencyEstimate deficiency(const Bits& x, const Representation& repr, const Compressor& approx,
                              std::size_t depth, int effort);

// H^ = -D^ of the encoded point.
struct EntropyEstimate {
  double value = 0;
  std::size_t depth = 0;
  std::string representation;
  DeficiencyEstimate deficiency;
};

// Throws Boundary when x cannot be encoded at `precision`.
EntropyEstimate entropy(const Point& x, const Representation& repr, const Compressor& approx, std::size_t depth,
                        int precision, int effort);
// As above with nullopt in place of the Boundary error.
std::optional<EntropyEstimate> try_entropy(const Point& x, const Representation& repr, const Compressor& approx,
                                           std::size_t depth, int precision, int effort);

}  // namespace entropica
