#include "entropica/randomness.hpp"

#include "entropica/error.hpp"

#include <cmath>
#include <limits>

namespace entropica {

DeficiencyEstimate deficiency_from_masses(const Bits& x, const std::vector<double>& neg_log2_mass,
                                          const Compressor& approx, std::size_t depth) {
  if (depth == 0 || depth > x.size() || neg_log2_mass.size() < depth) {
    throw Error(ErrorCode::InvalidArgument, "depth must lie in [1, prefix length]");
  }
  DeficiencyEstimate out;
  out.depth = depth;
  out.approximator = approx.name();
  out.value = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= depth; ++n) {
    if (std::isinf(neg_log2_mass[n - 1])) {
      out.value = std::numeric_limits<double>::infinity();
      out.infinite = true;
      out.argmax = n;
      return out;
    }
  }
  const auto lengths = approx.prefix_code_lengths(x, depth);
  for (std::size_t n = 1; n <= depth; ++n) {
    const double d = neg_log2_mass[n - 1] - static_cast<double>(lengths[n - 1]);
    if (d > out.value) {
      out.value = d;
      out.argmax = n;
    }
  }
  return out;
}

DeficiencyEstimate deficiency(const Bits& x, const Measure& mu, const Compressor& approx, std::size_t depth,
                              int effort) {
  if (depth == 0 || depth > x.size()) throw Error(ErrorCode::InvalidArgument, "depth must lie in [1, prefix length]");
  std::vector<double> masses;
  try {
    masses = mu.cylinder_neg_log2(x, depth, effort);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::ZeroCylinder) throw;
    // Per-prefix bounds mark the null cylinder with +inf.
    const MeasurePtr view(&mu, [](const Measure*) {});
    masses = identity_representation(view)->Representation::cylinder_neg_log2(x, depth, effort);
  }
  return deficiency_from_masses(x, masses, approx, depth);
}

DeficiencyEstimate deficiency(const Bits& x, const Representation& repr, const Compressor& approx,
                              std::size_t depth, int effort) {
  if (depth == 0 || depth > x.size()) throw Error(ErrorCode::InvalidArgument, "depth must lie in [1, prefix length]");
  return deficiency_from_masses(x, repr.cylinder_neg_log2(x, depth, effort), approx, depth);
}

std::optional<EntropyEstimate> try_entropy(const Point& x, const Representation& repr, const Compressor& approx,
                                           std::size_t depth, int precision, int effort) {
  const auto bits = repr.encode(x, depth, precision);
  if (!bits) return std::nullopt;
  EntropyEstimate out;
  out.depth = depth;
  out.representation = repr.name();
  out.deficiency = deficiency(*bits, repr, approx, depth, effort);
  out.value = -out.deficiency.value;
  return out;
}

EntropyEstimate entropy(const Point& x, const Representation& repr, const Compressor& approx, std::size_t depth,
                        int precision, int effort) {
  auto e = try_entropy(x, repr, approx, depth, precision, effort);
  if (!e) throw Error(ErrorCode::Boundary, "point lies on a cell boundary at the given precision");
  return *e;
}

}  // namespace entropica
