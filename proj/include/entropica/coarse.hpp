#pragma once

#include "entropica/complexity.hpp"
#include "entropica/representation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace entropica {

struct CellBall {
  IdealPoint center;
  Dyadic radius;
};

// Finitely many disjoint open cells, each a finite union of balls. Cell i
// (1-based) carries K^(i | condition), fixed when the partition is built.
class OpenPartition {
 public:
  // Throws InvalidArgument for empty cells or nonpositive radii. Disjointness
  // is the caller's obligation; cell_of reports a violation if one is seen.
  OpenPartition(SpacePtr space, std::vector<std::vector<CellBall>> cells, const Compressor& approx,
                const std::string& condition);

  // The 2^level dyadic cells of the space, one ball each.
  static OpenPartition dyadic(SpacePtr space, int level, const Compressor& approx, const std::string& condition);
  static OpenPartition parse(const std::string& text, const Compressor& approx, const std::string& condition);

  const SpacePtr& space() const { return space_; }
  std::size_t size() const { return cells_.size(); }
  const std::vector<CellBall>& cell(std::size_t i) const;  // 1-based
  std::vector<Ball> cell_balls(std::size_t i) const;
  std::size_t index_complexity(std::size_t i) const;  // K^(i | condition)
  std::size_t description_length() const { return description_length_; }  // K^(serialize())
  const std::string& condition() const { return condition_; }

  // "entropica-partition 1", a space line, then one cell per line as
  // space-separated balls "center@radius". Centers are comma-separated
  // decimal coordinates, or "b:" followed by bits on the Cantor space.
  std::string serialize() const;

 private:
  SpacePtr space_;
  std::vector<std::vector<CellBall>> cells_;
  std::vector<std::size_t> index_complexity_;
  std::size_t description_length_ = 0;
  std::string condition_;
};

struct CoarseEntropy {
  double value = 0;  // K^(i) + log2(midpoint of the mass bracket)
  Bracket mass;
  double log2_mass_width = 0;  // log2(upper / lower), +inf when lower is 0
  std::size_t index_complexity = 0;
};

// Throws ZeroCell when the cell's mass is certified to be 0.
CoarseEntropy coarse_entropy(const OpenPartition& partition, std::size_t i, const Measure& mu, int effort);

// The 1-based cell certified to contain x, or nullopt. Throws
// ConsistencyViolation if two cells both certify membership.
std::optional<std::size_t> cell_of(const Point& x, const OpenPartition& partition, int precision);

// Cell and fine-grained entropy of sample `index` drawn from mu; either is
// missing when undecided at the given budgets.
struct SampleEntropy {
  std::optional<std::size_t> cell;
  std::optional<double> entropy;
};

struct EntropyBudget {
  std::size_t depth = 64;
  int precision = 96;
  int effort = 16;
};

std::vector<SampleEntropy> sample_entropies(const OpenPartition& partition, const Representation& repr,
                                            const Compressor& approx, std::size_t samples, std::uint64_t seed,
                                            const EntropyBudget& budget, unsigned threads = 1);

struct StabilityRow {
  int m = 0;
  std::size_t in_cell = 0;  // samples in the cell with a decided entropy
  std::size_t violating = 0;  // H^(a) < H^(cell) - K^(partition) - m
  double fraction = 0;
  double std_error = 0;
  double envelope = 0;  // c * 2^-m with c = fraction at m = 0
  bool within_envelope = false;  // fraction <= envelope + 3 sigma
  std::size_t violating_unshifted = 0;  // H^(a) < H^(cell) - m
  double fraction_unshifted = 0;
};

struct StabilityTable {
  std::size_t cell = 0;
  double cell_entropy = 0;
  std::size_t description_length = 0;
  std::size_t samples = 0;
  std::size_t abstained = 0;  // no certified cell or no entropy
  std::vector<StabilityRow> rows;
};

StabilityTable stability_table(const OpenPartition& partition, std::size_t i, const Measure& mu,
                               const std::vector<SampleEntropy>& draws, int m_max, int effort);

StabilityTable stability_check(const OpenPartition& partition, std::size_t i, const Measure& mu,
                               const Representation& repr, const Compressor& approx, int m_max, std::size_t samples,
                               std::uint64_t seed, const EntropyBudget& budget = {}, unsigned threads = 1);

struct FineCoarseCell {
  std::size_t cell = 0;
  std::size_t count = 0;
  double coarse = 0;  // H^(cell) + K^(partition)
  double max_difference = 0;  // max of H^(a) - coarse; -inf when count is 0
};

std::vector<FineCoarseCell> fine_vs_coarse(const OpenPartition& partition, const Measure& mu,
                                           const std::vector<SampleEntropy>& draws, int effort);

std::vector<FineCoarseCell> fine_vs_coarse_check(const OpenPartition& partition, const Measure& mu,
                                                 const Representation& repr, const Compressor& approx,
                                                 std::size_t samples, std::uint64_t seed,
                                                 const EntropyBudget& budget = {}, unsigned threads = 1);

}  // namespace entropica
