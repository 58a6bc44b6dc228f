#include "entropica/coarse.hpp"

#include "entropica/error.hpp"
#include "entropica/random.hpp"
#include "entropica/randomness.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace entropica {

namespace {

constexpr const char* kHeader = "entropica-partition 1";

double log2_rational(const Rational& q) {
  // Split off the binary exponent so huge or tiny values stay in range.
  const auto k = floor_log2(q);
  Rational scaled = q;
  if (k > 0) scaled /= Rational(BigInt(1) << static_cast<unsigned>(k));
  if (k < 0) scaled *= Rational(BigInt(1) << static_cast<unsigned>(-k));
  return static_cast<double>(k) + std::log2(rational_to_double(scaled));
}

std::string center_text(const Space& space, const IdealPoint& p) {
  std::string out;
  if (space.name() == "cantor") {
    out = "b:";
    for (auto b : p.bits) out += b ? '1' : '0';
    return out;
  }
  for (std::size_t k = 0; k < p.coords.size(); ++k) {
    if (k) out += ',';
    out += p.coords[k].to_decimal();
  }
  return out;
}

IdealPoint parse_center(const Space& space, const std::string& text) {
  IdealPoint p;
  if (space.name() == "cantor") {
    if (text.rfind("b:", 0) != 0) throw Error(ErrorCode::Parse, "Cantor centers start with b: (" + text + ")");
    for (char c : text.substr(2)) {
      if (c != '0' && c != '1') throw Error(ErrorCode::Parse, "bad bit in center " + text);
      p.bits.push_back(c == '1');
    }
    return p;
  }
  std::istringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) p.coords.push_back(Dyadic::parse(part));
  const auto dims = space.ideal(0).coords.size();
  if (p.coords.size() != dims) throw Error(ErrorCode::Parse, "center " + text + " has the wrong dimension");
  return p;
}

double std_error(double p, std::size_t n) {
  if (n == 0) return 0;
  const double N = static_cast<double>(n);
  return std::sqrt(std::max(p * (1 - p), 1 / N) / N);
}

}  // namespace

OpenPartition::OpenPartition(SpacePtr space, std::vector<std::vector<CellBall>> cells, const Compressor& approx,
                             const std::string& condition)
    : space_(std::move(space)), cells_(std::move(cells)), condition_(condition) {
  if (!space_) throw Error(ErrorCode::InvalidArgument, "partition needs a space");
  if (cells_.empty()) throw Error(ErrorCode::InvalidArgument, "partition has no cells");
  for (auto& c : cells_) {
    if (c.empty()) throw Error(ErrorCode::InvalidArgument, "partition cell has no balls");
    for (auto& b : c) {
      if (b.radius.sign() <= 0) throw Error(ErrorCode::InvalidArgument, "partition ball radius must be positive");
    }
  }
  const Bits cond = to_bits(condition_);
  for (std::size_t i = 1; i <= cells_.size(); ++i) {
    index_complexity_.push_back(approx.code_length(to_bits(static_cast<std::uint64_t>(i)), &cond));
  }
  description_length_ = approx.code_length(to_bits(serialize()));
}

OpenPartition OpenPartition::dyadic(SpacePtr space, int level, const Compressor& approx,
                                    const std::string& condition) {
  if (level < 0) throw Error(ErrorCode::InvalidArgument, "partition level must be nonnegative");
  std::vector<std::vector<CellBall>> cells;
  for (auto& b : space->dyadic_cells(level)) {
    if (!b.radius.exact()) throw Error(ErrorCode::Unsupported, "dyadic cell radius is not exact");
    cells.push_back({CellBall{b.center_point, *b.radius.exact()}});
  }
  return OpenPartition(std::move(space), std::move(cells), approx, condition);
}

OpenPartition OpenPartition::parse(const std::string& text, const Compressor& approx, const std::string& condition) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw Error(ErrorCode::Parse, "missing or unsupported partition header");
  if (!std::getline(in, line) || line.rfind("space ", 0) != 0) throw Error(ErrorCode::Parse, "missing space line");
  auto space = builtin_space(line.substr(6));
  std::vector<std::vector<CellBall>> cells;
  std::size_t row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string ball;
    std::vector<CellBall> cell;
    while (fields >> ball) {
      const auto at = ball.find('@');
      if (at == std::string::npos) throw Error(ErrorCode::Parse, "expected center@radius on line " + std::to_string(row));
      CellBall b{parse_center(*space, ball.substr(0, at)), Dyadic::parse(ball.substr(at + 1))};
      if (b.radius.sign() <= 0) throw Error(ErrorCode::Parse, "nonpositive radius on line " + std::to_string(row));
      cell.push_back(std::move(b));
    }
    cells.push_back(std::move(cell));
  }
  return OpenPartition(std::move(space), std::move(cells), approx, condition);
}

const std::vector<CellBall>& OpenPartition::cell(std::size_t i) const {
  if (i == 0 || i > cells_.size()) throw Error(ErrorCode::InvalidArgument, "cell index out of range");
  return cells_[i - 1];
}

std::vector<Ball> OpenPartition::cell_balls(std::size_t i) const {
  std::vector<Ball> out;
  for (auto& b : cell(i)) out.push_back(Ball::around(*space_, b.center, Real(b.radius)));
  return out;
}

std::size_t OpenPartition::index_complexity(std::size_t i) const {
  cell(i);
  return index_complexity_[i - 1];
}

std::string OpenPartition::serialize() const {
  std::ostringstream out;
  out << kHeader << "\nspace " << space_->name() << "\n";
  for (auto& c : cells_) {
    for (std::size_t k = 0; k < c.size(); ++k) {
      if (k) out << ' ';
      out << center_text(*space_, c[k].center) << '@' << c[k].radius.to_decimal();
    }
    out << "\n";
  }
  return out.str();
}

CoarseEntropy coarse_entropy(const OpenPartition& partition, std::size_t i, const Measure& mu, int effort) {
  if (mu.space()->name() != partition.space()->name()) {
    throw Error(ErrorCode::InvalidArgument, "measure and partition live on different spaces");
  }
  CoarseEntropy out;
  out.index_complexity = partition.index_complexity(i);
  out.mass = mu.union_bounds(partition.cell_balls(i), effort);
  if (out.mass.upper <= 0) throw Error(ErrorCode::ZeroCell, "cell " + std::to_string(i) + " has zero mass");
  out.value = static_cast<double>(out.index_complexity) + log2_rational(out.mass.midpoint());
  out.log2_mass_width = out.mass.lower > 0 ? log2_rational(out.mass.upper / out.mass.lower)
                                           : std::numeric_limits<double>::infinity();
  return out;
}

std::optional<std::size_t> cell_of(const Point& x, const OpenPartition& partition, int precision) {
  std::optional<std::size_t> found;
  for (std::size_t i = 1; i <= partition.size(); ++i) {
    bool inside = false;
    for (auto& b : partition.cell_balls(i)) {
      if (ball_membership(x, b, precision) == Membership::Inside) {
        inside = true;
        break;
      }
    }
    if (!inside) continue;
    if (found) {
      throw Error(ErrorCode::ConsistencyViolation,
                  "cells " + std::to_string(*found) + " and " + std::to_string(i) + " overlap");
    }
    found = i;
  }
  return found;
}

std::vector<SampleEntropy> sample_entropies(const OpenPartition& partition, const Representation& repr,
                                            const Compressor& approx, std::size_t samples, std::uint64_t seed,
                                            const EntropyBudget& budget, unsigned threads) {
  if (repr.space()->name() != partition.space()->name()) {
    throw Error(ErrorCode::InvalidArgument, "representation and partition live on different spaces");
  }
  std::vector<SampleEntropy> out(samples);
  parallel_for(samples, threads, [&](std::size_t k) {
    const Point x = repr.measure()->sample(seed, k);
    out[k].cell = cell_of(x, partition, budget.precision);
    if (auto h = try_entropy(x, repr, approx, budget.depth, budget.precision, budget.effort)) {
      out[k].entropy = h->value;
    }
  });
  return out;
}

StabilityTable stability_table(const OpenPartition& partition, std::size_t i, const Measure& mu,
                               const std::vector<SampleEntropy>& draws, int m_max, int effort) {
  if (m_max < 0) throw Error(ErrorCode::InvalidArgument, "m_max must be nonnegative");
  StabilityTable t;
  t.cell = i;
  t.cell_entropy = coarse_entropy(partition, i, mu, effort).value;
  t.description_length = partition.description_length();
  t.samples = draws.size();
  std::vector<double> in_cell;
  for (auto& d : draws) {
    if (!d.cell || !d.entropy) {
      ++t.abstained;
    } else if (*d.cell == i) {
      in_cell.push_back(*d.entropy);
    }
  }
  const double shifted = t.cell_entropy - static_cast<double>(t.description_length);
  double c = 0;
  for (int m = 0; m <= m_max; ++m) {
    StabilityRow row;
    row.m = m;
    row.in_cell = in_cell.size();
    for (double h : in_cell) {
      if (h < shifted - m) ++row.violating;
      if (h < t.cell_entropy - m) ++row.violating_unshifted;
    }
    if (row.in_cell) {
      row.fraction = static_cast<double>(row.violating) / static_cast<double>(row.in_cell);
      row.fraction_unshifted = static_cast<double>(row.violating_unshifted) / static_cast<double>(row.in_cell);
    }
    row.std_error = std_error(row.fraction, row.in_cell);
    if (m == 0) c = row.fraction;
    row.envelope = std::ldexp(c, -m);
    row.within_envelope = row.fraction <= row.envelope + 3 * row.std_error;
    t.rows.push_back(row);
  }
  return t;
}

StabilityTable stability_check(const OpenPartition& partition, std::size_t i, const Measure& mu,
                               const Representation& repr, const Compressor& approx, int m_max, std::size_t samples,
                               std::uint64_t seed, const EntropyBudget& budget, unsigned threads) {
  const auto draws = sample_entropies(partition, repr, approx, samples, seed, budget, threads);
  return stability_table(partition, i, mu, draws, m_max, budget.effort);
}

std::vector<FineCoarseCell> fine_vs_coarse(const OpenPartition& partition, const Measure& mu,
                                           const std::vector<SampleEntropy>& draws, int effort) {
  std::vector<FineCoarseCell> out;
  for (std::size_t i = 1; i <= partition.size(); ++i) {
    FineCoarseCell c;
    c.cell = i;
    c.coarse = coarse_entropy(partition, i, mu, effort).value + static_cast<double>(partition.description_length());
    c.max_difference = -std::numeric_limits<double>::infinity();
    out.push_back(c);
  }
  for (auto& d : draws) {
    if (!d.cell || !d.entropy) continue;
    auto& c = out[*d.cell - 1];
    ++c.count;
    c.max_difference = std::max(c.max_difference, *d.entropy - c.coarse);
  }
  return out;
}

std::vector<FineCoarseCell> fine_vs_coarse_check(const OpenPartition& partition, const Measure& mu,
                                                 const Representation& repr, const Compressor& approx,
                                                 std::size_t samples, std::uint64_t seed,
                                                 const EntropyBudget& budget, unsigned threads) {
  const auto draws = sample_entropies(partition, repr, approx, samples, seed, budget, threads);
  return fine_vs_coarse(partition, mu, draws, budget.effort);
}

}  // namespace entropica
