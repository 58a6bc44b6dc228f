#include "entropica/representation.hpp"

#include "entropica/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace entropica {

namespace mp = boost::multiprecision;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Lower bound on -log2 q; exact for powers of two.
double neg_log2_lower(const Rational& q) {
  if (q <= 0) return kInf;
  const std::int64_t k = floor_log2(q);
  const Rational r = q / Dyadic::pow2(k).to_rational();
  if (r == 1) return static_cast<double>(-k);
  return -(static_cast<double>(k) + std::log2(rational_to_double(r))) - 1e-9;
}

Rational clamp_bracket_end(Rational v, const Rational& hi) {
  if (v < 0) return 0;
  return v > hi ? hi : v;
}

class IdentityRepresentation final : public Representation {
 public:
  explicit IdentityRepresentation(MeasurePtr mu) : mu_(std::move(mu)) {
    if (mu_->space()->name() != "cantor") {
      throw Error(ErrorCode::InvalidArgument, "identity representation needs the Cantor space");
    }
  }

  std::string name() const override { return "identity"; }
  const MeasurePtr& measure() const override { return mu_; }

  std::optional<Bits> encode(const Point& x, std::size_t depth, int) const override {
    Bits bits = x.approx(static_cast<std::int64_t>(depth) + 1).bits;
    bits.resize(depth, 0);
    return bits;
  }

  Point decode(const Bits& bits, int) const override { return Point::exact(space(), IdealPoint{{}, bits}); }

  Bracket cylinder_bounds(const Bits& bits, int effort) const override {
    if (bits.empty()) return mu_->total_mass_bounds(effort);
    const Ball cyl = Ball::around(*space(), IdealPoint{{}, bits},
                                  Real(Dyadic::ratio(BigInt(3), static_cast<std::int64_t>(bits.size()) + 1)));
    return mu_->union_bounds({cyl}, effort);
  }

  Rational cell_diameter(const Bits& bits) const override {
    return Dyadic::pow2(-static_cast<std::int64_t>(bits.size())).to_rational();
  }

  std::vector<double> cylinder_neg_log2(const Bits& bits, std::size_t depth, int effort) const override {
    try {
      return mu_->cylinder_neg_log2(bits, depth, effort);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ZeroCylinder) throw;
      return Representation::cylinder_neg_log2(bits, depth, effort);
    }
  }

 private:
  MeasurePtr mu_;
};

class DyadicRepresentation final : public Representation {
 public:
  explicit DyadicRepresentation(MeasurePtr mu) : mu_(std::move(mu)) {
    const std::string s = mu_->space()->name();
    if (s != "interval" && s != "circle" && s.rfind("torus", 0) != 0) {
      throw Error(ErrorCode::InvalidArgument, "dyadic representation needs interval, circle or torus");
    }
    periodic_ = s != "interval";
    dim_ = space()->ideal(0).coords.size();
  }

  std::string name() const override { return "dyadic"; }
  const MeasurePtr& measure() const override { return mu_; }

  std::optional<Bits> encode(const Point& x, std::size_t depth, int precision) const override {
    std::vector<BigInt> cells(dim_);
    std::optional<IdealPoint> approx;
    for (std::size_t c = 0; c < dim_; ++c) {
      const auto level = static_cast<std::int64_t>(digits(c, depth));
      if (level == 0) continue;
      std::optional<Dyadic> exact;
      if (x.exact()) exact = x.exact()->coords.at(c);
      if (!exact && c < x.exact_coords().size()) exact = x.exact_coords()[c];
      if (exact) {
        cells[c] = cell_index(*exact, level);
        continue;
      }
      if (!approx) approx = x.approx(precision);
      const Dyadic& a = approx->coords.at(c);
      const Dyadic eps = Dyadic::pow2(-precision);
      Dyadic lo = a - eps, hi = a + eps;
      if (periodic_) {
        if (lo.sign() < 0 || hi >= Dyadic(1)) return std::nullopt;
      } else {
        lo = std::max(lo, Dyadic(0));
        hi = std::min(hi, Dyadic(1));
      }
      const BigInt k = cell_index(lo, level);
      if (cell_index(hi, level) != k) return std::nullopt;
      cells[c] = k;
    }
    Bits bits(depth);
    for (std::size_t k = 0; k < depth; ++k) {
      const std::size_t c = k % dim_;
      const std::size_t level = digits(c, depth);
      bits[k] = mp::bit_test(cells[c], static_cast<unsigned>(level - 1 - k / dim_)) ? 1 : 0;
    }
    return bits;
  }

  Point decode(const Bits& bits, int) const override {
    if (bits.empty()) return Point::ideal(space(), 0);
    IdealPoint p;
    for (std::size_t c = 0; c < dim_; ++c) {
      const auto [k, level] = cell_of(bits, c);
      p.coords.push_back(Dyadic::ratio(2 * k + 1, level + 1));
    }
    return Point::exact(space(), std::move(p));
  }

  Bracket cylinder_bounds(const Bits& bits, int effort) const override {
    std::vector<std::pair<Dyadic, Dyadic>> box;
    for (std::size_t c = 0; c < dim_; ++c) {
      const auto [k, level] = cell_of(bits, c);
      box.emplace_back(Dyadic::ratio(k, level), Dyadic::ratio(k + 1, level));
    }
    if (auto b = mu_->box_bounds(box, effort)) return *b;
    // Split the box into cubes of the finest side; cubes are balls.
    std::int64_t fine = 0;
    for (std::size_t c = 0; c < dim_; ++c) fine = std::max(fine, cell_of(bits, c).second);
    std::vector<std::vector<Dyadic>> centers(1);
    for (std::size_t c = 0; c < dim_; ++c) {
      const auto [k, level] = cell_of(bits, c);
      const BigInt pieces = BigInt(1) << static_cast<unsigned>(fine - level);
      std::vector<std::vector<Dyadic>> next;
      for (auto& partial : centers) {
        for (BigInt j = 0; j < pieces; ++j) {
          auto q = partial;
          q.push_back(Dyadic::ratio(2 * (k * pieces + j) + 1, fine + 1));
          next.push_back(std::move(q));
        }
      }
      centers = std::move(next);
    }
    const Dyadic r = Dyadic::pow2(-fine - 1);
    const Dyadic r_out = r + Dyadic::pow2(-fine - 1 - std::max(effort, 1));
    std::vector<Ball> inner, outer;
    for (auto& c : centers) {
      inner.push_back(Ball::around(*space(), IdealPoint{c, {}}, Real(r)));
      outer.push_back(Ball::around(*space(), IdealPoint{c, {}}, Real(r_out)));
    }
    return {mu_->union_lower(inner, effort), mu_->union_upper(outer, effort)};
  }

  Rational cell_diameter(const Bits& bits) const override {
    std::int64_t coarsest = std::numeric_limits<std::int64_t>::max();
    for (std::size_t c = 0; c < dim_; ++c) coarsest = std::min(coarsest, cell_of(bits, c).second);
    Rational d = Dyadic::pow2(-coarsest).to_rational();
    const Rational whole = space()->diameter()->to_rational();
    return d < whole ? d : whole;
  }

 private:
  std::size_t digits(std::size_t c, std::size_t depth) const { return depth > c ? (depth - c + dim_ - 1) / dim_ : 0; }

  // Index of the level-`level` cell [k 2^-level, (k+1) 2^-level) holding v;
  // the endpoint 1 of the interval belongs to the last cell.
  BigInt cell_index(const Dyadic& v, std::int64_t level) const {
    BigInt k = v.shifted(level).floor();
    const BigInt top = BigInt(1) << static_cast<unsigned>(level);
    if (k >= top) k = top - 1;
    if (k < 0) k = 0;
    return k;
  }

  std::pair<BigInt, std::int64_t> cell_of(const Bits& bits, std::size_t c) const {
    BigInt k = 0;
    std::int64_t level = 0;
    for (std::size_t i = c; i < bits.size(); i += dim_) {
      k = 2 * k + bits[i];
      ++level;
    }
    return {k, level};
  }

  MeasurePtr mu_;
  bool periodic_ = false;
  std::size_t dim_ = 1;
};

class BasisRepresentation final : public Representation {
 public:
  BasisRepresentation(MeasurePtr mu, Basis basis) : mu_(std::move(mu)), basis_(std::move(basis)) {
    if (basis_.space != space()->name()) {
      throw Error(ErrorCode::InvalidArgument, "basis built for " + basis_.space + ", not " + space()->name());
    }
    for (auto& b : basis_.balls) balls_.push_back(Ball::make(*space(), b.center, Real(b.radius)));
  }

  std::string name() const override { return "basis"; }
  const MeasurePtr& measure() const override { return mu_; }

  std::optional<Bits> encode(const Point& x, std::size_t depth, int precision) const override {
    check_depth(depth);
    Bits bits(depth);
    for (std::size_t k = 0; k < depth; ++k) {
      const Membership m = ball_membership(x, balls_[k], precision);
      if (m == Membership::Unknown) return std::nullopt;
      bits[k] = m == Membership::Inside ? 1 : 0;
    }
    return bits;
  }

  Point decode(const Bits& bits, int precision) const override {
    check_depth(bits.size());
    const std::uint64_t budget = std::uint64_t{1} << std::clamp(precision, 4, 16);
    for (std::uint64_t i = 0; i < budget; ++i) {
      const IdealPoint y = space()->ideal(i);
      bool match = true;
      for (std::size_t k = 0; k < bits.size() && match; ++k) {
        const Real d = space()->ideal_distance(y, balls_[k].center_point);
        const Apart a = compare_apart(d, balls_[k].radius, 64);
        if (a == Apart::Indistinguishable) {
          match = false;
        } else {
          match = (a == Apart::Less) == (bits[k] == 1);
        }
      }
      if (match) return Point::exact(space(), y);
    }
    if (certified_empty(bits) || cylinder_bounds(bits, 24).upper == 0) {
      throw Error(ErrorCode::EmptyCell, "cell is empty");
    }
    throw Error(ErrorCode::SearchExhausted, "no ideal point found in the cell");
  }

  // mu(cell) = sum over nonempty R in I of (-1)^(|R|+1) mu(U_R u O) - mu(O),
  // with I the balls holding the point and O the union of the others.
  Bracket cylinder_bounds(const Bits& bits, int effort) const override {
    check_depth(bits.size());
    const Bracket total = mu_->total_mass_bounds(effort);
    std::vector<std::size_t> in;
    std::vector<Ball> out_open, out_closed;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      if (bits[k]) {
        in.push_back(k);
      } else {
        out_open.push_back(balls_[k]);
        out_closed.push_back(inflated(k, effort));
      }
    }
    if (in.size() > 16) throw Error(ErrorCode::Unsupported, "too many enclosing balls for inclusion-exclusion");
    const Rational o_lo = out_open.empty() ? Rational(0) : mu_->union_lower(out_open, effort);
    const Rational o_hi = out_closed.empty() ? Rational(0) : mu_->union_upper(out_closed, effort);
    if (in.empty()) {
      return {clamp_bracket_end(total.lower - o_hi, total.upper), clamp_bracket_end(total.upper - o_lo, total.upper)};
    }
    Rational lo = -o_hi, hi = -o_lo;
    for (std::uint32_t mask = 1; mask < (1U << in.size()); ++mask) {
      std::vector<Ball> open = out_open, closed = out_closed;
      for (std::size_t j = 0; j < in.size(); ++j) {
        if (mask >> j & 1U) {
          open.push_back(balls_[in[j]]);
          closed.push_back(inflated(in[j], effort));
        }
      }
      const Rational t_lo = mu_->union_lower(open, effort);
      const Rational t_hi = mu_->union_upper(closed, effort);
      if (std::popcount(mask) % 2 == 1) {
        lo += t_lo;
        hi += t_hi;
      } else {
        lo -= t_hi;
        hi -= t_lo;
      }
    }
    return {clamp_bracket_end(lo, total.upper), clamp_bracket_end(hi, total.upper)};
  }

  Rational cell_diameter(const Bits& bits) const override {
    std::optional<Rational> best;
    for (std::size_t k = 0; k < bits.size(); ++k) {
      if (!bits[k]) continue;
      const Rational d = 2 * basis_.balls[k].radius.to_rational();
      if (!best || d < *best) best = d;
    }
    if (best) return *best;
    if (auto d = space()->diameter()) return d->to_rational();
    return Rational(std::numeric_limits<std::int64_t>::max());
  }

 private:
  void check_depth(std::size_t depth) const {
    if (depth > balls_.size()) {
      throw Error(ErrorCode::InvalidArgument,
                  "depth " + std::to_string(depth) + " exceeds the basis size " + std::to_string(balls_.size()));
    }
  }

  // Two enclosing balls far apart, or an enclosing ball inside an excluded one.
  bool certified_empty(const Bits& bits) const {
    for (std::size_t a = 0; a < bits.size(); ++a) {
      if (!bits[a]) continue;
      for (std::size_t b = 0; b < bits.size(); ++b) {
        if (a == b) continue;
        if (bits[b]) {
          const Real gap = space()->ideal_distance(balls_[a].center_point, balls_[b].center_point) -
                           (balls_[a].radius + balls_[b].radius);
          if (compare_apart(gap, Real(0), 64) == Apart::Greater) return true;
          if (gap.exact() && gap.exact()->sign() == 0) return true;
        } else if (space()->ball_subset(balls_[b], balls_[a], 64)) {
          return true;
        }
      }
    }
    return false;
  }

  Ball inflated(std::size_t k, int effort) const {
    const Dyadic r = basis_.balls[k].radius + Dyadic::pow2(-std::max(effort, 1) - 8);
    return Ball{balls_[k].center, balls_[k].center_point, Real(r)};
  }

  MeasurePtr mu_;
  Basis basis_;
  std::vector<Ball> balls_;
};

}  // namespace

std::vector<double> Representation::cylinder_neg_log2(const Bits& bits, std::size_t depth, int effort) const {
  if (depth > bits.size()) throw Error(ErrorCode::InvalidArgument, "depth exceeds the prefix length");
  std::vector<double> out;
  out.reserve(depth);
  for (std::size_t n = 1; n <= depth; ++n) {
    const Bits prefix(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(n));
    out.push_back(neg_log2_lower(cylinder_bounds(prefix, effort).upper));
  }
  return out;
}

RepresentationPtr identity_representation(MeasurePtr mu) {
  return std::make_shared<IdentityRepresentation>(std::move(mu));
}

RepresentationPtr dyadic_representation(MeasurePtr mu) {
  return std::make_shared<DyadicRepresentation>(std::move(mu));
}

RepresentationPtr basis_representation(MeasurePtr mu, Basis basis) {
  return std::make_shared<BasisRepresentation>(std::move(mu), std::move(basis));
}

bool admissible_radius(const Space& space, std::uint64_t center, const Dyadic& radius,
                       const std::vector<const Measure*>& measures, std::uint32_t quality, int effort) {
  const Ball open = Ball::make(space, center, Real(radius));
  const Ball closed = Ball::make(space, center, Real(radius + Dyadic::pow2(-effort)));
  const Rational limit = make_rational(1, quality);
  return std::all_of(measures.begin(), measures.end(), [&](const Measure* mu) {
    return mu->union_upper({closed}, effort) - mu->union_lower({open}, effort) < limit;
  });
}

Basis build_basis(const SpacePtr& space, const Measure& mu, const Measure* nu, std::size_t count,
                  std::uint32_t quality, int effort) {
  if (quality < 1) throw Error(ErrorCode::InvalidArgument, "quality must be at least 1");
  std::vector<const Measure*> measures{&mu};
  if (nu) measures.push_back(nu);
  const Dyadic diameter = space->diameter().value_or(Dyadic(1));
  int finest_center = 0;
  for (std::uint64_t i = 0; i < count; ++i) finest_center = std::max(finest_center, space->ideal_level(i));
  constexpr int kResolutions = 14;
  Basis basis{space->name(), {}};
  for (std::uint64_t i = 0; i < count; ++i) {
    const Dyadic scale = diameter.shifted(-space->ideal_level(i));
    const Dyadic lo = scale.shifted(-2), width = scale.shifted(-1);
    std::optional<Dyadic> found;
    for (int j = 1; j <= kResolutions && !found; ++j) {
      for (long long m = 1; m < (1LL << j) && !found; m += 2) {
        const Dyadic r = lo + width * Dyadic::ratio(BigInt(m), j);
        if (r.level() <= finest_center) continue;
        if (admissible_radius(*space, i, r, measures, quality, effort)) found = r;
      }
    }
    if (!found) {
      throw Error(ErrorCode::SearchExhausted, "no admissible radius around ideal point " + std::to_string(i));
    }
    basis.balls.push_back({i, *found, quality, effort});
  }
  return basis;
}

std::string serialize_basis(const Basis& basis) {
  std::ostringstream out;
  out << "entropica-basis 1\n";
  out << "space " << basis.space << "\n";
  for (auto& b : basis.balls) {
    out << b.center << " " << b.radius.to_literal() << " " << b.quality << " " << b.effort << "\n";
  }
  return out.str();
}

Basis parse_basis(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "entropica-basis 1") {
    throw Error(ErrorCode::Parse, "missing or unsupported basis header");
  }
  Basis basis;
  if (!std::getline(in, line) || line.rfind("space ", 0) != 0) throw Error(ErrorCode::Parse, "missing space line");
  basis.space = line.substr(6);
  std::size_t row = 2;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    std::istringstream fields(line);
    BasisBall b;
    std::string radius, extra;
    if (!(fields >> b.center >> radius >> b.quality >> b.effort) || (fields >> extra)) {
      throw Error(ErrorCode::Parse, "bad basis line " + std::to_string(row));
    }
    b.radius = Dyadic::parse(radius);
    if (b.radius.sign() <= 0) throw Error(ErrorCode::Parse, "nonpositive radius on line " + std::to_string(row));
    basis.balls.push_back(b);
  }
  return basis;
}

RepresentationPtr builtin_representation(const std::string& name, MeasurePtr mu) {
  if (name == "identity") return identity_representation(std::move(mu));
  if (name == "dyadic") return dyadic_representation(std::move(mu));
  if (name.rfind("basis:", 0) == 0) {
    const auto colon = name.find(':', 6);
    if (colon == std::string::npos) throw Error(ErrorCode::UnknownName, "expected basis:<count>:<quality>");
    try {
      const auto count = std::stoull(name.substr(6, colon - 6));
      const auto quality = static_cast<std::uint32_t>(std::stoul(name.substr(colon + 1)));
      auto basis = build_basis(mu->space(), *mu, nullptr, count, quality);
      return basis_representation(std::move(mu), std::move(basis));
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::UnknownName, "expected basis:<count>:<quality>, got " + name);
    }
  }
  throw Error(ErrorCode::UnknownName, "unknown representation " + name);
}

}  // namespace entropica
