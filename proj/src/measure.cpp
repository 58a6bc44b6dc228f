#include "entropica/measure.hpp"

#include "entropica/error.hpp"
#include "entropica/random.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace entropica {

namespace mp = boost::multiprecision;

namespace {

Dyadic radius_lower(const Real& r, int effort) {
  Dyadic v = r.exact() ? *r.exact() : r.lower(effort);
  return v.sign() < 0 ? Dyadic(0) : v;
}

Dyadic radius_upper(const Real& r, int effort) { return r.exact() ? *r.exact() : r.upper(effort); }

// Uniform real in [0,1) whose binary digits come from the counter stream.
Real random_unit_real(std::uint64_t seed, std::uint64_t index, std::uint64_t coord) {
  return Real::from_approximator([seed, index, coord](std::int64_t n) {
    if (n <= 0) return Dyadic(0);
    const auto words = static_cast<std::uint64_t>((n + 63) / 64);
    BigInt m = 0;
    for (std::uint64_t w = 0; w < words; ++w) {
      m <<= 64;
      m += counter_hash(seed, index, (coord << 32) | w);
    }
    m >>= static_cast<unsigned>(words * 64 - static_cast<std::uint64_t>(n));
    return Dyadic(m, -n);
  });
}

using Interval = std::pair<Dyadic, Dyadic>;
using Box = std::vector<Interval>;

// Lebesgue measure of a union of axis-aligned boxes inside [0,1)^d.
Dyadic union_volume(const std::vector<Box>& boxes, std::size_t dim) {
  if (boxes.empty()) return Dyadic(0);
  if (dim + 1 == boxes.front().size()) {
    std::vector<Interval> iv;
    for (auto& b : boxes) iv.push_back(b[dim]);
    std::sort(iv.begin(), iv.end());
    Dyadic total(0);
    Dyadic lo = iv.front().first, hi = iv.front().second;
    for (std::size_t i = 1; i < iv.size(); ++i) {
      if (iv[i].first <= hi) {
        hi = std::max(hi, iv[i].second);
      } else {
        total += hi - lo;
        lo = iv[i].first;
        hi = iv[i].second;
      }
    }
    return total + (hi - lo);
  }
  std::vector<Dyadic> cuts;
  for (auto& b : boxes) {
    cuts.push_back(b[dim].first);
    cuts.push_back(b[dim].second);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  Dyadic total(0);
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    std::vector<Box> slab;
    for (auto& b : boxes) {
      if (b[dim].first <= cuts[i] && cuts[i + 1] <= b[dim].second) slab.push_back(b);
    }
    if (!slab.empty()) total += (cuts[i + 1] - cuts[i]) * union_volume(slab, dim + 1);
  }
  return total;
}

class LebesgueMeasure final : public Measure {
 public:
  LebesgueMeasure(SpacePtr space, int dim, bool periodic)
      : space_(std::move(space)), dim_(dim), periodic_(periodic) {}

  std::string name() const override { return "lebesgue_" + space_->name(); }
  const SpacePtr& space() const override { return space_; }
  Real total_mass() const override { return Real(1); }
  bool is_probability() const override { return true; }

  Bracket union_bounds(const std::vector<Ball>& balls, int effort) const override {
    return {volume(balls, effort, false).to_rational(), volume(balls, effort, true).to_rational()};
  }

  std::optional<Bracket> box_bounds(const std::vector<Interval>& box, int) const override {
    Dyadic v(1);
    for (auto& [lo, hi] : box) v *= hi - lo;
    return Bracket{v.to_rational(), v.to_rational()};
  }

  Point sample(std::uint64_t seed, std::uint64_t index) const override {
    std::vector<Real> coords;
    for (int k = 0; k < dim_; ++k) coords.push_back(random_unit_real(seed, index, static_cast<std::uint64_t>(k)));
    return Point::from_reals(space_, std::move(coords));
  }

 private:
  Dyadic volume(const std::vector<Ball>& balls, int effort, bool outer) const {
    std::vector<Box> boxes;
    for (auto& b : balls) {
      const Dyadic r = outer ? radius_upper(b.radius, effort) : radius_lower(b.radius, effort);
      if (r.is_zero()) continue;
      // Each coordinate contributes one or two pieces (wraparound).
      std::vector<std::vector<Interval>> pieces(dim_);
      for (int k = 0; k < dim_; ++k) {
        const Dyadic& c = b.center_point.coords.at(k);
        if (periodic_) {
          if (r * Dyadic(2) >= Dyadic(1)) {
            pieces[k].push_back({Dyadic(0), Dyadic(1)});
            continue;
          }
          const Dyadic lo = c - r, hi = c + r;
          if (lo.sign() < 0) {
            pieces[k].push_back({Dyadic(0), hi});
            pieces[k].push_back({lo + Dyadic(1), Dyadic(1)});
          } else if (hi > Dyadic(1)) {
            pieces[k].push_back({lo, Dyadic(1)});
            pieces[k].push_back({Dyadic(0), hi - Dyadic(1)});
          } else {
            pieces[k].push_back({lo, hi});
          }
        } else {
          const Dyadic lo = std::max(c - r, Dyadic(0)), hi = std::min(c + r, Dyadic(1));
          if (lo < hi) pieces[k].push_back({lo, hi});
        }
      }
      std::vector<Box> partial{Box{}};
      for (int k = 0; k < dim_; ++k) {
        std::vector<Box> next;
        for (auto& p : partial) {
          for (auto& iv : pieces[k]) {
            Box q = p;
            q.push_back(iv);
            next.push_back(std::move(q));
          }
        }
        partial = std::move(next);
      }
      for (auto& p : partial) boxes.push_back(std::move(p));
    }
    return union_volume(boxes, 0);
  }

  SpacePtr space_;
  int dim_;
  bool periodic_;
};

class BernoulliMeasure final : public Measure {
 public:
  explicit BernoulliMeasure(Rational p) : space_(builtin_space("cantor")), p_(std::move(p)) {
    if (p_ <= 0 || p_ >= 1) throw Error(ErrorCode::InvalidArgument, "bernoulli parameter must lie in (0,1)");
    // Sampling threshold: p rounded to 53 bits.
    const BigInt scaled_p = (mp::numerator(p_) << 53) / mp::denominator(p_);
    threshold_ = scaled_p.convert_to<std::uint64_t>();
    log2_p_ = std::log2(static_cast<long double>(rational_to_double(p_)));
    log2_q_ = std::log2(static_cast<long double>(rational_to_double(1 - p_)));
  }

  std::string name() const override {
    return p_ == make_rational(1, 2) ? "uniform_cantor" : "bernoulli(" + rational_to_string(p_) + ")";
  }
  const SpacePtr& space() const override { return space_; }
  Real total_mass() const override { return Real(1); }
  bool is_probability() const override { return true; }

  Bracket union_bounds(const std::vector<Ball>& balls, int effort) const override {
    return {cylinder_union(balls, effort, false), cylinder_union(balls, effort, true)};
  }

  Point sample(std::uint64_t seed, std::uint64_t index) const override {
    const std::uint64_t threshold = threshold_;
    return Point(space_, [seed, index, threshold](std::int64_t n) {
      IdealPoint d;
      for (std::int64_t k = 0; k < n; ++k) {
        d.bits.push_back((counter_hash(seed, index, static_cast<std::uint64_t>(k)) >> 11) < threshold ? 1 : 0);
      }
      return d;
    });
  }

  std::vector<double> cylinder_neg_log2(const std::vector<std::uint8_t>& bits, std::size_t depth,
                                        int) const override {
    std::vector<double> out;
    out.reserve(depth);
    const bool fair = p_ == make_rational(1, 2);
    long double acc = 0;
    for (std::size_t n = 1; n <= depth; ++n) {
      const auto b = n <= bits.size() ? bits[n - 1] : 0;
      acc -= b ? log2_p_ : log2_q_;
      // Rounded down so the value stays a lower bound.
      out.push_back(fair ? static_cast<double>(n) : static_cast<double>(acc * (1 - 1e-12L) - 1e-9L));
    }
    return out;
  }

 private:
  Rational cylinder_union(const std::vector<Ball>& balls, int effort, bool outer) const {
    std::vector<std::vector<std::uint8_t>> prefixes;
    for (auto& b : balls) {
      const Dyadic r = outer ? radius_upper(b.radius, effort) : radius_lower(b.radius, effort);
      if (r.is_zero()) continue;
      const std::size_t len = cantor_cylinder_length(r);
      std::vector<std::uint8_t> s(len, 0);
      for (std::size_t i = 0; i < len && i < b.center_point.bits.size(); ++i) s[i] = b.center_point.bits[i];
      prefixes.push_back(std::move(s));
    }
    std::sort(prefixes.begin(), prefixes.end());
    Rational total = 0;
    const std::vector<std::uint8_t>* kept = nullptr;
    for (auto& s : prefixes) {
      if (kept && kept->size() <= s.size() && std::equal(kept->begin(), kept->end(), s.begin())) continue;
      total += bernoulli_cylinder(p_, s);
      kept = &s;
    }
    return total;
  }

  SpacePtr space_;
  Rational p_;
  std::uint64_t threshold_ = 0;
  long double log2_p_ = 0, log2_q_ = 0;
};

class ScaledMeasure final : public Measure {
 public:
  ScaledMeasure(MeasurePtr base, Rational factor) : base_(std::move(base)), factor_(std::move(factor)) {
    if (factor_ <= 0) throw Error(ErrorCode::InvalidArgument, "scale factor must be positive");
  }

  std::string name() const override {
    return "scaled(" + base_->name() + "," + rational_to_string(factor_) + ")";
  }
  const SpacePtr& space() const override { return base_->space(); }
  Real total_mass() const override { return base_->total_mass() * Real::from_rational(factor_); }
  bool is_probability() const override { return factor_ == 1 && base_->is_probability(); }
  Bracket union_bounds(const std::vector<Ball>& balls, int effort) const override {
    const Bracket b = base_->union_bounds(balls, effort);
    return {b.lower * factor_, b.upper * factor_};
  }
  std::optional<Bracket> box_bounds(const std::vector<Interval>& box, int effort) const override {
    auto b = base_->box_bounds(box, effort);
    if (!b) return std::nullopt;
    return Bracket{b->lower * factor_, b->upper * factor_};
  }
  Point sample(std::uint64_t seed, std::uint64_t index) const override { return base_->sample(seed, index); }
  std::vector<double> cylinder_neg_log2(const std::vector<std::uint8_t>& bits, std::size_t depth,
                                        int effort) const override {
    auto out = base_->cylinder_neg_log2(bits, depth, effort);
    const double shift = log2_upper(factor_);
    for (auto& v : out) v -= shift;
    return out;
  }

  // Exact for powers of two, otherwise nudged upward.
  static double log2_upper(const Rational& q) {
    const auto k = floor_log2(q);
    if (Dyadic::pow2(k).to_rational() == q) return static_cast<double>(k);
    return std::log2(rational_to_double(q)) + 1e-9;
  }

 private:
  MeasurePtr base_;
  Rational factor_;
};

class AtomicMeasure final : public Measure {
 public:
  AtomicMeasure(SpacePtr space, FiniteRationalMeasure atoms)
      : space_(std::move(space)), atoms_(atoms.canonical()) {
    for (auto& [idx, w] : atoms_.atoms) points_.push_back(space_->ideal(idx));
    total_ = atoms_.total();
  }

  std::string name() const override {
    std::string out = "atomic(";
    for (std::size_t i = 0; i < atoms_.atoms.size(); ++i) {
      if (i) out += ";";
      out += std::to_string(atoms_.atoms[i].first) + ":" + rational_to_string(atoms_.atoms[i].second);
    }
    return out + ")";
  }
  const SpacePtr& space() const override { return space_; }
  Real total_mass() const override { return Real::from_rational(total_); }
  bool is_probability() const override { return total_ == 1; }

  Bracket union_bounds(const std::vector<Ball>& balls, int effort) const override {
    Bracket out{0, 0};
    for (std::size_t a = 0; a < points_.size(); ++a) {
      bool inside = false, maybe = false;
      for (auto& b : balls) {
        const Real d = space_->ideal_distance(points_[a], b.center_point);
        if (d.exact() && b.radius.exact()) {
          // Exact data decide membership outright.
          if (*d.exact() < *b.radius.exact()) inside = true;
        } else {
          const Apart cmp = compare_apart(d, b.radius, effort);
          if (cmp == Apart::Less) inside = true;
          if (cmp == Apart::Indistinguishable) maybe = true;
        }
        if (inside) break;
      }
      if (inside) out.lower += atoms_.atoms[a].second;
      if (inside || maybe) out.upper += atoms_.atoms[a].second;
    }
    return out;
  }

  Point sample(std::uint64_t seed, std::uint64_t index) const override {
    if (atoms_.atoms.empty()) throw Error(ErrorCode::ZeroMass, "cannot sample the zero measure");
    const double u = counter_uniform(seed, index, 0) * rational_to_double(total_);
    double acc = 0;
    for (std::size_t a = 0; a < atoms_.atoms.size(); ++a) {
      acc += rational_to_double(atoms_.atoms[a].second);
      if (u < acc) return Point::exact(space_, points_[a]);
    }
    return Point::exact(space_, points_.back());
  }

 private:
  SpacePtr space_;
  FiniteRationalMeasure atoms_;
  std::vector<IdealPoint> points_;
  Rational total_;
};

class SumMeasure final : public Measure {
 public:
  explicit SumMeasure(std::vector<MeasurePtr> parts) : parts_(std::move(parts)) {
    if (parts_.empty()) throw Error(ErrorCode::InvalidArgument, "empty measure sum");
    for (auto& p : parts_) {
      if (p->space()->name() != parts_.front()->space()->name()) {
        throw Error(ErrorCode::InvalidArgument, "measures live on different spaces");
      }
    }
  }

  std::string name() const override {
    std::string out = "sum(";
    for (std::size_t i = 0; i < parts_.size(); ++i) out += (i ? "," : "") + parts_[i]->name();
    return out + ")";
  }
  const SpacePtr& space() const override { return parts_.front()->space(); }
  Real total_mass() const override {
    Real t = parts_.front()->total_mass();
    for (std::size_t i = 1; i < parts_.size(); ++i) t = t + parts_[i]->total_mass();
    return t;
  }
  bool is_probability() const override {
    const Real t = total_mass();
    return t.exact() && *t.exact() == Dyadic(1);
  }
  Bracket union_bounds(const std::vector<Ball>& balls, int effort) const override {
    Bracket out{0, 0};
    for (auto& p : parts_) {
      const Bracket b = p->union_bounds(balls, effort);
      out.lower += b.lower;
      out.upper += b.upper;
    }
    return out;
  }
  std::optional<Bracket> box_bounds(const std::vector<Interval>& box, int effort) const override {
    Bracket out{0, 0};
    for (auto& p : parts_) {
      auto b = p->box_bounds(box, effort);
      if (!b) return std::nullopt;
      out.lower += b->lower;
      out.upper += b->upper;
    }
    return out;
  }
  Point sample(std::uint64_t seed, std::uint64_t index) const override {
    std::vector<double> w;
    double total = 0;
    for (auto& p : parts_) {
      w.push_back(p->total_mass().approx(40).to_double());
      total += w.back();
    }
    const double u = counter_uniform(seed, index, 0x6d6978) * total;
    double acc = 0;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      acc += w[i];
      if (u < acc) return parts_[i]->sample(splitmix64(seed ^ 0x6d6978), index);
    }
    return parts_.back()->sample(splitmix64(seed ^ 0x6d6978), index);
  }
  std::vector<double> cylinder_neg_log2(const std::vector<std::uint8_t>& bits, std::size_t depth,
                                        int effort) const override {
    std::vector<double> out(depth, 0.0);
    std::vector<std::vector<double>> each;
    for (auto& p : parts_) each.push_back(p->cylinder_neg_log2(bits, depth, effort));
    for (std::size_t n = 0; n < depth; ++n) {
      long double s = 0;
      for (auto& e : each) s += std::exp2(-static_cast<long double>(e[n]));
      out[n] = static_cast<double>(-std::log2(s) * (1 + 1e-12L) - 1e-9L);
    }
    return out;
  }

 private:
  std::vector<MeasurePtr> parts_;
};

class NormalizedMeasure final : public Measure {
 public:
  NormalizedMeasure(MeasurePtr base, int min_log2_mass) : base_(std::move(base)), floor_(min_log2_mass) {}

  std::string name() const override { return "normalized(" + base_->name() + ")"; }
  const SpacePtr& space() const override { return base_->space(); }
  Real total_mass() const override { return Real(1); }
  bool is_probability() const override { return true; }
  Bracket union_bounds(const std::vector<Ball>& balls, int effort) const override {
    const Bracket b = base_->union_bounds(balls, effort);
    const Bracket t = base_->total_mass_bounds(std::max(effort, floor_ + 2));
    Rational up = b.upper / t.lower;
    return {b.lower / t.upper, up > 1 ? Rational(1) : up};
  }
  std::optional<Bracket> box_bounds(const std::vector<Interval>& box, int effort) const override {
    auto b = base_->box_bounds(box, effort);
    if (!b) return std::nullopt;
    const Bracket t = base_->total_mass_bounds(std::max(effort, floor_ + 2));
    Rational up = b->upper / t.lower;
    return Bracket{b->lower / t.upper, up > 1 ? Rational(1) : up};
  }
  Point sample(std::uint64_t seed, std::uint64_t index) const override { return base_->sample(seed, index); }
  std::vector<double> cylinder_neg_log2(const std::vector<std::uint8_t>& bits, std::size_t depth,
                                        int effort) const override {
    auto out = base_->cylinder_neg_log2(bits, depth, effort);
    const Bracket t = base_->total_mass_bounds(std::max(effort, floor_ + 2));
    const double shift = std::log2(rational_to_double(t.lower)) - 1e-9;
    for (auto& v : out) v += shift;
    return out;
  }

 private:
  MeasurePtr base_;
  int floor_;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

Point Measure::sample(std::uint64_t, std::uint64_t) const {
  throw Error(ErrorCode::Unsupported, "measure " + name() + " is not sampleable");
}

std::vector<double> Measure::cylinder_neg_log2(const std::vector<std::uint8_t>& bits, std::size_t depth,
                                               int effort) const {
  if (space()->name() != "cantor") throw Error(ErrorCode::Unsupported, "cylinder masses need the Cantor space");
  std::vector<double> out;
  for (std::size_t n = 1; n <= depth; ++n) {
    IdealPoint c;
    c.bits.assign(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(std::min(n, bits.size())));
    c.bits.resize(n, 0);
    const Ball cyl = Ball::around(*space(), c, Real(Dyadic::ratio(BigInt(3), static_cast<std::int64_t>(n) + 1)));
    const Rational up = union_upper({cyl}, effort);
    if (up <= 0) throw Error(ErrorCode::ZeroCylinder, "cylinder of length " + std::to_string(n) + " has zero mass");
    out.push_back(-std::log2(rational_to_double(up)) - 1e-9);
  }
  return out;
}

std::optional<Bracket> Measure::box_bounds(const std::vector<std::pair<Dyadic, Dyadic>>&, int) const {
  return std::nullopt;
}

Bracket Measure::total_mass_bounds(int effort) const {
  const Real t = total_mass();
  Rational lo = t.lower(effort).to_rational();
  if (lo < 0) lo = 0;
  return {lo, t.upper(effort).to_rational()};
}

Rational FiniteRationalMeasure::total() const {
  Rational t = 0;
  for (auto& [i, w] : atoms) t += w;
  return t;
}

FiniteRationalMeasure FiniteRationalMeasure::canonical() const {
  std::map<std::uint64_t, Rational> merged;
  for (auto& [i, w] : atoms) {
    if (w < 0) throw Error(ErrorCode::InvalidArgument, "negative atom weight");
    merged[i] += w;
  }
  FiniteRationalMeasure out;
  for (auto& [i, w] : merged) {
    if (w > 0) out.atoms.emplace_back(i, w);
  }
  return out;
}

Rational bernoulli_cylinder(const Rational& p, const std::vector<std::uint8_t>& bits) {
  std::size_t ones = 0;
  for (auto b : bits) ones += b ? 1 : 0;
  const auto zeros = static_cast<unsigned>(bits.size() - ones);
  const BigInt pn = mp::numerator(p), pd = mp::denominator(p);
  const BigInt num = mp::pow(pn, static_cast<unsigned>(ones)) * mp::pow(BigInt(pd - pn), zeros);
  const BigInt den = mp::pow(pd, static_cast<unsigned>(bits.size()));
  return Rational(num, den);
}

MeasurePtr lebesgue(SpacePtr space) {
  const std::string n = space->name();
  if (n == "interval") return std::make_shared<LebesgueMeasure>(std::move(space), 1, false);
  if (n == "circle") return std::make_shared<LebesgueMeasure>(std::move(space), 1, true);
  if (n == "torus2") return std::make_shared<LebesgueMeasure>(std::move(space), 2, true);
  if (n == "torus3") return std::make_shared<LebesgueMeasure>(std::move(space), 3, true);
  throw Error(ErrorCode::UnknownName, "no Lebesgue measure on " + n);
}

MeasurePtr bernoulli(const Rational& p) { return std::make_shared<BernoulliMeasure>(p); }
MeasurePtr uniform_cantor() { return bernoulli(make_rational(1, 2)); }

MeasurePtr scaled(MeasurePtr base, const Rational& factor) {
  return std::make_shared<ScaledMeasure>(std::move(base), factor);
}

MeasurePtr atomic(SpacePtr space, FiniteRationalMeasure atoms) {
  return std::make_shared<AtomicMeasure>(std::move(space), std::move(atoms));
}

MeasurePtr sum(std::vector<MeasurePtr> parts) { return std::make_shared<SumMeasure>(std::move(parts)); }

MeasurePtr normalize(MeasurePtr mu, int min_log2_mass) {
  const Real t = mu->total_mass();
  if (mu->is_probability() && t.exact() && *t.exact() == Dyadic(1)) return mu;
  if (t.lower(min_log2_mass + 2) <= Dyadic::pow2(-min_log2_mass)) {
    throw Error(ErrorCode::ZeroMass, "total mass of " + mu->name() + " is not certified positive");
  }
  return std::make_shared<NormalizedMeasure>(std::move(mu), min_log2_mass);
}

MeasurePtr builtin_measure(const std::string& raw) {
  const std::string name = trim(raw);
  if (name == "uniform_cantor") return uniform_cantor();
  if (name == "lebesgue_interval") return lebesgue(builtin_space("interval"));
  if (name == "lebesgue_circle") return lebesgue(builtin_space("circle"));
  if (name == "lebesgue_torus2") return lebesgue(builtin_space("torus2"));
  if (name == "lebesgue_torus3") return lebesgue(builtin_space("torus3"));
  auto args = [&](const std::string& head) -> std::optional<std::string> {
    if (name.rfind(head + "(", 0) != 0 || name.back() != ')') return std::nullopt;
    return name.substr(head.size() + 1, name.size() - head.size() - 2);
  };
  if (auto a = args("bernoulli")) return bernoulli(parse_rational(trim(*a)));
  if (auto a = args("scaled")) {
    int depth = 0;
    std::size_t split = std::string::npos;
    for (std::size_t i = 0; i < a->size(); ++i) {
      if ((*a)[i] == '(') ++depth;
      if ((*a)[i] == ')') --depth;
      if ((*a)[i] == ',' && depth == 0) split = i;
    }
    if (split == std::string::npos) throw Error(ErrorCode::Parse, "scaled(name, c) needs two arguments");
    return scaled(builtin_measure(a->substr(0, split)), parse_rational(trim(a->substr(split + 1))));
  }
  throw Error(ErrorCode::UnknownName, "unknown measure: " + name);
}

Rational prokhorov(const FiniteRationalMeasure& mu_in, const FiniteRationalMeasure& nu_in, const Space& space,
                   int precision, std::size_t atom_limit) {
  const auto mu = mu_in.canonical(), nu = nu_in.canonical();
  if (mu.total() != 1 || nu.total() != 1) {
    throw Error(ErrorCode::InvalidArgument, "prokhorov needs probability measures");
  }
  const std::size_t k = mu.atoms.size();
  if (k > atom_limit || k > 24) {
    throw Error(ErrorCode::Unsupported, "prokhorov subset enumeration limited to " + std::to_string(atom_limit) + " atoms");
  }
  // d(x_a, y_b) for mu atom a and nu atom b.
  std::vector<std::vector<Dyadic>> dist(nu.atoms.size(), std::vector<Dyadic>(k));
  for (std::size_t b = 0; b < nu.atoms.size(); ++b) {
    const IdealPoint y = space.ideal(nu.atoms[b].first);
    for (std::size_t a = 0; a < k; ++a) {
      const Real d = space.ideal_distance(space.ideal(mu.atoms[a].first), y);
      dist[b][a] = d.exact() ? *d.exact() : d.approx(precision + 8);
    }
  }
  const std::size_t subsets = std::size_t{1} << k;
  std::vector<Rational> mass(subsets, Rational(0));
  for (std::size_t m = 1; m < subsets; ++m) {
    const auto low = static_cast<std::size_t>(__builtin_ctzll(m));
    mass[m] = mass[m & (m - 1)] + mu.atoms[low].second;
  }
  auto feasible = [&](const Dyadic& eps) {
    const Rational e = eps.to_rational();
    std::vector<std::size_t> near(nu.atoms.size(), 0);
    for (std::size_t b = 0; b < nu.atoms.size(); ++b) {
      for (std::size_t a = 0; a < k; ++a) {
        if (dist[b][a] < eps) near[b] |= std::size_t{1} << a;
      }
    }
    for (std::size_t m = 1; m < subsets; ++m) {
      Rational reach = e;
      for (std::size_t b = 0; b < nu.atoms.size(); ++b) {
        if (near[b] & m) reach += nu.atoms[b].second;
      }
      if (mass[m] > reach) return false;
    }
    return true;
  };
  Dyadic lo(0), hi(1);
  while (hi - lo > Dyadic::pow2(-precision)) {
    const Dyadic mid = (lo + hi).shifted(-1);
    if (feasible(mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi.to_rational();
}

}  // namespace entropica
