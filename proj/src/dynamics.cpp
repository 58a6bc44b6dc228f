#include "entropica/dynamics.hpp"

#include "entropica/error.hpp"
#include "entropica/random.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <mutex>

namespace entropica {

namespace {

std::optional<Dyadic> exact_coord(const Point& x, std::size_t c) {
  if (x.exact()) return x.exact()->coords.at(c);
  if (c < x.exact_coords().size()) return x.exact_coords()[c];
  return std::nullopt;
}

std::int64_t integer_time(const Real& t) {
  if (!t.exact() || !t.exact()->is_integer()) throw Error(ErrorCode::InvalidArgument, "discrete time must be an integer");
  const BigInt v = t.exact()->floor();
  if (v > BigInt(1) << 40 || v < -(BigInt(1) << 40)) throw Error(ErrorCode::InvalidArgument, "time out of range");
  return v.convert_to<std::int64_t>();
}

// ---- baker map ----------------------------------------------------------

struct BakerState {
  Dyadic x, y;
  std::optional<std::int64_t> ex, ey;  // error exponents; empty when exact
};

// floor(2v) for v in [0, 1) known within 2^e; empty when undecided.
std::optional<int> baker_branch(const Dyadic& v, std::optional<std::int64_t> e) {
  const Dyadic half = Dyadic::pow2(-1);
  if (!e) return v >= half ? 1 : 0;
  const Dyadic eps = Dyadic::pow2(*e);
  const Dyadic lo = v - eps, hi = v + eps;
  if (lo.sign() >= 0 && hi < half) return 0;
  if (lo >= half && hi < Dyadic(1)) return 1;
  return std::nullopt;
}

// B(x, y) = (2x mod 1, (y + floor(2x)) / 2); B^-1(x, y) = ((x + floor(2y)) / 2, 2y mod 1).
std::optional<BakerState> baker_steps(BakerState p, std::int64_t k) {
  const std::int64_t steps = k < 0 ? -k : k;
  for (std::int64_t i = 0; i < steps; ++i) {
    if (k > 0) {
      const auto b = baker_branch(p.x, p.ex);
      if (!b) return std::nullopt;
      p.x = p.x.shifted(1) - Dyadic(*b);
      p.y = (p.y + Dyadic(*b)).shifted(-1);
      if (p.ex) ++*p.ex;
      if (p.ey) --*p.ey;
    } else {
      const auto b = baker_branch(p.y, p.ey);
      if (!b) return std::nullopt;
      p.y = p.y.shifted(1) - Dyadic(*b);
      p.x = (p.x + Dyadic(*b)).shifted(-1);
      if (p.ey) ++*p.ey;
      if (p.ex) --*p.ex;
    }
  }
  p.x = p.x.frac();
  p.y = p.y.frac();
  return p;
}

constexpr std::int64_t kExtraPrecision = 128;

// B^k on coordinates 0 and 1 of x, within 2^-n.
std::pair<Dyadic, Dyadic> baker_approx(const Point& x, std::int64_t k, std::int64_t n) {
  const auto x0 = exact_coord(x, 0), y0 = exact_coord(x, 1);
  const std::int64_t steps = k < 0 ? -k : k;
  for (std::int64_t m = n + steps + 1; m <= n + steps + 1 + kExtraPrecision; m += 16) {
    IdealPoint a;
    if (!x0 || !y0) a = x.approx(m);
    BakerState p{x0 ? *x0 : a.coords.at(0), y0 ? *y0 : a.coords.at(1), std::nullopt, std::nullopt};
    if (!x0) p.ex = -m;
    if (!y0) p.ey = -m;
    if (auto r = baker_steps(p, k)) return {r->x, r->y};
  }
  throw Error(ErrorCode::PrecisionUnreachable, "baker branch undecided near a discontinuity");
}

// Exact coordinates of B^k x that survive partial exactness.
std::pair<std::optional<Dyadic>, std::optional<Dyadic>> baker_exact(const Point& x, std::int64_t k) {
  const auto x0 = exact_coord(x, 0), y0 = exact_coord(x, 1);
  if (x0 && y0) {
    const auto r = baker_steps({*x0, *y0, std::nullopt, std::nullopt}, k);
    return {r->x, r->y};
  }
  if (k >= 0 && x0) return {x0->shifted(k).frac(), std::nullopt};
  if (k < 0 && y0) return {std::nullopt, y0->shifted(-k).frac()};
  return {std::nullopt, std::nullopt};
}

class BakersMap final : public Dynamics {
 public:
  BakersMap() : space_(builtin_space("torus2")) {}
  std::string name() const override { return "bakers_map"; }
  TimeKind time_kind() const override { return TimeKind::Discrete; }
  const SpacePtr& space() const override { return space_; }
  MeasurePtr invariant_measure() const override { return builtin_measure("lebesgue_torus2"); }
  int expansion() const override { return 1; }

 protected:
  Point flow(const Real& t, const Point& x) const override {
    const std::int64_t k = integer_time(t);
    const auto [ex, ey] = baker_exact(x, k);
    if (ex && ey) return Point::exact(space_, IdealPoint{{*ex, *ey}, {}});
    return Point(
        space_,
        [x, k](std::int64_t n) {
          auto [a, b] = baker_approx(x, k, n);
          return IdealPoint{{a, b}, {}};
        },
        {ex, ey});
  }

 private:
  SpacePtr space_;
};

// ---- cat map -------------------------------------------------------------

std::pair<Dyadic, Dyadic> cat_steps(Dyadic x, Dyadic y, std::int64_t k) {
  const std::int64_t steps = k < 0 ? -k : k;
  for (std::int64_t i = 0; i < steps; ++i) {
    Dyadic nx, ny;
    if (k > 0) {
      nx = x.shifted(1) + y;
      ny = x + y;
    } else {
      nx = x - y;
      ny = y.shifted(1) - x;
    }
    x = nx.frac();
    y = ny.frac();
  }
  return {x, y};
}

class CatMap final : public Dynamics {
 public:
  CatMap() : space_(builtin_space("torus2")) {}
  std::string name() const override { return "cat_map"; }
  TimeKind time_kind() const override { return TimeKind::Discrete; }
  const SpacePtr& space() const override { return space_; }
  MeasurePtr invariant_measure() const override { return builtin_measure("lebesgue_torus2"); }
  // Each step multiplies errors by at most 3 in the max norm.
  int expansion() const override { return 2; }

 protected:
  Point flow(const Real& t, const Point& x) const override {
    const std::int64_t k = integer_time(t);
    const auto x0 = exact_coord(x, 0), y0 = exact_coord(x, 1);
    if (x0 && y0) {
      auto [a, b] = cat_steps(*x0, *y0, k);
      return Point::exact(space_, IdealPoint{{a, b}, {}});
    }
    return Point(space_, [x, k, x0, y0](std::int64_t n) {
      const std::int64_t m = n + 2 * (k < 0 ? -k : k) + 2;
      const IdealPoint a = x.approx(m);
      auto [u, v] = cat_steps(x0 ? *x0 : a.coords.at(0), y0 ? *y0 : a.coords.at(1), k);
      return IdealPoint{{u, v}, {}};
    });
  }

 private:
  SpacePtr space_;
};

// ---- translation flows -----------------------------------------------------

class TranslationFlow final : public Dynamics {
 public:
  TranslationFlow(std::string name, SpacePtr space, std::vector<Real> omega)
      : name_(std::move(name)), space_(std::move(space)), omega_(std::move(omega)) {}
  std::string name() const override { return name_; }
  TimeKind time_kind() const override { return TimeKind::Continuous; }
  const SpacePtr& space() const override { return space_; }
  MeasurePtr invariant_measure() const override { return lebesgue(space_); }

 protected:
  Point flow(const Real& t, const Point& x) const override {
    std::vector<Real> shift;
    std::vector<std::optional<Dyadic>> exact;
    bool all_exact = true;
    for (std::size_t c = 0; c < omega_.size(); ++c) {
      shift.push_back(t * omega_[c]);
      const auto xc = exact_coord(x, c);
      if (xc && shift.back().exact()) {
        exact.push_back((*xc + *shift.back().exact()).frac());
      } else {
        exact.push_back(std::nullopt);
        all_exact = false;
      }
    }
    if (all_exact) {
      IdealPoint p;
      for (auto& c : exact) p.coords.push_back(*c);
      return Point::exact(space_, std::move(p));
    }
    return Point(
        space_,
        [x, shift, exact](std::int64_t n) {
          IdealPoint p;
          std::optional<IdealPoint> a;
          for (std::size_t c = 0; c < shift.size(); ++c) {
            if (exact[c]) {
              p.coords.push_back(*exact[c]);
              continue;
            }
            if (!a) a = x.approx(n + 2);
            p.coords.push_back((a->coords.at(c) + shift[c].approx(n + 2)).frac());
          }
          return p;
        },
        exact);
  }

 private:
  std::string name_;
  SpacePtr space_;
  std::vector<Real> omega_;
};

// ---- shift -----------------------------------------------------------------

class ShiftMap final : public Dynamics {
 public:
  ShiftMap() : space_(builtin_space("cantor")) {}
  std::string name() const override { return "shift_cantor"; }
  TimeKind time_kind() const override { return TimeKind::Discrete; }
  const SpacePtr& space() const override { return space_; }
  MeasurePtr invariant_measure() const override { return uniform_cantor(); }
  bool invertible() const override { return false; }
  int expansion() const override { return 1; }

 protected:
  Point flow(const Real& t, const Point& x) const override {
    const std::int64_t k = integer_time(t);
    auto drop = [k](std::vector<std::uint8_t> bits) -> std::vector<std::uint8_t> {
      const auto cut = static_cast<std::size_t>(k);
      if (cut >= bits.size()) return {};
      return {bits.begin() + static_cast<std::ptrdiff_t>(cut), bits.end()};
    };
    if (x.exact()) return Point::exact(space_, IdealPoint{{}, drop(x.exact()->bits)});
    return Point(space_, [x, k, drop](std::int64_t n) { return IdealPoint{{}, drop(x.approx(n + k + 1).bits)}; });
  }

 private:
  SpacePtr space_;
};

// ---- baker x rotation suspension ---------------------------------------------

// On torus3 with state (x, y, s): G^t(x, y, s) = (B^floor(s + vt)(x, y), frac(s + vt)).
// The phase s moves at speed v; each full turn applies one baker step.
class BakerRotation final : public Dynamics {
 public:
  explicit BakerRotation(Real speed) : space_(builtin_space("torus3")), speed_(std::move(speed)) {}
  std::string name() const override { return "baker_rotation"; }
  TimeKind time_kind() const override { return TimeKind::Continuous; }
  const SpacePtr& space() const override { return space_; }
  MeasurePtr invariant_measure() const override { return builtin_measure("lebesgue_torus3"); }
  int expansion() const override {
    const Dyadic hi = speed_.upper(8).abs() + Dyadic(1);
    return static_cast<int>(hi.ceil().convert_to<long long>());
  }

 protected:
  Point flow(const Real& t, const Point& x) const override {
    const Real vt = speed_ * t;
    const auto s0 = exact_coord(x, 2);
    const std::int64_t turns = count_turns(x, s0, vt);
    auto [ex, ey] = baker_exact(x, turns);
    std::optional<Dyadic> es;
    if (s0 && vt.exact()) es = (*s0 + *vt.exact()).frac();
    if (ex && ey && es) return Point::exact(space_, IdealPoint{{*ex, *ey, *es}, {}});
    return Point(
        space_,
        [x, turns, vt, s0, es](std::int64_t n) {
          auto [a, b] = baker_approx(x, turns, n);
          Dyadic s;
          if (es) {
            s = *es;
          } else {
            const Dyadic base = s0 ? *s0 : x.approx(n + 2).coords.at(2);
            s = (base + vt.approx(n + 2)).frac();
          }
          return IdealPoint{{a, b, s}, {}};
        },
        {ex, ey, es});
  }

 private:
  // floor(s + vt), certified; s must not be near the seam when inexact.
  static std::int64_t count_turns(const Point& x, const std::optional<Dyadic>& s0, const Real& vt) {
    if (s0 && vt.exact()) return to_int((*s0 + *vt.exact()).floor());
    for (std::int64_t m = 8; m <= kExtraPrecision; m += 8) {
      Dyadic s;
      Dyadic eps = Dyadic::pow2(-m - 1);
      if (s0) {
        s = *s0;
      } else {
        s = x.approx(m + 1).coords.at(2);
        // An approximation close to the seam may belong to either side.
        if ((s - eps).sign() < 0 || s + eps >= Dyadic(1)) continue;
      }
      const Dyadic u = s + (vt.exact() ? *vt.exact() : vt.approx(m + 1));
      if (!vt.exact() || !s0) eps = Dyadic::pow2(-m);
      const BigInt lo = (u - eps).floor(), hi = (u + eps).floor();
      if (lo == hi) return to_int(lo);
    }
    throw Error(ErrorCode::PrecisionUnreachable, "phase too close to a whole turn");
  }

  static std::int64_t to_int(const BigInt& v) {
    if (v > BigInt(1) << 40 || v < -(BigInt(1) << 40)) throw Error(ErrorCode::InvalidArgument, "time out of range");
    return v.convert_to<std::int64_t>();
  }

  SpacePtr space_;
  Real speed_;
};

// ---- real expressions --------------------------------------------------------

class RealParser {
 public:
  explicit RealParser(const std::string& text) : s_(text) {}

  Real parse() {
    Real v = expr();
    skip();
    if (i_ != s_.size()) fail();
    return v;
  }

 private:
  Real expr() {
    Real v = term();
    for (;;) {
      skip();
      if (eat('+')) {
        v = v + term();
      } else if (eat('-')) {
        v = v - term();
      } else {
        return v;
      }
    }
  }

  Real term() {
    Real v = factor();
    for (;;) {
      skip();
      if (eat('*')) {
        v = v * factor();
      } else if (eat('/')) {
        const Rational d = number();
        if (d == 0) fail();
        v = v * Real::from_rational(1 / d);
      } else {
        return v;
      }
    }
  }

  Real factor() {
    skip();
    if (eat('-')) return -factor();
    if (eat('(')) {
      Real v = expr();
      skip();
      if (!eat(')')) fail();
      return v;
    }
    if (s_.compare(i_, 5, "sqrt(") == 0) {
      i_ += 5;
      const Rational k = number();
      skip();
      if (!eat(')') || denominator(k) != 1 || k < 0) fail();
      return Real::sqrt_of(numerator(k).convert_to<unsigned long long>());
    }
    const Rational q = number();
    // Dyadic literals stay exact.
    const auto den = denominator(q);
    if ((den & (den - 1)) == 0) {
      return Real(Dyadic(numerator(q), 0) * Dyadic::pow2(-static_cast<std::int64_t>(boost::multiprecision::msb(den))));
    }
    return Real::from_rational(q);
  }

  Rational number() {
    skip();
    const std::size_t start = i_;
    while (i_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[i_])) || s_[i_] == '.')) ++i_;
    if (start == i_) fail();
    return parse_rational(s_.substr(start, i_ - start));
  }

  void skip() {
    while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
  }
  bool eat(char c) {
    if (i_ < s_.size() && s_[i_] == c) {
      ++i_;
      return true;
    }
    return false;
  }
  [[noreturn]] void fail() const { throw Error(ErrorCode::Parse, "bad real expression: " + s_); }

  std::string s_;
  std::size_t i_ = 0;
};

std::vector<std::string> split_args(const std::string& spec, std::string& head) {
  const auto open = spec.find('(');
  if (open == std::string::npos) {
    head = spec;
    return {};
  }
  if (spec.back() != ')') throw Error(ErrorCode::Parse, "unbalanced parameters in " + spec);
  head = spec.substr(0, open);
  std::vector<std::string> args;
  int depth = 0;
  std::string cur;
  for (std::size_t i = open + 1; i + 1 < spec.size(); ++i) {
    const char c = spec[i];
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      args.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  args.push_back(cur);
  return args;
}

}  // namespace

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Indistinguishable: return "indistinguishable";
  }
  return "?";
}

Point Dynamics::evolve(const Real& t, const Point& x, int precision) const {
  if (x.space().name() != space()->name()) {
    throw Error(ErrorCode::InvalidArgument, name() + " acts on " + space()->name() + ", not " + x.space().name());
  }
  if (time_kind() == TimeKind::Discrete) integer_time(t);
  if (!invertible() && compare_apart(t, Real(0), 8) == Apart::Less) {
    throw Error(ErrorCode::InvalidArgument, name() + " only runs forward in time");
  }
  Point out = flow(t, x);
  out.approx(precision);
  return out;
}

Real parse_real(const std::string& text) { return RealParser(text).parse(); }

DynamicsPtr builtin_dynamics(const std::string& spec) {
  std::string head;
  const auto args = split_args(spec, head);
  auto arg = [&](std::size_t i, const char* fallback) { return parse_real(i < args.size() ? args[i] : fallback); };
  auto arity = [&](std::size_t n) {
    if (args.size() > n) throw Error(ErrorCode::InvalidArgument, head + " takes at most " + std::to_string(n) + " parameters");
  };
  if (head == "rotation_flow") {
    arity(1);
    return std::make_shared<TranslationFlow>(head, builtin_space("circle"), std::vector<Real>{arg(0, "sqrt(2)-1")});
  }
  if (head == "torus_translation_flow") {
    arity(2);
    return std::make_shared<TranslationFlow>(head, builtin_space("torus2"),
                                             std::vector<Real>{arg(0, "sqrt(2)-1"), arg(1, "sqrt(3)-1")});
  }
  if (head == "bakers_map") {
    arity(0);
    return std::make_shared<BakersMap>();
  }
  if (head == "cat_map") {
    arity(0);
    return std::make_shared<CatMap>();
  }
  if (head == "shift_cantor") {
    arity(0);
    return std::make_shared<ShiftMap>();
  }
  if (head == "baker_rotation") {
    arity(1);
    return std::make_shared<BakerRotation>(arg(0, "8*(sqrt(2)-1)"));
  }
  throw Error(ErrorCode::UnknownName, "unknown system " + spec);
}

std::vector<std::string> builtin_dynamics_names() {
  return {"rotation_flow", "torus_translation_flow", "bakers_map", "cat_map", "shift_cantor", "baker_rotation"};
}

namespace {

Verdict compare_to_tolerance(const Real& d, int precision) {
  switch (compare_apart(d, Real(Dyadic::pow2(-precision + 2)), precision + 4)) {
    case Apart::Less: return Verdict::Pass;
    case Apart::Greater: return Verdict::Fail;
    case Apart::Indistinguishable: return Verdict::Indistinguishable;
  }
  return Verdict::Indistinguishable;
}

}  // namespace

Verdict check_group_law(const Dynamics& g, const Real& t, const Real& s, const Point& x, int precision) {
  const Point a = g.evolve(t, g.evolve(s, x, precision), precision);
  const Point b = g.evolve(t + s, x, precision);
  return compare_to_tolerance(distance(a, b), precision);
}

Verdict check_reversibility(const Dynamics& g, const Real& t, const Point& x, int precision) {
  const Point back = g.evolve(-t, g.evolve(t, x, precision), precision);
  return compare_to_tolerance(distance(back, x), precision);
}

std::vector<PreservationReport> check_measure_preservation(const Dynamics& g, const Real& t,
                                                           const std::vector<std::vector<Ball>>& regions,
                                                           std::size_t samples, std::uint64_t seed,
                                                           unsigned threads, int precision) {
  const MeasurePtr mu = g.invariant_measure();
  std::vector<std::vector<std::int8_t>> state(regions.size(), std::vector<std::int8_t>(samples, 0));
  parallel_for(samples, threads, [&](std::size_t i) {
    const Point x = mu->sample(seed, i);
    std::optional<Point> y;
    try {
      y = g.evolve(t, x, precision);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::PrecisionUnreachable) throw;
    }
    for (std::size_t r = 0; r < regions.size(); ++r) {
      if (!y) {
        state[r][i] = -1;
        continue;
      }
      bool unknown = false;
      std::int8_t v = 0;
      for (auto& b : regions[r]) {
        const Membership m = ball_membership(*y, b, precision);
        if (m == Membership::Inside) {
          v = 1;
          break;
        }
        if (m == Membership::Unknown) unknown = true;
      }
      state[r][i] = v == 1 ? 1 : (unknown ? -1 : 0);
    }
  });
  std::vector<PreservationReport> out;
  for (std::size_t r = 0; r < regions.size(); ++r) {
    PreservationReport rep;
    rep.samples = samples;
    for (auto v : state[r]) {
      if (v == 1) ++rep.inside;
      if (v == -1) ++rep.unknown;
    }
    rep.region_mass = mu->union_bounds(regions[r], 24);
    const double n = static_cast<double>(samples);
    const double p = rational_to_double(rep.region_mass.midpoint());
    rep.estimate = static_cast<double>(rep.inside) / n;
    rep.std_error = std::sqrt(std::max(p * (1 - p), 1.0 / n) / n);
    const double slack = rational_to_double(rep.region_mass.width()) / 2 + static_cast<double>(rep.unknown) / n;
    rep.pass = std::abs(rep.estimate - p) <= 3 * rep.std_error + slack;
    out.push_back(rep);
  }
  return out;
}

}  // namespace entropica
