#include "entropica/space.hpp"

#include "entropica/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace entropica {

namespace {

using u128 = unsigned __int128;

int bit_width64(std::uint64_t v) { return v == 0 ? 0 : 64 - __builtin_clzll(v); }

// 0 -> 0, 1 -> 1, then dyadics of [0,1] by level: 1/2, 1/4, 3/4, 1/8, ...
Dyadic unit_dyadic(std::uint64_t index) {
  if (index < 2) return Dyadic(static_cast<long long>(index));
  const std::uint64_t i = index - 2;
  const int k = bit_width64(i + 1);  // floor(log2(i+1)) + 1
  const std::uint64_t offset = i + 1 - (std::uint64_t{1} << (k - 1));
  return Dyadic::ratio(BigInt(2 * offset + 1), k);
}

std::optional<std::uint64_t> unit_index(const Dyadic& v) {
  if (v.is_zero()) return 0;
  if (v == Dyadic(1)) return 1;
  if (v.sign() < 0 || v > Dyadic(1)) return std::nullopt;
  const std::int64_t k = v.level();
  if (k > 62) return std::nullopt;
  const auto j = v.mantissa().convert_to<std::uint64_t>();
  const std::uint64_t offset = (j - 1) / 2;
  return (std::uint64_t{1} << (k - 1)) - 1 + offset + 2;
}

Dyadic circle_dyadic(std::uint64_t index) { return index == 0 ? Dyadic(0) : unit_dyadic(index + 1); }

std::optional<std::uint64_t> circle_index(const Dyadic& v) {
  if (v.is_zero()) return 0;
  if (v.sign() < 0 || v >= Dyadic(1)) return std::nullopt;
  auto i = unit_index(v);
  if (!i) return std::nullopt;
  return *i - 1;
}

Dyadic circle_gap(const Dyadic& a, const Dyadic& b) {
  const Dyadic g = (a - b).frac();
  const Dyadic h = Dyadic(1) - g;
  return g < h ? g : h;
}

void expect_coords(const IdealPoint& p, std::size_t n, const std::string& space) {
  if (p.coords.size() != n || !p.bits.empty()) {
    throw Error(ErrorCode::InvalidArgument, "datum does not belong to " + space);
  }
}

std::vector<Dyadic> grid_centers(int level) {
  std::vector<Dyadic> out;
  const std::uint64_t count = std::uint64_t{1} << level;
  out.reserve(count);
  for (std::uint64_t k = 0; k < count; ++k) out.push_back(Dyadic::ratio(BigInt(2 * k + 1), level + 1));
  return out;
}

class IntervalSpace final : public Space {
 public:
  std::string name() const override { return "interval"; }
  IdealPoint ideal(std::uint64_t index) const override { return {{unit_dyadic(index)}, {}}; }
  std::optional<std::uint64_t> index_of(const IdealPoint& p) const override {
    if (p.coords.size() != 1 || !p.bits.empty()) return std::nullopt;
    return unit_index(p.coords[0]);
  }
  Real ideal_distance(const IdealPoint& a, const IdealPoint& b) const override {
    expect_coords(a, 1, name());
    expect_coords(b, 1, name());
    return Real((a.coords[0] - b.coords[0]).abs());
  }
  int ideal_level(std::uint64_t index) const override {
    return static_cast<int>(unit_dyadic(index).level());
  }
  std::optional<Dyadic> diameter() const override { return Dyadic(1); }
  std::vector<Ball> dyadic_cells(int level) const override {
    std::vector<Ball> out;
    const Dyadic r = Dyadic::pow2(-level - 1);
    for (auto& c : grid_centers(level)) out.push_back(Ball::around(*this, {{c}, {}}, Real(r)));
    return out;
  }
};

class TorusSpace final : public Space {
 public:
  explicit TorusSpace(int dim) : dim_(dim) {}

  std::string name() const override {
    return dim_ == 1 ? "circle" : "torus" + std::to_string(dim_);
  }
  IdealPoint ideal(std::uint64_t index) const override {
    IdealPoint p;
    std::uint64_t rest = index;
    for (int k = 0; k + 1 < dim_; ++k) {
      auto [a, b] = cantor_unpair(rest);
      p.coords.push_back(circle_dyadic(a));
      rest = b;
    }
    p.coords.push_back(circle_dyadic(rest));
    return p;
  }
  std::optional<std::uint64_t> index_of(const IdealPoint& p) const override {
    if (p.coords.size() != static_cast<std::size_t>(dim_) || !p.bits.empty()) return std::nullopt;
    auto last = circle_index(p.coords.back());
    if (!last) return std::nullopt;
    std::uint64_t acc = *last;
    for (int k = dim_ - 2; k >= 0; --k) {
      auto c = circle_index(p.coords[k]);
      if (!c) return std::nullopt;
      const u128 s = static_cast<u128>(*c) + acc;
      const u128 z = s * (s + 1) / 2 + acc;
      if (z > UINT64_MAX) return std::nullopt;
      acc = static_cast<std::uint64_t>(z);
    }
    return acc;
  }
  Real ideal_distance(const IdealPoint& a, const IdealPoint& b) const override {
    expect_coords(a, dim_, name());
    expect_coords(b, dim_, name());
    Dyadic best(0);
    for (int k = 0; k < dim_; ++k) best = std::max(best, circle_gap(a.coords[k], b.coords[k]));
    return Real(best);
  }
  int ideal_level(std::uint64_t index) const override {
    std::int64_t lv = 0;
    for (auto& c : ideal(index).coords) lv = std::max(lv, c.level());
    return static_cast<int>(lv);
  }
  std::optional<Dyadic> diameter() const override { return Dyadic::pow2(-1); }
  std::vector<Ball> dyadic_cells(int level) const override {
    const auto centers = grid_centers(level);
    const Dyadic r = Dyadic::pow2(-level - 1);
    std::vector<Ball> out;
    std::vector<std::size_t> digit(dim_, 0);
    while (true) {
      IdealPoint p;
      for (int k = 0; k < dim_; ++k) p.coords.push_back(centers[digit[k]]);
      out.push_back(Ball::around(*this, std::move(p), Real(r)));
      int k = dim_ - 1;
      while (k >= 0 && ++digit[k] == centers.size()) digit[k--] = 0;
      if (k < 0) break;
    }
    return out;
  }

 private:
  int dim_;
};

class CantorSpace final : public Space {
 public:
  std::string name() const override { return "cantor"; }
  IdealPoint ideal(std::uint64_t index) const override {
    const std::uint64_t v = index + 1;
    const int len = bit_width64(v) - 1;
    IdealPoint p;
    p.bits.resize(len);
    for (int k = 0; k < len; ++k) p.bits[k] = static_cast<std::uint8_t>((v >> (len - 1 - k)) & 1U);
    return p;
  }
  std::optional<std::uint64_t> index_of(const IdealPoint& p) const override {
    if (!p.coords.empty() || p.bits.size() > 63) return std::nullopt;
    std::uint64_t v = 1;
    for (auto b : p.bits) v = (v << 1) | (b & 1U);
    return v - 1;
  }
  Real ideal_distance(const IdealPoint& a, const IdealPoint& b) const override {
    if (!a.coords.empty() || !b.coords.empty()) {
      throw Error(ErrorCode::InvalidArgument, "datum does not belong to cantor");
    }
    const std::size_t n = std::max(a.bits.size(), b.bits.size());
    for (std::size_t i = 0; i < n; ++i) {
      const auto x = i < a.bits.size() ? a.bits[i] : 0;
      const auto y = i < b.bits.size() ? b.bits[i] : 0;
      if (x != y) return Real(Dyadic::pow2(-static_cast<std::int64_t>(i)));
    }
    return Real();
  }
  int ideal_level(std::uint64_t index) const override { return bit_width64(index + 1) - 1; }
  std::optional<Dyadic> diameter() const override { return Dyadic(1); }
  // Balls are cylinders, so inclusion is a prefix test.
  bool ball_subset(const Ball& outer, const Ball& inner, std::int64_t precision) const override {
    if (!outer.radius.exact() || !inner.radius.exact() || inner.radius.exact()->sign() <= 0) {
      return Space::ball_subset(outer, inner, precision);
    }
    const std::size_t lo = cantor_cylinder_length(*outer.radius.exact());
    const std::size_t li = cantor_cylinder_length(*inner.radius.exact());
    if (li < lo) return false;
    auto bit = [](const IdealPoint& p, std::size_t i) { return i < p.bits.size() ? p.bits[i] : 0; };
    for (std::size_t i = 0; i < lo; ++i) {
      if (bit(outer.center_point, i) != bit(inner.center_point, i)) return false;
    }
    return true;
  }
  // Cylinder of length L is B(s, r) for any r in (2^-L, 2^(1-L)]; 3 * 2^(-L-1)
  // keeps every distance off the sphere so membership is always decidable.
  std::vector<Ball> dyadic_cells(int level) const override {
    std::vector<Ball> out;
    const std::uint64_t count = std::uint64_t{1} << level;
    for (std::uint64_t k = 0; k < count; ++k) {
      IdealPoint p;
      p.bits.resize(level);
      for (int j = 0; j < level; ++j) p.bits[j] = static_cast<std::uint8_t>((k >> (level - 1 - j)) & 1U);
      out.push_back(Ball::around(*this, std::move(p), Real(Dyadic::ratio(BigInt(3), level + 1))));
    }
    return out;
  }
};

class NonnegSpace final : public Space {
 public:
  std::string name() const override { return "nonneg_reals"; }
  IdealPoint ideal(std::uint64_t index) const override {
    auto [m, j] = cantor_unpair(index);
    return {{Dyadic(static_cast<long long>(m)) + circle_dyadic(j)}, {}};
  }
  std::optional<std::uint64_t> index_of(const IdealPoint& p) const override {
    if (p.coords.size() != 1 || !p.bits.empty() || p.coords[0].sign() < 0) return std::nullopt;
    const BigInt m = p.coords[0].floor();
    if (m > BigInt(UINT32_MAX)) return std::nullopt;
    auto j = circle_index(p.coords[0].frac());
    if (!j) return std::nullopt;
    const u128 s = static_cast<u128>(m.convert_to<std::uint64_t>()) + *j;
    const u128 z = s * (s + 1) / 2 + *j;
    if (z > UINT64_MAX) return std::nullopt;
    return static_cast<std::uint64_t>(z);
  }
  Real ideal_distance(const IdealPoint& a, const IdealPoint& b) const override {
    expect_coords(a, 1, name());
    expect_coords(b, 1, name());
    return Real((a.coords[0] - b.coords[0]).abs());
  }
  int ideal_level(std::uint64_t index) const override {
    return static_cast<int>(ideal(index).coords[0].level());
  }
  std::optional<Dyadic> diameter() const override { return std::nullopt; }
  // Cells of width 2^-level covering [0, level + 1).
  std::vector<Ball> dyadic_cells(int level) const override {
    std::vector<Ball> out;
    const Dyadic r = Dyadic::pow2(-level - 1);
    const std::uint64_t count = static_cast<std::uint64_t>(level + 1) << level;
    for (std::uint64_t k = 0; k < count; ++k) {
      out.push_back(Ball::around(*this, {{Dyadic::ratio(BigInt(2 * k + 1), level + 1)}, {}}, Real(r)));
    }
    return out;
  }
};

}  // namespace

std::uint64_t cantor_pair(std::uint64_t a, std::uint64_t b) {
  const u128 s = static_cast<u128>(a) + b;
  const u128 z = s * (s + 1) / 2 + b;
  if (z > UINT64_MAX) throw Error(ErrorCode::InvalidArgument, "pairing overflow");
  return static_cast<std::uint64_t>(z);
}

std::pair<std::uint64_t, std::uint64_t> cantor_unpair(std::uint64_t z) {
  auto w = static_cast<std::uint64_t>((std::sqrt(8.0L * static_cast<long double>(z) + 1.0L) - 1.0L) / 2.0L);
  auto tri = [](std::uint64_t v) { return static_cast<u128>(v) * (v + 1) / 2; };
  while (w > 0 && tri(w) > z) --w;
  while (tri(w + 1) <= z) ++w;
  const auto y = static_cast<std::uint64_t>(z - tri(w));
  return {w - y, y};
}

Ball Ball::make(const Space& space, std::uint64_t center, Real radius) {
  return Ball{center, space.ideal(center), std::move(radius)};
}

Ball Ball::around(const Space& space, IdealPoint center, Real radius) {
  auto idx = space.index_of(center);
  return Ball{idx.value_or(kNoIndex), std::move(center), std::move(radius)};
}

struct Point::Cache {
  std::mutex mutex;
  std::map<std::int64_t, IdealPoint> values;
};

Point::Point(SpacePtr space, Approximator approximator)
    : space_(std::move(space)), approximator_(std::move(approximator)), cache_(std::make_shared<Cache>()) {}

Point::Point(SpacePtr space, Approximator approximator, std::vector<std::optional<Dyadic>> exact_coords)
    : Point(std::move(space), std::move(approximator)) {
  exact_coords_ = std::move(exact_coords);
}

Point Point::ideal(SpacePtr space, std::uint64_t index) {
  IdealPoint datum = space->ideal(index);
  return exact(std::move(space), std::move(datum));
}

Point Point::exact(SpacePtr space, IdealPoint datum) {
  Point p(std::move(space), [datum](std::int64_t) { return datum; });
  p.exact_ = std::move(datum);
  return p;
}

Point Point::from_reals(SpacePtr space, std::vector<Real> coords) {
  const std::string kind = space->name();
  const bool periodic = kind == "circle" || kind.rfind("torus", 0) == 0;
  std::optional<IdealPoint> exact_datum;
  if (std::all_of(coords.begin(), coords.end(), [](const Real& r) { return r.exact().has_value(); })) {
    IdealPoint d;
    for (auto& c : coords) d.coords.push_back(periodic ? c.exact()->frac() : *c.exact());
    exact_datum = std::move(d);
  }
  if (exact_datum) return exact(std::move(space), std::move(*exact_datum));
  auto approx = [coords, periodic, kind](std::int64_t n) {
    IdealPoint d;
    for (auto& c : coords) {
      Dyadic q = c.approx(n);
      // Reduction mod 1 and clamping never increase the distance to the point.
      if (periodic) {
        q = q.frac();
      } else {
        if (q.sign() < 0) q = Dyadic(0);
        if (kind == "interval" && q > Dyadic(1)) q = Dyadic(1);
      }
      d.coords.push_back(std::move(q));
    }
    return d;
  };
  Point p(std::move(space), approx);
  for (auto& c : coords) {
    if (c.exact()) {
      p.exact_coords_.push_back(periodic ? c.exact()->frac() : *c.exact());
    } else {
      p.exact_coords_.push_back(std::nullopt);
    }
  }
  return p;
}

IdealPoint Point::approx(std::int64_t n) const {
  if (exact_) return *exact_;
  {
    std::lock_guard lock(cache_->mutex);
    if (auto it = cache_->values.find(n); it != cache_->values.end()) return it->second;
  }
  IdealPoint p = approximator_(n);
  std::lock_guard lock(cache_->mutex);
  return cache_->values.emplace(n, std::move(p)).first->second;
}

const std::optional<IdealPoint>& Point::exact() const { return exact_; }

EnumerableOpenSet EnumerableOpenSet::whole_space() {
  EnumerableOpenSet s;
  s.whole_ = true;
  return s;
}

EnumerableOpenSet EnumerableOpenSet::finite(std::vector<Ball> balls) {
  EnumerableOpenSet s;
  s.enumerator_ = [balls = std::move(balls)](std::size_t i) -> std::optional<Ball> {
    if (i >= balls.size()) return std::nullopt;
    return balls[i];
  };
  return s;
}

EnumerableOpenSet EnumerableOpenSet::enumerated(Enumerator enumerator) {
  EnumerableOpenSet s;
  s.enumerator_ = std::move(enumerator);
  return s;
}

std::vector<Ball> EnumerableOpenSet::first(std::size_t count) const {
  std::vector<Ball> out;
  if (!enumerator_) return out;
  for (std::size_t i = 0; i < count; ++i) {
    auto b = enumerator_(i);
    if (!b) break;
    out.push_back(std::move(*b));
  }
  return out;
}

Real distance(const Space& space, const Point& x, const IdealPoint& y) {
  if (x.exact()) return space.ideal_distance(*x.exact(), y);
  const Space* sp = &space;
  auto keep = x.space_ptr();
  return Real::from_approximator([sp, keep, x, y](std::int64_t n) {
    return sp->ideal_distance(x.approx(n + 2), y).approx(n + 2);
  });
}

Real distance(const Point& x, const Point& y) {
  const Space& space = x.space();
  if (x.exact() && y.exact()) return space.ideal_distance(*x.exact(), *y.exact());
  auto keep = x.space_ptr();
  return Real::from_approximator([keep, x, y](std::int64_t n) {
    return keep->ideal_distance(x.approx(n + 2), y.approx(n + 2)).approx(n + 2);
  });
}

Membership ball_membership(const Point& x, const Ball& ball, std::int64_t precision) {
  switch (compare_apart(distance(x.space(), x, ball.center_point), ball.radius, precision)) {
    case Apart::Less: return Membership::Inside;
    case Apart::Greater: return Membership::Outside;
    case Apart::Indistinguishable: return Membership::Unknown;
  }
  return Membership::Unknown;
}

bool Space::ball_subset(const Ball& outer, const Ball& inner, std::int64_t precision) const {
  const Real slack = outer.radius - ideal_distance(outer.center_point, inner.center_point) - inner.radius;
  return slack.lower(precision).sign() >= 0;
}

bool ball_contains(const Space& space, const Ball& outer, const Ball& inner, std::int64_t precision) {
  return space.ball_subset(outer, inner, precision);
}

std::size_t cantor_cylinder_length(const Dyadic& r) {
  if (r.sign() <= 0) throw Error(ErrorCode::InvalidArgument, "cylinder radius must be positive");
  if (r > Dyadic(1)) return 0;
  const std::int64_t f = r.floor_log2();
  return static_cast<std::size_t>(r == Dyadic::pow2(f) ? 1 - f : -f);
}

std::optional<std::uint64_t> nearby_ideal(const Point& x, int m) {
  const Space& space = x.space();
  // Bounded scan over the enumeration first, then the point's own approximation.
  const std::uint64_t budget = std::uint64_t{1} << std::min(m + 3, 16);
  const Real target = Real(Dyadic::pow2(-m));
  for (std::uint64_t i = 0; i < budget; ++i) {
    if (compare_apart(distance(space, x, space.ideal(i)), target, m + 3) == Apart::Less) return i;
  }
  auto idx = space.index_of(x.approx(m + 1));
  if (idx && compare_apart(distance(space, x, space.ideal(*idx)), target, m + 3) != Apart::Greater) return idx;
  return std::nullopt;
}

SpacePtr builtin_space(const std::string& name) {
  if (name == "cantor") return std::make_shared<CantorSpace>();
  if (name == "interval") return std::make_shared<IntervalSpace>();
  if (name == "circle") return std::make_shared<TorusSpace>(1);
  if (name == "torus2") return std::make_shared<TorusSpace>(2);
  if (name == "torus3") return std::make_shared<TorusSpace>(3);
  if (name == "nonneg_reals") return std::make_shared<NonnegSpace>();
  throw Error(ErrorCode::UnknownName, "unknown space: " + name);
}

}  // namespace entropica
