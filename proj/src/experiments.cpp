#include "entropica/experiments.hpp"

#include "entropica/coarse.hpp"
#include "entropica/dynamics.hpp"
#include "entropica/error.hpp"
#include "entropica/random.hpp"
#include "entropica/randomness.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#ifndef ENTROPICA_VERSION
#define ENTROPICA_VERSION "0.0.0"
#endif

namespace entropica {

namespace mp = boost::multiprecision;

namespace {

Error config_error(const std::string& what) { return Error(ErrorCode::Config, what); }

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) {
    part = trim(part);
    if (!part.empty()) out.push_back(part);
  }
  return out;
}

const std::vector<ConfigKey> kCommon = {
    {"seed", "", "seed of every random stream (required; --seed overrides)"},
    {"out", "", "output CSV path (--out overrides)"},
    {"experiment", "", "optional; must name the experiment being run"},
};

const std::map<std::string, std::vector<ConfigKey>>& key_table() {
  static const std::map<std::string, std::vector<ConfigKey>> table = {
      {"oscillation",
       {{"system", "baker_rotation", "continuous-time system"},
        {"measure", "lebesgue_torus3", "invariant measure"},
        {"representation", "dyadic", "binary representation"},
        {"compressor", "default", "complexity approximator"},
        {"start", "origin", "origin, sample, or comma-separated real coordinates"},
        {"grid", "10", "times t = k 2^-grid for 0 <= k < 2^grid"},
        {"depth", "256", "encoding depth in bits"},
        {"precision", "0", "evaluation precision; 0 chooses from the depth"},
        {"effort", "16", "measure bracket effort"},
        {"n_max", "8", "largest drop n"},
        {"abstention_limit", "0.05", "largest tolerated fraction of undecided grid times"}}},
      {"outliers",
       {{"system", "rotation_flow", "continuous-time system"},
        {"measure", "lebesgue_circle", "invariant probability measure"},
        {"representation", "dyadic", "binary representation"},
        {"compressor", "default", "complexity approximator"},
        {"start", "sample", "origin, sample, or comma-separated real coordinates"},
        {"grid", "10", "times t = k 2^-grid for 0 <= k < 2^grid"},
        {"depth", "256", "encoding depth in bits"},
        {"precision", "0", "evaluation precision; 0 chooses from the depth"},
        {"effort", "16", "measure bracket effort"},
        {"n_max", "16", "largest deficiency threshold n"},
        {"abstention_limit", "0.05", "largest tolerated fraction of undecided grid times"}}},
      {"discrete-orbit",
       {{"system", "shift_cantor", "discrete-time system"},
        {"measure", "uniform_cantor", "invariant measure"},
        {"representation", "identity", "binary representation"},
        {"compressor", "default", "complexity approximator"},
        {"start", "sample", "origin, sample, b:<bits>, or comma-separated real coordinates"},
        {"depth", "512", "encoding depth in bits"},
        {"precision", "0", "evaluation precision; 0 chooses from the depth"},
        {"effort", "16", "measure bracket effort"},
        {"n_max", "12", "orbit prefixes of length 2^n for n = 1..n_max"},
        {"fit_from", "4", "first n of the trend fit"}}},
      {"main-tail",
       {{"lambda", "uniform_cantor", "sampling measure on the Cantor space"},
        {"mu", "bernoulli(1/4)", "reference measure on the Cantor space"},
        {"compressor", "default", "complexity approximator"},
        {"depth", "256", "prefix depth in bits"},
        {"samples", "100000", "samples per run"},
        {"effort", "16", "measure bracket effort"},
        {"n_max", "40", "largest threshold n"}}},
      {"stability",
       {{"measure", "lebesgue_interval", "probability measure"},
        {"representation", "dyadic", "binary representation"},
        {"compressor", "default", "complexity approximator"},
        {"level", "2", "partition into the 2^level dyadic cells"},
        {"partition", "", "partition file; overrides level"},
        {"samples", "100000", "samples"},
        {"m_max", "8", "largest m"},
        {"depth", "64", "encoding depth in bits"},
        {"precision", "96", "evaluation precision"},
        {"effort", "16", "measure bracket effort"},
        {"subsample", "10", "fine-vs-coarse also reported on samples / subsample"}}},
      {"preservation",
       {{"systems", "rotation_flow;torus_translation_flow;bakers_map;cat_map;shift_cantor;baker_rotation",
         "semicolon-separated systems"},
        {"samples", "20000", "samples per (system, time)"},
        {"regions", "8", "random regions per system"},
        {"times", "4", "times per system, from a fixed list"},
        {"precision", "32", "membership precision"}}},
      {"prokhorov-bench",
       {{"instances", "200", "random triples for the metric axioms"},
        {"point_instances", "50", "point-mass pairs on the half-line"},
        {"atoms", "5", "largest atom count"},
        {"precision", "10", "bisection precision"}}},
  };
  return table;
}

class Params {
 public:
  Params(const std::string& experiment, const Config& config) {
    const auto& keys = experiment_keys(experiment);
    std::set<std::string> known;
    for (auto* list : {&kCommon, &keys}) {
      for (auto& k : *list) {
        known.insert(k.name);
        values_[k.name] = k.default_value;
      }
    }
    for (auto& [k, v] : config.values()) {
      if (!known.count(k)) throw config_error("unknown key '" + k + "' for experiment " + experiment);
      values_[k] = v;
    }
    if (!values_["experiment"].empty() && values_["experiment"] != experiment) {
      throw config_error("config is for experiment " + values_["experiment"] + ", not " + experiment);
    }
    values_["experiment"] = experiment;
    if (values_["seed"].empty()) throw config_error("seed is required");
    seed_ = static_cast<std::uint64_t>(integer("seed", 0));
  }

  const std::string& str(const std::string& key) const { return values_.at(key); }

  long long integer(const std::string& key, long long min = 1,
                    long long max = std::numeric_limits<long long>::max()) const {
    const std::string& v = str(key);
    long long out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw config_error(key + " must be an integer, got '" + v + "'");
    if (out < min || out > max) {
      throw config_error(key + " must lie in [" + std::to_string(min) + ", " + std::to_string(max) + "]");
    }
    return out;
  }

  double real(const std::string& key, double min, double max) const {
    const std::string& v = str(key);
    double out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) throw config_error(key + " must be a number, got '" + v + "'");
    if (!(out >= min && out <= max)) throw config_error(key + " out of range");
    return out;
  }

  std::uint64_t seed() const { return seed_; }
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
  std::uint64_t seed_ = 0;
};

std::string str(std::size_t v) { return std::to_string(v); }
std::string str(int v) { return std::to_string(v); }
std::string str(double v) { return format_double(v); }
std::string str(bool v) { return v ? "true" : "false"; }
std::string str(const Rational& q) {
  // Exact decimal when the denominator is a power of two.
  const BigInt den = mp::denominator(q);
  if ((den & (den - 1)) == 0) {
    return Dyadic(mp::numerator(q), -static_cast<std::int64_t>(mp::msb(den))).to_decimal();
  }
  return rational_to_string(q);
}

double se(double p, std::size_t n) {
  if (n == 0) return 0;
  const double N = static_cast<double>(n);
  return std::sqrt(std::max(p * (1 - p), 1 / N) / N);
}

// Least-squares slope of y on x.
double slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  if (x.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

int dimension(const Space& space) { return static_cast<int>(space.ideal(0).coords.size()); }

int auto_precision(const Params& p, const Space& space, std::size_t depth) {
  const auto v = p.integer("precision", 0, 1 << 20);
  if (v > 0) return static_cast<int>(v);
  const int d = dimension(space);
  if (d == 0) return static_cast<int>(depth) + 8;
  return static_cast<int>(depth) / d + 24;
}

Point start_point(const std::string& spec, const Measure& mu, std::uint64_t seed) {
  const auto& space = mu.space();
  if (spec == "sample") return mu.sample(seed, 0);
  if (spec == "origin") {
    if (space->name() == "cantor") return Point::exact(space, IdealPoint{});
    return Point::from_reals(space, std::vector<Real>(static_cast<std::size_t>(dimension(*space)), Real(0)));
  }
  if (spec.rfind("b:", 0) == 0) {
    if (space->name() != "cantor") throw config_error("bit-string start needs the Cantor space");
    IdealPoint p;
    for (char c : spec.substr(2)) {
      if (c != '0' && c != '1') throw config_error("bad bit in start " + spec);
      p.bits.push_back(c == '1');
    }
    return Point::exact(space, p);
  }
  std::vector<Real> coords;
  for (auto& part : split(spec, ',')) coords.push_back(parse_real(part));
  if (static_cast<int>(coords.size()) != dimension(*space) || coords.empty()) {
    throw config_error("start needs " + std::to_string(dimension(*space)) + " coordinates");
  }
  return Point::from_reals(space, std::move(coords));
}

bool is_abstention(const Error& e) {
  return e.code() == ErrorCode::PrecisionUnreachable || e.code() == ErrorCode::Boundary ||
         e.code() == ErrorCode::ZeroCylinder;
}

struct Setup {
  DynamicsPtr system;
  MeasurePtr mu;
  RepresentationPtr repr;
  CompressorPtr approx;
};

Setup setup(const Params& p, TimeKind kind) {
  Setup s;
  s.system = builtin_dynamics(p.str("system"));
  if (s.system->time_kind() != kind) {
    throw config_error(p.str("system") + (kind == TimeKind::Continuous ? " is not a continuous-time system"
                                                                       : " is not a discrete-time system"));
  }
  s.mu = builtin_measure(p.str("measure"));
  if (s.mu->space()->name() != s.system->space()->name()) {
    throw config_error("measure " + p.str("measure") + " does not live on the space of " + p.str("system"));
  }
  s.repr = builtin_representation(p.str("representation"), s.mu);
  s.approx = find_compressor(p.str("compressor"));
  return s;
}

// H^(G^t a) on the grid t = k 2^-g; nullopt marks an abstention.
std::vector<std::optional<double>> entropy_trace(const Setup& s, const Point& alpha, int g, std::size_t depth,
                                                 int precision, int effort, unsigned threads) {
  const std::size_t n = std::size_t{1} << g;
  std::vector<std::optional<double>> h(n);
  parallel_for(n, threads, [&](std::size_t k) {
    try {
      const Point y = s.system->evolve(Real(Dyadic::ratio(BigInt(k), g)), alpha, precision);
      if (auto e = try_entropy(y, *s.repr, *s.approx, depth, precision, effort)) h[k] = e->value;
    } catch (const Error& e) {
      if (!is_abstention(e)) throw;
    }
  });
  return h;
}

std::size_t check_abstentions(const std::vector<std::optional<double>>& h, double limit) {
  std::size_t missing = 0;
  for (auto& v : h) missing += !v.has_value();
  if (static_cast<double>(missing) > limit * static_cast<double>(h.size())) {
    throw Error(ErrorCode::Boundary, std::to_string(missing) + " of " + std::to_string(h.size()) +
                                         " grid times undecided, above the abstention limit");
  }
  return missing;
}

ExperimentResult run_oscillation(const Params& p, unsigned threads) {
  const Setup s = setup(p, TimeKind::Continuous);
  const int g = static_cast<int>(p.integer("grid", 1, 20));
  const auto depth = static_cast<std::size_t>(p.integer("depth"));
  const int precision = auto_precision(p, *s.mu->space(), depth);
  const int effort = static_cast<int>(p.integer("effort"));
  const int n_max = static_cast<int>(p.integer("n_max", 0, 1000));
  const double limit = p.real("abstention_limit", 0, 1);
  const Point alpha = start_point(p.str("start"), *s.mu, p.seed());
  const auto h0 = try_entropy(alpha, *s.repr, *s.approx, depth, precision, effort);
  if (!h0) throw Error(ErrorCode::Boundary, "the start point cannot be encoded at the configured precision");
  const auto h = entropy_trace(s, alpha, g, depth, precision, effort, threads);
  const std::size_t missing = check_abstentions(h, limit);
  const Bracket total = s.mu->total_mass_bounds(effort);
  const double ceiling = std::log2(rational_to_double(total.midpoint()));

  ExperimentResult r;
  r.table.header = {"n", "grid_points", "decided", "abstained", "fraction_relative", "se_relative",
                    "fraction_ceiling", "se_ceiling", "K_n", "reference", "envelope"};
  const std::size_t decided = h.size() - missing;
  std::vector<double> rel(n_max + 1), ceil(n_max + 1);
  for (int n = 0; n <= n_max; ++n) {
    std::size_t a = 0, b = 0;
    for (auto& v : h) {
      if (!v) continue;
      a += *v < h0->value - n;
      b += *v < ceiling - n;
    }
    rel[n] = decided ? static_cast<double>(a) / static_cast<double>(decided) : 0;
    ceil[n] = decided ? static_cast<double>(b) / static_cast<double>(decided) : 0;
  }
  const double c2 = n_max >= 1 ? 2 * rel[1] : rel[0];
  std::vector<double> xs, ys;
  for (int n = 0; n <= n_max; ++n) {
    const auto kn = integer_complexity(*s.approx, static_cast<std::uint64_t>(n));
    r.table.rows.push_back({str(n), str(h.size()), str(decided), str(missing), str(rel[n]), str(se(rel[n], decided)),
                            str(ceil[n]), str(se(ceil[n], decided)), str(kn),
                            str(std::ldexp(1.0, -n - static_cast<int>(kn))), str(std::ldexp(c2, -n))});
    if (n >= 1 && rel[n] > 0) {
      xs.push_back(n);
      ys.push_back(-std::log2(rel[n]));
    }
  }

  CsvTable trace;
  trace.header = {"k", "t", "entropy", "rise"};
  std::size_t rise8 = 0;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const std::string t = Dyadic::ratio(BigInt(k), g).to_decimal();
    if (h[k]) {
      rise8 += *h[k] - h0->value >= 8;
      trace.rows.push_back({str(k), t, str(*h[k]), str(*h[k] - h0->value)});
    } else {
      trace.rows.push_back({str(k), t, "", ""});
    }
  }
  r.extra.emplace_back("trace", std::move(trace));
  r.summary = {{"start_entropy", str(h0->value)},
               {"ceiling", str(ceiling)},
               {"abstained", str(missing)},
               {"rise8_fraction", str(decided ? static_cast<double>(rise8) / static_cast<double>(decided) : 0.0)},
               {"envelope_c2", str(c2)},
               {"envelope_exponent", str(slope(xs, ys))},
               {"precision", str(precision)}};
  return r;
}

ExperimentResult run_outliers(const Params& p, unsigned threads) {
  const Setup s = setup(p, TimeKind::Continuous);
  if (!s.mu->is_probability()) throw config_error("outliers needs a probability measure");
  const int g = static_cast<int>(p.integer("grid", 1, 20));
  const auto depth = static_cast<std::size_t>(p.integer("depth"));
  const int precision = auto_precision(p, *s.mu->space(), depth);
  const int effort = static_cast<int>(p.integer("effort"));
  const int n_max = static_cast<int>(p.integer("n_max", 0, 1000));
  const Point alpha = start_point(p.str("start"), *s.mu, p.seed());
  const auto h = entropy_trace(s, alpha, g, depth, precision, effort, threads);
  const std::size_t missing = check_abstentions(h, p.real("abstention_limit", 0, 1));
  const std::size_t decided = h.size() - missing;

  ExperimentResult r;
  r.table.header = {"n", "grid_points", "decided", "abstained", "fraction", "se", "K_n", "reference"};
  for (int n = 0; n <= n_max; ++n) {
    std::size_t a = 0;
    for (auto& v : h) a += v && -*v > n;
    const double f = decided ? static_cast<double>(a) / static_cast<double>(decided) : 0;
    const auto kn = integer_complexity(*s.approx, static_cast<std::uint64_t>(n));
    r.table.rows.push_back({str(n), str(h.size()), str(decided), str(missing), str(f), str(se(f, decided)), str(kn),
                            str(std::ldexp(1.0, -n - static_cast<int>(kn)))});
  }
  CsvTable trace;
  trace.header = {"k", "t", "deficiency"};
  for (std::size_t k = 0; k < h.size(); ++k) {
    trace.rows.push_back({str(k), Dyadic::ratio(BigInt(k), g).to_decimal(), h[k] ? str(-*h[k]) : ""});
  }
  r.extra.emplace_back("trace", std::move(trace));
  r.summary = {{"abstained", str(missing)}, {"precision", str(precision)}};
  return r;
}

ExperimentResult run_discrete(const Params& p, unsigned threads) {
  const Setup s = setup(p, TimeKind::Discrete);
  const auto depth = static_cast<std::size_t>(p.integer("depth"));
  const int precision = auto_precision(p, *s.mu->space(), depth);
  const int effort = static_cast<int>(p.integer("effort"));
  const int n_max = static_cast<int>(p.integer("n_max", 1, 24));
  const int fit_from = static_cast<int>(p.integer("fit_from", 1, n_max));
  const Point alpha = start_point(p.str("start"), *s.mu, p.seed());
  const std::size_t count = std::size_t{1} << n_max;

  // Orbit points G^t a for t = 1..2^n_max. Exact starts are stepped one at a
  // time so that a repeated point reveals a finite orbit.
  std::vector<std::optional<double>> d(count);
  std::optional<std::size_t> period;
  auto deficiency_of = [&](const Point& y) -> std::optional<double> {
    if (auto e = try_entropy(y, *s.repr, *s.approx, depth, precision, effort)) return -e->value;
    return std::nullopt;
  };
  if (alpha.exact()) {
    std::vector<IdealPoint> seen{*alpha.exact()};
    Point x = alpha;
    for (std::size_t t = 1; t <= count; ++t) {
      if (period) {
        d[t - 1] = d[(t - 1) - *period];
        continue;
      }
      x = s.system->evolve(1, x, precision);
      if (!x.exact()) throw Error(ErrorCode::Unsupported, "exact orbit left the dyadic points");
      d[t - 1] = deficiency_of(x);
      for (std::size_t j = 0; j < seen.size(); ++j) {
        if (seen[j] == *x.exact()) {
          period = t - j;
          break;
        }
      }
      seen.push_back(*x.exact());
    }
  } else {
    parallel_for(count, threads, [&](std::size_t k) {
      try {
        d[k] = deficiency_of(s.system->evolve(static_cast<long long>(k + 1), alpha, precision));
      } catch (const Error& e) {
        if (!is_abstention(e)) throw;
      }
    });
  }

  ExperimentResult r;
  r.table.header = {"n", "orbit_points", "abstained", "M_n", "K_n", "M_plus_K"};
  double m = -std::numeric_limits<double>::infinity();
  std::size_t missing = 0, upto = 0;
  std::vector<double> xs, ys, ysk;
  double m_fit_from = 0, m_last = 0;
  for (int n = 1; n <= n_max; ++n) {
    const std::size_t end = std::size_t{1} << n;
    for (; upto < end; ++upto) {
      if (d[upto]) {
        m = std::max(m, *d[upto]);
      } else {
        ++missing;
      }
    }
    const auto kn = integer_complexity(*s.approx, static_cast<std::uint64_t>(n));
    r.table.rows.push_back({str(n), str(end), str(missing), str(m), str(kn), str(m + static_cast<double>(kn))});
    if (n >= fit_from) {
      xs.push_back(n);
      ys.push_back(m);
      ysk.push_back(m + static_cast<double>(kn));
    }
    if (n == fit_from) m_fit_from = m;
    m_last = m;
  }
  r.summary = {{"finite_orbit", str(period.has_value())},
               {"period", period ? str(*period) : ""},
               {"abstained", str(missing)},
               {"slope", str(slope(xs, ys))},
               {"slope_corrected", str(slope(xs, ysk))},
               {"growth", str(m_last - m_fit_from)},
               {"precision", str(precision)}};
  return r;
}

struct TailCounts {
  std::vector<std::size_t> above;  // D^ > n
  std::size_t infinite = 0;
};

TailCounts tail_counts(const Measure& sampler, std::uint64_t seed, const Measure& mu, const Compressor& approx,
                       std::size_t depth, std::size_t samples, int effort, int n_max, unsigned threads) {
  std::vector<double> values(samples);
  parallel_for(samples, threads, [&](std::size_t k) {
    const Bits x = sampler.sample(seed, k).approx(static_cast<std::int64_t>(depth)).bits;
    values[k] = deficiency(x, mu, approx, depth, effort).value;
  });
  TailCounts t;
  t.above.assign(static_cast<std::size_t>(n_max) + 1, 0);
  for (double v : values) {
    t.infinite += std::isinf(v);
    for (int n = 0; n <= n_max; ++n) t.above[n] += v > n;
  }
  return t;
}

ExperimentResult run_main_tail(const Params& p, unsigned threads) {
  auto lambda = builtin_measure(p.str("lambda"));
  auto mu = builtin_measure(p.str("mu"));
  if (lambda->space()->name() != "cantor" || mu->space()->name() != "cantor") {
    throw config_error("main-tail measures must live on the Cantor space");
  }
  auto approx = find_compressor(p.str("compressor"));
  const auto depth = static_cast<std::size_t>(p.integer("depth"));
  const auto samples = static_cast<std::size_t>(p.integer("samples"));
  const int effort = static_cast<int>(p.integer("effort"));
  const int n_max = static_cast<int>(p.integer("n_max", 0, 10000));
  const auto cross = tail_counts(*lambda, p.seed(), *mu, *approx, depth, samples, effort, n_max, threads);
  const auto control =
      tail_counts(*mu, splitmix64(p.seed() ^ 0x636f6e74726f6cULL), *mu, *approx, depth, samples, effort, n_max, threads);

  ExperimentResult r;
  r.table.header = {"n", "samples", "cross_fraction", "cross_se", "control_fraction", "control_se",
                    "K_n", "reference", "conservation"};
  const double N = static_cast<double>(samples);
  for (int n = 0; n <= n_max; ++n) {
    const double fc = static_cast<double>(cross.above[n]) / N, fo = static_cast<double>(control.above[n]) / N;
    const auto kn = integer_complexity(*approx, static_cast<std::uint64_t>(n));
    r.table.rows.push_back({str(n), str(samples), str(fc), str(se(fc, samples)), str(fo), str(se(fo, samples)),
                            str(kn), str(std::ldexp(1.0, -n - static_cast<int>(kn))),
                            str(std::min(1.0, std::ldexp(1.0, 1 - n)))});
  }
  r.summary = {{"cross_infinite", str(cross.infinite)}, {"control_infinite", str(control.infinite)}};
  return r;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

ExperimentResult run_stability(const Params& p, unsigned threads) {
  auto mu = builtin_measure(p.str("measure"));
  if (!mu->is_probability()) throw config_error("stability needs a probability measure");
  auto repr = builtin_representation(p.str("representation"), mu);
  auto approx = find_compressor(p.str("compressor"));
  const EntropyBudget budget{static_cast<std::size_t>(p.integer("depth")),
                             static_cast<int>(p.integer("precision")), static_cast<int>(p.integer("effort"))};
  const OpenPartition partition =
      p.str("partition").empty()
          ? OpenPartition::dyadic(mu->space(), static_cast<int>(p.integer("level", 0, 16)), *approx, mu->name())
          : OpenPartition::parse(read_file(p.str("partition")), *approx, mu->name());
  if (partition.space()->name() != mu->space()->name()) throw config_error("partition and measure spaces differ");
  const auto samples = static_cast<std::size_t>(p.integer("samples"));
  const int m_max = static_cast<int>(p.integer("m_max", 0, 1000));
  const auto sub = static_cast<std::size_t>(p.integer("subsample"));
  const auto draws = sample_entropies(partition, *repr, *approx, samples, p.seed(), budget, threads);

  ExperimentResult r;
  r.table.header = {"cell", "m", "cell_entropy", "partition_complexity", "in_cell", "violating", "fraction",
                    "se", "envelope", "within_envelope", "violating_unshifted", "fraction_unshifted"};
  std::size_t abstained = 0;
  bool monotone = true, within = true;
  for (std::size_t i = 1; i <= partition.size(); ++i) {
    const auto t = stability_table(partition, i, *mu, draws, m_max, budget.effort);
    abstained = t.abstained;
    for (auto& row : t.rows) {
      r.table.rows.push_back({str(i), str(row.m), str(t.cell_entropy), str(t.description_length), str(row.in_cell),
                              str(row.violating), str(row.fraction), str(row.std_error), str(row.envelope),
                              str(row.within_envelope), str(row.violating_unshifted), str(row.fraction_unshifted)});
      if (row.m >= 1) {
        within = within && row.within_envelope;
        monotone = monotone && row.fraction <= t.rows[row.m - 1].fraction;
      }
    }
  }

  CsvTable fine;
  fine.header = {"cell", "samples", "count", "coarse", "max_difference"};
  const std::vector<SampleEntropy> head(draws.begin(), draws.begin() + static_cast<std::ptrdiff_t>(samples / sub));
  double growth = -std::numeric_limits<double>::infinity();
  const auto small = fine_vs_coarse(partition, *mu, head, budget.effort);
  const auto large = fine_vs_coarse(partition, *mu, draws, budget.effort);
  for (std::size_t i = 0; i < partition.size(); ++i) {
    for (auto* c : {&small[i], &large[i]}) {
      fine.rows.push_back({str(c->cell), str(c == &small[i] ? head.size() : draws.size()), str(c->count),
                           str(c->coarse), str(c->max_difference)});
    }
    if (small[i].count > 0) growth = std::max(growth, large[i].max_difference - small[i].max_difference);
  }
  r.extra.emplace_back("fine_coarse", std::move(fine));
  r.summary = {{"abstained", str(abstained)},
               {"monotone", str(monotone)},
               {"within_envelope", str(within)},
               {"fine_coarse_growth", str(growth)},
               {"partition_complexity", str(partition.description_length())}};
  return r;
}

// Fixed region battery: dyadic balls on the system's space.
std::vector<std::vector<Ball>> region_battery(const Space& space, std::size_t count, std::uint64_t seed) {
  std::vector<std::vector<Ball>> out;
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t h = counter_hash(seed, 0x726567, k);
    if (space.name() == "cantor") {
      const int len = 1 + static_cast<int>(h % 4);
      IdealPoint c;
      for (int j = 0; j < len; ++j) c.bits.push_back((h >> (8 + j)) & 1U);
      out.push_back({Ball::around(space, c, Real(Dyadic::ratio(BigInt(3), len + 1)))});
      continue;
    }
    IdealPoint c;
    for (int j = 0; j < dimension(space); ++j) {
      c.coords.push_back(Dyadic::ratio(BigInt((h >> (8 + 6 * j)) & 63U), 6));
    }
    const Dyadic r = Dyadic::ratio(BigInt(1 + static_cast<long long>((h >> 4) % 4)), 4);
    out.push_back({Ball::around(space, c, Real(r))});
  }
  return out;
}

std::vector<std::pair<std::string, Real>> time_battery(TimeKind kind, std::size_t count) {
  static const std::vector<std::string> discrete = {"1", "2", "5", "11", "3", "7", "13", "17"};
  static const std::vector<std::string> continuous = {"1/2", "sqrt(2)", "7/10", "3", "1/3", "sqrt(5)", "2/7", "9"};
  const auto& list = kind == TimeKind::Discrete ? discrete : continuous;
  if (count > list.size()) throw config_error("times must be at most " + std::to_string(list.size()));
  std::vector<std::pair<std::string, Real>> out;
  for (std::size_t k = 0; k < count; ++k) out.emplace_back(list[k], parse_real(list[k]));
  return out;
}

ExperimentResult run_preservation(const Params& p, unsigned threads) {
  const auto samples = static_cast<std::size_t>(p.integer("samples"));
  const auto regions = static_cast<std::size_t>(p.integer("regions"));
  const auto times = static_cast<std::size_t>(p.integer("times"));
  const int precision = static_cast<int>(p.integer("precision"));
  ExperimentResult r;
  r.table.header = {"system", "time", "region", "center", "radius", "mass_lower", "mass_upper",
                    "estimate", "se", "unknown", "pass"};
  std::size_t failures = 0, checks = 0;
  for (auto& name : split(p.str("systems"), ';')) {
    auto g = builtin_dynamics(name);
    const auto battery = region_battery(*g->space(), regions, p.seed());
    const auto ts = time_battery(g->time_kind(), times);
    for (std::size_t ti = 0; ti < ts.size(); ++ti) {
      const auto reports = check_measure_preservation(*g, ts[ti].second, battery, samples,
                                                      counter_hash(p.seed(), 0x74696d65, ti), threads, precision);
      for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& rep = reports[k];
        const Ball& b = battery[k][0];
        std::string center;
        if (b.center_point.bits.empty() && b.center_point.coords.empty()) center = "b:";
        if (!b.center_point.bits.empty()) {
          center = "b:";
          for (auto bit : b.center_point.bits) center += bit ? '1' : '0';
        }
        for (std::size_t j = 0; j < b.center_point.coords.size(); ++j) {
          center += (j ? "," : "") + b.center_point.coords[j].to_decimal();
        }
        r.table.rows.push_back({g->name(), ts[ti].first, str(k), center, b.radius.exact()->to_decimal(),
                                str(rep.region_mass.lower), str(rep.region_mass.upper), str(rep.estimate),
                                str(rep.std_error), str(rep.unknown), str(rep.pass)});
        ++checks;
        failures += !rep.pass;
      }
    }
  }
  r.summary = {{"checks", str(checks)}, {"failures", str(failures)}};
  return r;
}

FiniteRationalMeasure random_measure(std::mt19937_64& rng, std::size_t max_atoms, std::uint64_t max_index) {
  std::uniform_int_distribution<std::size_t> count(1, max_atoms);
  std::uniform_int_distribution<std::uint64_t> index(0, max_index);
  std::uniform_int_distribution<long long> weight(1, 9);
  FiniteRationalMeasure m;
  const std::size_t n = count(rng);
  for (std::size_t i = 0; i < n; ++i) m.atoms.emplace_back(index(rng), Rational(weight(rng)));
  m = m.canonical();
  const Rational t = m.total();
  for (auto& [i, w] : m.atoms) w /= t;
  return m;
}

ExperimentResult run_prokhorov_bench(const Params& p, unsigned threads) {
  const auto instances = static_cast<std::size_t>(p.integer("instances", 0));
  const auto points = static_cast<std::size_t>(p.integer("point_instances", 0));
  const auto atoms = static_cast<std::size_t>(p.integer("atoms", 1, 8));
  const int precision = static_cast<int>(p.integer("precision", 1, 30));
  auto interval = builtin_space("interval");
  auto half_line = builtin_space("nonneg_reals");
  const Rational tol = Dyadic::pow2(-precision).to_rational();

  ExperimentResult r;
  r.table.header = {"instance", "kind", "d_mu_nu", "d_nu_mu", "d_mu_mu", "d_mu_xi", "d_nu_xi", "scan", "expected",
                    "violations"};
  std::vector<std::vector<std::string>> rows(instances + points);
  std::vector<std::size_t> violations(instances + points, 0);
  parallel_for(instances + points, threads, [&](std::size_t k) {
    std::mt19937_64 rng = sample_engine(p.seed(), k);
    if (k < instances) {
      const auto mu = random_measure(rng, atoms, 40), nu = random_measure(rng, atoms, 40),
                 xi = random_measure(rng, atoms, 40);
      const Rational mn = prokhorov(mu, nu, *interval, precision), nm = prokhorov(nu, mu, *interval, precision);
      const Rational mm = prokhorov(mu, mu, *interval, precision);
      const Rational mx = prokhorov(mu, xi, *interval, precision), nx = prokhorov(nu, xi, *interval, precision);
      std::size_t v = 0;
      v += mm > tol;
      v += mn < 0 || mn > 1;
      v += (mn > nm ? Rational(mn - nm) : Rational(nm - mn)) > 2 * tol;
      v += mx > mn + nx + 4 * tol;
      violations[k] = v;
      rows[k] = {str(k), "axioms", str(mn), str(nm), str(mm), str(mx), str(nx), "", "", str(v)};
    } else {
      std::uniform_int_distribution<std::uint64_t> index(0, 400);
      const FiniteRationalMeasure a{{{index(rng), Rational(1)}}}, b{{{index(rng), Rational(1)}}};
      const Rational d = prokhorov(a, b, *half_line, precision);
      const Rational scan = prokhorov_scan(a, b, *half_line, precision);
      const Real dist = half_line->distance(a.atoms[0].first, b.atoms[0].first);
      const Rational exact_d = dist.exact() ? dist.exact()->to_rational() : dist.approx(60).to_rational();
      const Rational expected = exact_d < 1 ? exact_d : Rational(1);
      std::size_t v = 0;
      v += d < expected - tol || d > expected + tol;
      v += scan < expected - tol || scan > expected + tol;
      violations[k] = v;
      rows[k] = {str(k), "point_mass", str(d), "", "", "", "", str(scan), str(expected), str(v)};
    }
  });
  std::size_t total = 0, axiom = 0, point = 0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    r.table.rows.push_back(std::move(rows[k]));
    total += violations[k];
    (k < instances ? axiom : point) += violations[k];
  }
  r.summary = {{"violations", str(total)}, {"axiom_violations", str(axiom)}, {"point_violations", str(point)}};
  return r;
}

}  // namespace

// Smallest e on the 2^-precision grid with mu(A) <= nu(A^e) + e for every
// subset A of the support of mu; A^e is the open e-neighbourhood.
Rational prokhorov_scan(const FiniteRationalMeasure& mu, const FiniteRationalMeasure& nu, const Space& space,
                        int precision) {
  const auto a = mu.canonical(), b = nu.canonical();
  if (a.atoms.size() > 12) throw Error(ErrorCode::InvalidArgument, "scan oracle limited to 12 atoms");
  std::vector<std::vector<Rational>> dist(a.atoms.size(), std::vector<Rational>(b.atoms.size()));
  for (std::size_t i = 0; i < a.atoms.size(); ++i) {
    for (std::size_t j = 0; j < b.atoms.size(); ++j) {
      const Real d = space.distance(a.atoms[i].first, b.atoms[j].first);
      dist[i][j] = d.exact() ? d.exact()->to_rational() : d.approx(precision + 30).to_rational();
    }
  }
  const Rational step = Dyadic::pow2(-precision).to_rational();
  for (long long k = 0;; ++k) {
    const Rational e = step * k;
    bool ok = true;
    for (std::uint64_t mask = 1; ok && mask < (std::uint64_t{1} << a.atoms.size()); ++mask) {
      Rational lhs = 0, rhs = e;
      for (std::size_t i = 0; i < a.atoms.size(); ++i) {
        if (mask >> i & 1U) lhs += a.atoms[i].second;
      }
      for (std::size_t j = 0; j < b.atoms.size(); ++j) {
        for (std::size_t i = 0; i < a.atoms.size(); ++i) {
          if ((mask >> i & 1U) && dist[i][j] < e) {
            rhs += b.atoms[j].second;
            break;
          }
        }
      }
      ok = lhs <= rhs;
    }
    if (ok) return e;
  }
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    ++row;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw config_error("line " + std::to_string(row) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    if (key.empty()) throw config_error("line " + std::to_string(row) + ": empty key");
    if (c.has(key)) throw config_error("line " + std::to_string(row) + ": duplicate key " + key);
    c.set(key, value);
  }
  return c;
}

Config Config::load(const std::string& path) { return parse(read_file(path)); }

std::string csv_field(const std::string& value) {
  if (value.find_first_of(",\"\r\n") == std::string::npos) return value;
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) return "0";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string CsvTable::to_csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out += ',';
      out += csv_field(fields[k]);
    }
    out += '\n';
  };
  line(header);
  for (auto& r : rows) line(r);
  return out;
}

const std::string& ExperimentResult::summary_value(const std::string& key) const {
  for (auto& [k, v] : summary) {
    if (k == key) return v;
  }
  throw Error(ErrorCode::InvalidArgument, "no summary entry " + key);
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (auto& [k, v] : key_table()) out.push_back(k);
  return out;
}

const std::vector<ConfigKey>& experiment_keys(const std::string& experiment) {
  const auto& table = key_table();
  const auto it = table.find(experiment);
  if (it == table.end()) throw config_error("unknown experiment " + experiment);
  return it->second;
}

ExperimentResult run_experiment(const std::string& experiment, const Config& config, unsigned threads) {
  const Params p(experiment, config);
  ExperimentResult r;
  if (experiment == "oscillation") r = run_oscillation(p, threads);
  if (experiment == "outliers") r = run_outliers(p, threads);
  if (experiment == "discrete-orbit") r = run_discrete(p, threads);
  if (experiment == "main-tail") r = run_main_tail(p, threads);
  if (experiment == "stability") r = run_stability(p, threads);
  if (experiment == "preservation") r = run_preservation(p, threads);
  if (experiment == "prokhorov-bench") r = run_prokhorov_bench(p, threads);
  r.experiment = experiment;
  r.resolved = p.values();
  return r;
}

void write_result(const ExperimentResult& result, const std::string& out_path, double wall_seconds) {
  auto write = [](const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
  };
  write(out_path, result.table.to_csv());
  std::string stem = out_path;
  if (stem.size() > 4 && stem.substr(stem.size() - 4) == ".csv") stem.resize(stem.size() - 4);
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();
  for (auto& [name, table] : result.extra) {
    const std::string path = stem + "." + name + ".csv";
    write(path, table.to_csv());
    extra[name] = path;
  }
  nlohmann::ordered_json meta;
  meta["format"] = "entropica-run 1";
  meta["experiment"] = result.experiment;
  meta["version"] = version_string();
  meta["config"] = result.resolved;
  meta["rows"] = result.table.rows.size();
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  for (auto& [k, v] : result.summary) summary[k] = v;
  meta["summary"] = summary;
  meta["extra_tables"] = extra;
  meta["wall_seconds"] = wall_seconds;
  write(out_path + ".meta", meta.dump(2) + "\n");
}

std::string version_string() { return ENTROPICA_VERSION; }

}  // namespace entropica
