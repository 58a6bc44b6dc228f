#include "entropica/complexity.hpp"

#include "entropica/error.hpp"

#include <algorithm>
#include <map>
#include <mutex>

namespace entropica {

namespace {

std::size_t ceil_log2(std::uint64_t h) { return h <= 1 ? 0 : static_cast<std::size_t>(64 - __builtin_clzll(h - 1)); }

struct Token {
  bool match = false;
  std::uint8_t bit = 0;
  std::size_t dist = 0;
  std::size_t len = 1;
  bool to_end = false;
  std::size_t cost = 0;
};

// For each position k >= start of z: the longest match of z[k..] against a
// source starting before k (overlap allowed), and the nearest such source.
struct Matches {
  std::vector<std::size_t> length;
  std::vector<std::size_t> dist;
};

Matches longest_previous(const Bits& z, std::size_t start) {
  const std::size_t n = z.size();
  Matches m{std::vector<std::size_t>(n - start, 0), std::vector<std::size_t>(n - start, 0)};
  for (std::size_t d = 1; d < n; ++d) {
    std::size_t run = 0;
    for (std::size_t k = n; k-- > std::max(d, start);) {
      run = z[k] == z[k - d] ? run + 1 : 0;
      // Strictly longer only, so the smallest distance wins ties.
      if (run > m.length[k - start]) {
        m.length[k - start] = run;
        m.dist[k - start] = d;
      }
    }
  }
  return m;
}

// Greedy token at position p of a string of length `end` (in x coordinates).
Token choose(const Bits& x, const Matches& m, std::size_t cond, std::size_t p, std::size_t end) {
  Token t;
  t.bit = x[p];
  const std::size_t h = cond + p;
  if (h == 0) {
    t.cost = 1;
    return t;
  }
  t.cost = 2;
  const std::size_t len = std::min(m.length[p], end - p);
  if (len == 0) return t;
  const bool to_end = len == end - p;
  const std::size_t cost = 2 + ceil_log2(h) + (to_end ? 0 : gamma_length(len));
  if (cost < 2 * len) {
    t.match = true;
    t.dist = m.dist[p];
    t.len = len;
    t.to_end = to_end;
    t.cost = cost;
  }
  return t;
}

Bits concat(const Bits* condition, const Bits& x) {
  Bits z;
  if (condition) z = *condition;
  z.insert(z.end(), x.begin(), x.end());
  return z;
}

std::vector<Token> parse(const Bits& x, const Bits* condition) {
  const std::size_t cond = condition ? condition->size() : 0;
  const Matches m = longest_previous(concat(condition, x), cond);
  std::vector<Token> out;
  for (std::size_t p = 0; p < x.size();) {
    out.push_back(choose(x, m, cond, p, x.size()));
    p += out.back().match ? out.back().len : 1;
  }
  return out;
}

void put_fixed(std::uint64_t v, std::size_t width, Bits& out) {
  for (std::size_t i = width; i-- > 0;) out.push_back(static_cast<std::uint8_t>((v >> i) & 1U));
}

class Reader {
 public:
  explicit Reader(const Bits& b) : b_(b) {}
  std::uint8_t bit() {
    if (pos_ >= b_.size()) throw Error(ErrorCode::Parse, "truncated codeword");
    return b_[pos_++];
  }
  std::uint64_t fixed(std::size_t width) {
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v = (v << 1) | bit();
    return v;
  }
  std::uint64_t gamma() {
    std::size_t zeros = 0;
    while (bit() == 0) {
      if (++zeros > 63) throw Error(ErrorCode::Parse, "gamma code too long");
    }
    return (std::uint64_t{1} << zeros) | fixed(zeros);
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  const Bits& b_;
  std::size_t pos_ = 0;
};

std::size_t lz77_length(const Bits& x, const Bits* condition) {
  std::size_t total = gamma_length(x.size() + 1);
  for (auto& t : parse(x, condition)) total += t.cost;
  return total;
}

std::vector<std::size_t> lz77_prefix_lengths(const Bits& x, std::size_t depth, const Bits* condition) {
  const std::size_t cond = condition ? condition->size() : 0;
  depth = std::min(depth, x.size());
  const Matches m = longest_previous(concat(condition, x), cond);
  // Parse of the whole string; a prefix shares every token that ends
  // strictly before the prefix end without being clipped by it.
  std::vector<std::size_t> start, before;
  std::size_t acc = 0;
  for (std::size_t p = 0; p < x.size();) {
    const Token t = choose(x, m, cond, p, x.size());
    start.push_back(p);
    before.push_back(acc);
    acc += t.cost;
    p += t.match ? t.len : 1;
  }
  start.push_back(x.size());
  before.push_back(acc);
  std::vector<std::size_t> out;
  out.reserve(depth);
  std::size_t i = 0;
  for (std::size_t n = 1; n <= depth; ++n) {
    while (start[i] < n && m.length[start[i]] < n - start[i]) ++i;
    std::size_t cost = before[i];
    for (std::size_t p = std::min(start[i], n); p < n;) {
      const Token t = choose(x, m, cond, p, n);
      cost += t.cost;
      p += t.match ? t.len : 1;
    }
    out.push_back(gamma_length(n + 1) + cost);
  }
  return out;
}

class LiteralCompressor final : public Compressor {
 public:
  std::string name() const override { return "literal"; }
  std::size_t code_length(const Bits& x, const Bits*) const override {
    return gamma_length(x.size() + 1) + x.size();
  }
  std::vector<std::size_t> prefix_code_lengths(const Bits& x, std::size_t depth, const Bits*) const override {
    std::vector<std::size_t> out;
    for (std::size_t n = 1; n <= std::min(depth, x.size()); ++n) out.push_back(gamma_length(n + 1) + n);
    return out;
  }
};

class Lz77Compressor final : public Compressor {
 public:
  std::string name() const override { return "lz77"; }
  std::size_t code_length(const Bits& x, const Bits* condition) const override {
    return lz77_length(x, condition);
  }
  std::vector<std::size_t> prefix_code_lengths(const Bits& x, std::size_t depth,
                                               const Bits* condition) const override {
    return lz77_prefix_lengths(x, depth, condition);
  }
};

class DefaultCompressor final : public Compressor {
 public:
  std::string name() const override { return "default"; }
  std::size_t code_length(const Bits& x, const Bits* condition) const override {
    return 1 + std::min(gamma_length(x.size() + 1) + x.size(), lz77_length(x, condition));
  }
  std::vector<std::size_t> prefix_code_lengths(const Bits& x, std::size_t depth,
                                               const Bits* condition) const override {
    auto out = lz77_prefix_lengths(x, depth, condition);
    for (std::size_t n = 1; n <= out.size(); ++n) {
      out[n - 1] = 1 + std::min(out[n - 1], gamma_length(n + 1) + n);
    }
    return out;
  }
};

class ByteCompressor final : public Compressor {
 public:
  ByteCompressor(std::string name, ByteCodeLength fn) : name_(std::move(name)), fn_(std::move(fn)) {}
  std::string name() const override { return name_; }
  std::size_t code_length(const Bits& x, const Bits* condition) const override { return fn_(x, condition); }

 private:
  std::string name_;
  ByteCodeLength fn_;
};

struct Registry {
  std::mutex mutex;
  std::map<std::string, CompressorPtr> entries;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

std::vector<std::size_t> Compressor::prefix_code_lengths(const Bits& x, std::size_t depth,
                                                         const Bits* condition) const {
  std::vector<std::size_t> out;
  Bits prefix;
  for (std::size_t n = 1; n <= std::min(depth, x.size()); ++n) {
    prefix.push_back(x[n - 1]);
    out.push_back(code_length(prefix, condition));
  }
  return out;
}

void gamma_encode(std::uint64_t v, Bits& out) {
  if (v == 0) throw Error(ErrorCode::InvalidArgument, "gamma code needs v >= 1");
  const std::size_t width = static_cast<std::size_t>(63 - __builtin_clzll(v));
  out.insert(out.end(), width, 0);
  put_fixed(v, width + 1, out);
}

std::size_t gamma_length(std::uint64_t v) {
  return 2 * static_cast<std::size_t>(63 - __builtin_clzll(v)) + 1;
}

namespace codec {

Bits encode_literal(const Bits& x) {
  Bits out;
  gamma_encode(x.size() + 1, out);
  out.insert(out.end(), x.begin(), x.end());
  return out;
}

Bits encode_lz77(const Bits& x, const Bits* condition) {
  const std::size_t cond = condition ? condition->size() : 0;
  Bits out;
  gamma_encode(x.size() + 1, out);
  std::size_t p = 0;
  for (auto& t : parse(x, condition)) {
    const std::size_t h = cond + p;
    if (h == 0) {
      out.push_back(t.bit);
    } else if (!t.match) {
      out.push_back(0);
      out.push_back(t.bit);
    } else {
      out.push_back(1);
      put_fixed(t.dist - 1, ceil_log2(h), out);
      out.push_back(t.to_end ? 1 : 0);
      if (!t.to_end) gamma_encode(t.len, out);
    }
    p += t.match ? t.len : 1;
  }
  return out;
}

Bits encode_default(const Bits& x, const Bits* condition) {
  Bits lit = encode_literal(x), lz = encode_lz77(x, condition);
  Bits out;
  if (lz.size() < lit.size()) {
    out.push_back(1);
    out.insert(out.end(), lz.begin(), lz.end());
  } else {
    out.push_back(0);
    out.insert(out.end(), lit.begin(), lit.end());
  }
  return out;
}

Bits decode_default(const Bits& code, const Bits* condition) {
  Reader r(code);
  const bool lz = r.bit() == 1;
  const std::uint64_t len = r.gamma() - 1;
  Bits z = condition ? *condition : Bits{};
  const std::size_t cond = z.size();
  if (!lz) {
    for (std::uint64_t i = 0; i < len; ++i) z.push_back(r.bit());
  } else {
    while (z.size() - cond < len) {
      const std::size_t h = z.size();
      const std::size_t p = h - cond;
      if (h == 0 || r.bit() == 0) {
        z.push_back(r.bit());
        continue;
      }
      const std::size_t dist = static_cast<std::size_t>(r.fixed(ceil_log2(h))) + 1;
      const bool to_end = r.bit() == 1;
      const std::size_t n = to_end ? len - p : static_cast<std::size_t>(r.gamma());
      if (dist > h || p + n > len) throw Error(ErrorCode::Parse, "bad back-reference");
      for (std::size_t k = 0; k < n; ++k) z.push_back(z[z.size() - dist]);
    }
  }
  if (!r.done()) throw Error(ErrorCode::Parse, "trailing bits after codeword");
  return Bits(z.begin() + static_cast<std::ptrdiff_t>(cond), z.end());
}

}  // namespace codec

CompressorPtr default_compressor() {
  static const CompressorPtr c = std::make_shared<DefaultCompressor>();
  return c;
}

CompressorPtr literal_compressor() {
  static const CompressorPtr c = std::make_shared<LiteralCompressor>();
  return c;
}

CompressorPtr lz77_compressor() {
  static const CompressorPtr c = std::make_shared<Lz77Compressor>();
  return c;
}

void register_compressor(const std::string& name, ByteCodeLength fn) {
  register_compressor(std::make_shared<ByteCompressor>(name, std::move(fn)));
}

void register_compressor(CompressorPtr compressor) {
  const std::string name = compressor->name();
  if (name == "default" || name == "literal" || name == "lz77") {
    throw Error(ErrorCode::InvalidArgument, "cannot replace built-in compressor " + name);
  }
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  reg.entries[name] = std::move(compressor);
}

CompressorPtr find_compressor(const std::string& name) {
  if (name == "default") return default_compressor();
  if (name == "literal") return literal_compressor();
  if (name == "lz77") return lz77_compressor();
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  auto it = reg.entries.find(name);
  if (it == reg.entries.end()) throw Error(ErrorCode::UnknownName, "unknown compressor: " + name);
  return it->second;
}

std::vector<std::string> compressor_names() {
  std::vector<std::string> out{"default", "literal", "lz77"};
  auto& reg = registry();
  std::lock_guard lock(reg.mutex);
  for (auto& [name, c] : reg.entries) out.push_back(name);
  return out;
}

Bits to_bits(std::uint64_t n) {
  if (n == 0) return {0};
  Bits out;
  put_fixed(n, static_cast<std::size_t>(64 - __builtin_clzll(n)), out);
  return out;
}

Bits to_bits(const std::string& text) {
  Bits out;
  for (unsigned char ch : text) put_fixed(ch, 8, out);
  return out;
}

std::size_t integer_complexity(const Compressor& c, std::uint64_t n) { return c.code_length(to_bits(n)); }

}  // namespace entropica
