#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace entropica {

using Bits = std::vector<std::uint8_t>;

// Prefix-free code length K^(x | y) in bits. Implementations must satisfy
// the Kraft inequality for every fixed condition and be pure.
class Compressor {
 public:
  virtual ~Compressor() = default;
  virtual std::string name() const = 0;
  virtual std::size_t code_length(const Bits& x, const Bits* condition = nullptr) const = 0;
  // code_length(x[0..n)) for n = 1..depth.
  virtual std::vector<std::size_t> prefix_code_lengths(const Bits& x, std::size_t depth,
                                                       const Bits* condition = nullptr) const;
};

using CompressorPtr = std::shared_ptr<const Compressor>;

// Elias gamma code of v >= 1.
void gamma_encode(std::uint64_t v, Bits& out);
std::size_t gamma_length(std::uint64_t v);

// The codecs behind the built-in approximators. Each codeword starts with
// gamma(|x| + 1); `literal` then stores x verbatim, `lz77` parses it into
// literals and back-references (a condition string is available as history).
namespace codec {
Bits encode_literal(const Bits& x);
Bits encode_lz77(const Bits& x, const Bits* condition = nullptr);
// A selector bit picks the shorter of the two.
Bits encode_default(const Bits& x, const Bits* condition = nullptr);
Bits decode_default(const Bits& code, const Bits* condition = nullptr);
}  // namespace codec

CompressorPtr default_compressor();
CompressorPtr literal_compressor();
CompressorPtr lz77_compressor();

// Plug-ins see bit strings as one byte (0 or 1) per bit.
using ByteCodeLength = std::function<std::size_t(const std::vector<std::uint8_t>& bytes,
                                                 const std::vector<std::uint8_t>* condition)>;
void register_compressor(const std::string& name, ByteCodeLength fn);
void register_compressor(CompressorPtr compressor);
// "default", "literal", "lz77" and anything registered.
CompressorPtr find_compressor(const std::string& name);
std::vector<std::string> compressor_names();

Bits to_bits(std::uint64_t n);  // binary digits of n, most significant first; "0" for 0
Bits to_bits(const std::string& text);  // 8 bits per character
// K^(n) for an integer, from its binary digits.
std::size_t integer_complexity(const Compressor& c, std::uint64_t n);

}  // namespace entropica
