#pragma once

#include <cstdint>
#include <functional>
#include <random>

namespace entropica {

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based stream: the value depends only on (seed, stream, counter),
// so Monte Carlo results do not depend on scheduling.
std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

// Uniform in [0, 1) with 53 random bits.
double counter_uniform(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter);

// Per-sample engine for code that wants a conventional generator.
std::mt19937_64 sample_engine(std::uint64_t seed, std::uint64_t index);

// Runs body(i) for i in [0, count) on `threads` workers (0 = hardware).
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace entropica
