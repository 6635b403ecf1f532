#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace barter {

std::uint64_t splitmix64(std::uint64_t& state);

// Seed of a named sub-stream derived from a master seed (FNV-1a of the name mixed by SplitMix64).
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream, std::uint64_t index = 0);

inline std::mt19937_64 make_stream(std::uint64_t master, std::string_view stream, std::uint64_t index = 0) {
  return std::mt19937_64(derive_seed(master, stream, index));
}

// Uniform integer in [0, bound) without distribution-implementation dependence.
std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t bound);
// Uniform real in [0, 1) from the top 53 bits.
double uniform_unit(std::mt19937_64& rng);
double standard_normal(std::mt19937_64& rng);

}  // namespace barter
