#pragma once

// Seeded, splittable random streams. The library never touches ambient
// entropy: every stream comes from an explicit (seed, index) pair.

#include <cstdint>
#include <random>

namespace polya {

using Rng = std::mt19937_64;

// Independent sub-stream number `index` of master seed `seed`. seed_seq
// scrambles all four words, so nearby (seed, index) pairs give unrelated
// states.
inline Rng substream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace polya
