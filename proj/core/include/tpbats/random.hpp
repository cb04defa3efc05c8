#pragma once

#include <cstdint>
#include <random>

namespace tpbats {

/// Pseudo-random engine used everywhere in the library. Every stream is
/// seeded from a master seed through derive_seed(), so that a run is fully
/// determined by (configuration, master seed).
using Rng = std::mt19937_64;

/// Identifies what a derived stream is used for. Values are part of the
/// reproducibility contract; do not renumber.
enum class StreamKind : std::uint32_t {
  source_link = 1,  // source -> user erasure link, a = user
  peer_link = 2,    // user a -> user b erasure link
  encoder = 3,      // outer encoder (degrees, sources, generators)
  recoder = 4,      // per-user recoding coefficients, a = user
  access = 5,       // randomized medium access
  payload = 6,      // synthetic file contents
  trial = 7,        // per-trial master seed, a = trial index
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for the stream (kind, a, b) under `master`. Streams with different
/// keys are independent; adding endpoints never changes existing streams.
std::uint64_t derive_seed(std::uint64_t master, StreamKind kind,
                          std::uint32_t a = 0, std::uint32_t b = 0) noexcept;

/// Uniform double in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform integer in [0, bound). `bound` must be positive.
std::uint64_t uniform_below(Rng& rng, std::uint64_t bound);

/// True with probability `p`.
inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

inline std::uint8_t random_byte(Rng& rng) {
  return static_cast<std::uint8_t>(rng() >> 56);
}

}  // namespace tpbats
