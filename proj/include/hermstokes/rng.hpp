#pragma once

#include <cstdint>

namespace hermstokes {

/**
 * @brief Counter-based deterministic generator (external reproducibility contract).
 *
 * Draw i from stream `seed` is defined as
 *   z = seed * 0x9E3779B97F4A7C15 + i   (mod 2^64)
 * passed through the splitmix64 finalizer; uniform doubles map the top 53 bits
 * onto [-1, 1). Values depend only on (seed, i), never on call order, so
 * ensembles can be evaluated in any schedule and still reproduce bit-exactly.
 */
inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t counter) {
  std::uint64_t z = seed * 0x9E3779B97F4A7C15ULL + counter;
  z = (z + 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/** @brief Uniform double in [-1, 1) for draw `counter` of stream `seed`. */
inline double uniform_pm1(std::uint64_t seed, std::uint64_t counter) {
  const std::uint64_t v = counter_hash(seed, counter);
  return static_cast<double>(v >> 11) * (1.0 / 9007199254740992.0) * 2.0 - 1.0;
}

/** @brief Derive an independent child stream (per-sample seeds in ensembles). */
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return counter_hash(seed ^ 0xA0761D6478BD642FULL, index);
}

}  // namespace hermstokes
