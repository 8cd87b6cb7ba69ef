#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace celldev {

using Rng = std::mt19937_64;

// Derives an independent generator from a base seed and a path of stream
// labels, e.g. stream(seed, {run, generation, phase}). Equal paths give
// equal streams; any differing label gives an unrelated stream.
inline Rng stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path = {}) {
  std::vector<std::uint32_t> words;
  words.reserve(2 + 2 * path.size());
  auto push = [&words](std::uint64_t v) {
    words.push_back(static_cast<std::uint32_t>(v));
    words.push_back(static_cast<std::uint32_t>(v >> 32));
  };
  push(seed);
  for (auto label : path) push(label);
  std::seed_seq seq(words.begin(), words.end());
  return Rng(seq);
}

namespace phase {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t reproduce = 2;
inline constexpr std::uint64_t perturb = 3;
inline constexpr std::uint64_t randomize = 4;
}  // namespace phase

inline double uniform(Rng& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline bool chance(Rng& rng, double p) {
  if (p <= 0.0) return false;
  if (p >= 1.0) return true;
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p;
}

inline std::size_t pick_index(Rng& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

}  // namespace celldev
