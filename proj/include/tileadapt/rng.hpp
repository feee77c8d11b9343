#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace tileadapt {

// Seeded randomness must produce byte-identical results across platforms and
// standard library implementations, so no std:: distributions are used
// anywhere in the pipeline.

/// SplitMix64 generator.
struct SplitMix64 {
  std::uint64_t state;

  explicit SplitMix64(std::uint64_t seed) : state(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  /// Uniform draw in [0, n). Modulo bias is below n/2^64 and irrelevant here.
  std::uint64_t below(std::uint64_t n) { return next() % n; }

  /// Uniform double in [0, 1).
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

/// FNV-1a over the text, finalized through SplitMix64 together with the seed.
/// Stable across platforms; used to derive per-tile seeds.
std::uint64_t stable_hash64(std::uint64_t seed, std::string_view text);

/// In-place Fisher-Yates shuffle driven by the given generator.
template <typename T>
void shuffle(std::vector<T>& v, SplitMix64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace tileadapt
