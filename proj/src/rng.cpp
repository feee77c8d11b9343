#include "tileadapt/rng.hpp"

namespace tileadapt {

std::uint64_t stable_hash64(std::uint64_t seed, std::string_view text) {
  std::uint64_t h = 1469598103934665603ull;  // FNV offset basis
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;  // FNV prime
  }
  SplitMix64 mixer(seed ^ h);
  return mixer.next();
}

}  // namespace tileadapt
