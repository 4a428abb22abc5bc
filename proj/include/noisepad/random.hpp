#pragma once

#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "bits.hpp"

namespace noisepad {

/// Mixes a base seed with a stream label. Used to split one operator seed into
/// independent generator streams (fresh bits, noise, public values).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Bit and integer draws built only on raw mt19937_64 output, whose sequence
/// is fixed by the standard. Public values (hash seeds, permutations) must
/// agree between peers built against different standard libraries.
class SeededStream {
 public:
  explicit SeededStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_word() { return engine_(); }

  /// Uniform in [0, bound), rejection sampled.
  std::uint64_t below(std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % bound;
  }

  Bits bits(std::size_t count) {
    Bits out(count);
    std::uint64_t word = 0;
    for (std::size_t i = 0; i < count; ++i) {
      if (i % 64 == 0) word = engine_();
      out[i] = static_cast<std::uint8_t>((word >> (i % 64)) & 1u);
    }
    return out;
  }

 private:
  std::mt19937_64 engine_;
};

inline std::vector<std::size_t> public_permutation(std::size_t n, std::uint64_t seed) {
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  SeededStream stream(seed);
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(stream.below(i));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

/// Test-only key derivation; never a substitute for shared physical entropy.
inline Bits bits_from_seed(std::uint64_t seed, std::size_t count) {
  return SeededStream(derive_seed(seed, 0x4B30)).bits(count);
}

}  // namespace noisepad
