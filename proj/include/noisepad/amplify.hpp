#pragma once

#include <bit>
#include <cstdint>
#include <span>
#include <vector>

#include "bits.hpp"
#include "keys.hpp"
#include "random.hpp"

namespace noisepad {

/// Output length for privacy amplification; <= 0 means the key is used up.
inline std::int64_t amplified_length(std::size_t input_bits, const LeakLedger& ledger, std::size_t safety_bits) {
  return static_cast<std::int64_t>(input_bits) - static_cast<std::int64_t>(ledger.outstanding_bits()) -
         static_cast<std::int64_t>(safety_bits);
}

/// Binary Toeplitz-matrix hash to `output_bits` bits. The matrix diagonal
/// (n + m - 1 bits) comes from a public seeded stream; row j selects
/// diag[j + k] against the reversed input, so T[j][i] = diag[j - i + n - 1].
inline Bits toeplitz_hash(std::span<const std::uint8_t> input, std::size_t output_bits, std::uint64_t public_seed) {
  const std::size_t n = input.size();
  if (n == 0 || output_bits == 0) return Bits(output_bits, 0);
  const std::size_t diag_len = n + output_bits - 1;
  const Bits diag = SeededStream(public_seed).bits(diag_len);

  const std::size_t words = (n + 63) / 64;
  std::vector<std::uint64_t> rev(words, 0);
  for (std::size_t k = 0; k < n; ++k) rev[k / 64] |= std::uint64_t{input[n - 1 - k]} << (k % 64);

  std::vector<std::uint64_t> d((diag_len + 63) / 64 + 1, 0);
  for (std::size_t i = 0; i < diag_len; ++i) d[i / 64] |= std::uint64_t{diag[i]} << (i % 64);

  Bits out(output_bits);
  for (std::size_t j = 0; j < output_bits; ++j) {
    const std::size_t base = j / 64;
    const unsigned shift = static_cast<unsigned>(j % 64);
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < words; ++w) {
      std::uint64_t window = d[base + w] >> shift;
      if (shift != 0) window |= d[base + w + 1] << (64 - shift);
      acc ^= window & rev[w];
    }
    out[j] = static_cast<std::uint8_t>(std::popcount(acc) & 1);
  }
  return out;
}

/// Compresses a reconciled key so that the leak charged in `ledger` (plus
/// `safety_bits`) is squeezed out. Updates ledger.discarded_bits.
inline Bits privacy_amplify(std::span<const std::uint8_t> bits, LeakLedger& ledger, std::size_t safety_bits,
                            std::uint64_t public_seed) {
  const auto m = amplified_length(bits.size(), ledger, safety_bits);
  if (m <= 0) {
    throw Error(ErrorCode::key_exhausted,
                "leak estimate consumes the whole block; a new shared seed key has to restart the chain");
  }
  ledger.discarded_bits += ledger.outstanding_bits();
  return toeplitz_hash(bits, static_cast<std::size_t>(m), public_seed);
}

}  // namespace noisepad
