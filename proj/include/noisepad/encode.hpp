#pragma once

// Dual-basis binary phase alphabet. Basis 0 puts bit 0 at phase 0 and bit 1
// at pi; basis 1 is rotated by delta_phi with the bit assignment swapped, so
// bit 1 sits at delta_phi and bit 0 at delta_phi + pi.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace noisepad::encode {

inline constexpr int kMinResolutionBits = 8;
inline constexpr int kMaxResolutionBits = 56;

/// Smallest R whose grid step 2*pi/2^R is at most delta_phi/2.
inline int minimum_resolution_bits(double delta_phi) {
  for (int r = kMinResolutionBits; r <= kMaxResolutionBits; ++r) {
    if (2.0 * std::numbers::pi / std::ldexp(1.0, r) <= delta_phi / 2.0) return r;
  }
  throw Error(ErrorCode::domain, "basis offset too small for any supported resolution");
}

class Constellation {
 public:
  Constellation(double delta_phi, int resolution_bits) : delta_phi_(delta_phi), resolution_bits_(resolution_bits) {
    if (!(delta_phi > 0.0) || !(delta_phi < std::numbers::pi / 8.0)) {
      throw Error(ErrorCode::domain, "basis offset must lie in (0, pi/8), got " + std::to_string(delta_phi));
    }
    if (resolution_bits < kMinResolutionBits || resolution_bits > kMaxResolutionBits) {
      throw Error(ErrorCode::domain, "resolution must lie in [8, 56] bits, got " + std::to_string(resolution_bits));
    }
    if (2.0 * std::numbers::pi / std::ldexp(1.0, resolution_bits) > delta_phi / 2.0) {
      throw Error(ErrorCode::domain, "quantization grid of " + std::to_string(resolution_bits) +
                                         " bits does not resolve the basis offset");
    }
  }

  double delta_phi() const noexcept { return delta_phi_; }
  int resolution_bits() const noexcept { return resolution_bits_; }
  std::size_t symbol_bytes() const noexcept { return static_cast<std::size_t>((resolution_bits_ + 7) / 8); }

 private:
  double delta_phi_;
  int resolution_bits_;
};

struct QuantizedPhase {
  std::uint64_t level = 0;
  friend bool operator==(const QuantizedPhase&, const QuantizedPhase&) = default;
};

enum class SymbolSet : std::uint8_t { set1 = 0, set2 = 1 };

/// Wraps an angle into (-pi, pi].
inline double wrap_phase(double phi) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double r = std::remainder(phi, two_pi);
  if (r <= -std::numbers::pi) r += two_pi;
  return r;
}

inline double modulate(std::uint8_t bit, std::uint8_t basis, const Constellation& c) {
  const double pi = std::numbers::pi;
  if (basis == 0) return bit == 0 ? 0.0 : pi;
  return bit == 1 ? c.delta_phi() : c.delta_phi() + pi;
}

inline QuantizedPhase quantize(double phase, int resolution_bits) {
  if (resolution_bits < kMinResolutionBits || resolution_bits > kMaxResolutionBits) {
    throw Error(ErrorCode::domain, "resolution must lie in [8, 56] bits");
  }
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  long double x = std::fmod(static_cast<long double>(phase), two_pi);
  if (x < 0) x += two_pi;
  const long double levels = std::ldexp(1.0L, resolution_bits);
  auto level = static_cast<std::uint64_t>(std::floor(x / two_pi * levels + 0.5L));
  const std::uint64_t mask = (std::uint64_t{1} << resolution_bits) - 1;
  return {level & mask};
}

inline double dequantize(QuantizedPhase q, int resolution_bits) {
  if (q.level >> resolution_bits) throw Error(ErrorCode::domain, "level outside the quantization grid");
  const long double two_pi = 2.0L * std::numbers::pi_v<long double>;
  return static_cast<double>(two_pi * static_cast<long double>(q.level) / std::ldexp(1.0L, resolution_bits));
}

inline QuantizedPhase transmit_symbol(std::uint8_t bit, std::uint8_t basis, const Constellation& c, double noise) {
  return quantize(modulate(bit, basis, c) + noise, c.resolution_bits());
}

/// Half-plane decision between the two antipodal clusters; readable without
/// any basis knowledge. For ideal symbols the result equals bit XOR basis.
inline SymbolSet classify_set(QuantizedPhase q, const Constellation& c) {
  const double d = wrap_phase(dequantize(q, c.resolution_bits()) - c.delta_phi() / 2.0);
  return (d > -std::numbers::pi / 2.0 && d <= std::numbers::pi / 2.0) ? SymbolSet::set1 : SymbolSet::set2;
}

/// Phase relative to the basis-0 point of the symbol's set: about 0 for a
/// basis-0 emission and about delta_phi for a basis-1 emission.
inline double offset_within_set(QuantizedPhase q, const Constellation& c) {
  const double phi = dequantize(q, c.resolution_bits());
  const double origin = classify_set(q, c) == SymbolSet::set1 ? 0.0 : std::numbers::pi;
  return wrap_phase(phi - origin);
}

inline std::uint8_t decode_with_basis(QuantizedPhase q, std::uint8_t basis, const Constellation& c) {
  const double phi = dequantize(q, c.resolution_bits());
  const double d0 = std::abs(wrap_phase(phi - modulate(0, basis, c)));
  const double d1 = std::abs(wrap_phase(phi - modulate(1, basis, c)));
  return d1 < d0 ? 1 : 0;
}

// Packed symbol format: ceil(R/8) little-endian bytes per level, in order.
inline std::vector<std::uint8_t> pack_symbols(std::span<const QuantizedPhase> symbols, int resolution_bits) {
  const std::size_t width = static_cast<std::size_t>((resolution_bits + 7) / 8);
  std::vector<std::uint8_t> out;
  out.reserve(symbols.size() * width);
  for (const auto& s : symbols) {
    for (std::size_t b = 0; b < width; ++b) out.push_back(static_cast<std::uint8_t>(s.level >> (8 * b)));
  }
  return out;
}

inline std::vector<QuantizedPhase> unpack_symbols(std::span<const std::uint8_t> bytes, int resolution_bits) {
  const std::size_t width = static_cast<std::size_t>((resolution_bits + 7) / 8);
  if (bytes.size() % width != 0) {
    throw Error(ErrorCode::protocol, "packed symbol data is not a whole number of symbols");
  }
  std::vector<QuantizedPhase> out(bytes.size() / width);
  for (std::size_t i = 0; i < out.size(); ++i) {
    std::uint64_t level = 0;
    for (std::size_t b = 0; b < width; ++b) level |= std::uint64_t{bytes[i * width + b]} << (8 * b);
    if (level >> resolution_bits) throw Error(ErrorCode::protocol, "packed symbol level outside the grid");
    out[i].level = level;
  }
  return out;
}

}  // namespace noisepad::encode
