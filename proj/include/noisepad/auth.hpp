#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <span>

#include <openssl/evp.h>

#include "bits.hpp"
#include "keys.hpp"

namespace noisepad {

inline constexpr std::size_t kTagKeyBits = 256;

using Tag = std::array<std::uint8_t, 32>;

/// SHA-256 over (key || message || key) using the first 256 key bits.
inline Tag keyed_tag(std::span<const std::uint8_t> key_bits, std::span<const std::uint8_t> message) {
  if (key_bits.size() < kTagKeyBits) {
    throw Error(ErrorCode::key_exhausted, "authentication needs at least 256 shared key bits");
  }
  const auto key = pack_bits(key_bits.first(kTagKeyBits));
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  Tag tag{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), key.data(), key.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), message.data(), message.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), key.data(), key.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), tag.data(), &len) != 1 || len != tag.size()) {
    throw Error(ErrorCode::io, "SHA-256 computation failed");
  }
  return tag;
}

/// Tags `message` with a one-time key and marks the key spent.
inline Tag authenticate_tag(OneTimeKey& key, std::span<const std::uint8_t> message) {
  if (key.status == KeyStatus::consumed) throw Error(ErrorCode::one_time_violation, "authentication key already used");
  Tag tag = keyed_tag(key.bits, message);
  key.consume();
  return tag;
}

}  // namespace noisepad
