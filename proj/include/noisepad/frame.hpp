#pragma once

// Wire frame: "NOTP" | version 0x01 | msg_type | payload_length (u32 BE) | payload.

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"

namespace noisepad::transport {

inline constexpr std::array<std::uint8_t, 4> kMagic = {0x4E, 0x4F, 0x54, 0x50};
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 10;
inline constexpr std::uint32_t kMaxPayload = std::uint32_t{1} << 24;

enum class MessageType : std::uint8_t {
  hello = 0x01,
  hello_ack = 0x02,
  keyblock = 0x03,
  parity_req = 0x04,
  parity_resp = 0x05,
  pa_seed = 0x06,
  confirm = 0x07,
  error = 0x7F,
};

inline bool is_known_message(std::uint8_t code) {
  return (code >= 0x01 && code <= 0x07) || code == 0x7F;
}

inline std::string to_string(MessageType t) {
  switch (t) {
    case MessageType::hello: return "HELLO";
    case MessageType::hello_ack: return "HELLO_ACK";
    case MessageType::keyblock: return "KEYBLOCK";
    case MessageType::parity_req: return "PARITY_REQ";
    case MessageType::parity_resp: return "PARITY_RESP";
    case MessageType::pa_seed: return "PA_SEED";
    case MessageType::confirm: return "CONFIRM";
    case MessageType::error: return "ERROR";
  }
  return "UNKNOWN";
}

struct Frame {
  MessageType type = MessageType::error;
  std::vector<std::uint8_t> payload;
  friend bool operator==(const Frame&, const Frame&) = default;
};

inline std::vector<std::uint8_t> frame_encode(MessageType type, std::span<const std::uint8_t> payload) {
  if (payload.size() > kMaxPayload) {
    throw Error(ErrorCode::oversize, "payload of " + std::to_string(payload.size()) + " bytes exceeds 16 MiB");
  }
  std::vector<std::uint8_t> out(kHeaderSize + payload.size());
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  out[4] = kVersion;
  out[5] = static_cast<std::uint8_t>(type);
  const auto len = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) out[6 + i] = static_cast<std::uint8_t>(len >> (24 - 8 * i));
  std::copy(payload.begin(), payload.end(), out.begin() + kHeaderSize);
  return out;
}

inline std::vector<std::uint8_t> frame_encode(const Frame& f) { return frame_encode(f.type, f.payload); }

struct FrameHeader {
  MessageType type;
  std::uint32_t payload_length;
};

/// Validates the fixed 10-byte header.
inline FrameHeader parse_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderSize) throw Error(ErrorCode::truncated, "frame header incomplete");
  for (std::size_t i = 0; i < kMagic.size(); ++i) {
    if (bytes[i] != kMagic[i]) throw Error(ErrorCode::bad_magic, "frame does not start with NOTP");
  }
  if (bytes[4] != kVersion) {
    throw Error(ErrorCode::bad_version, "unsupported protocol version " + std::to_string(bytes[4]));
  }
  const std::uint32_t len = (std::uint32_t{bytes[6]} << 24) | (std::uint32_t{bytes[7]} << 16) |
                            (std::uint32_t{bytes[8]} << 8) | std::uint32_t{bytes[9]};
  if (len > kMaxPayload) throw Error(ErrorCode::oversize, "declared payload exceeds 16 MiB");
  if (!is_known_message(bytes[5])) {
    throw Error(ErrorCode::unknown_message, "unknown message type " + std::to_string(bytes[5]));
  }
  return {static_cast<MessageType>(bytes[5]), len};
}

struct DecodedFrame {
  Frame frame;
  std::size_t consumed = 0;
};

/// Decodes the first frame in `bytes`; trailing data is left for the caller.
inline DecodedFrame frame_decode_prefix(std::span<const std::uint8_t> bytes) {
  const auto h = parse_header(bytes);
  if (bytes.size() - kHeaderSize < h.payload_length) {
    throw Error(ErrorCode::truncated, "declared " + std::to_string(h.payload_length) + " payload bytes, have " +
                                          std::to_string(bytes.size() - kHeaderSize));
  }
  DecodedFrame d;
  d.frame.type = h.type;
  d.frame.payload.assign(bytes.begin() + kHeaderSize, bytes.begin() + kHeaderSize + h.payload_length);
  d.consumed = kHeaderSize + h.payload_length;
  return d;
}

inline Frame frame_decode(std::span<const std::uint8_t> bytes) {
  auto d = frame_decode_prefix(bytes);
  if (d.consumed != bytes.size()) throw Error(ErrorCode::protocol, "trailing bytes after frame");
  return std::move(d.frame);
}

}  // namespace noisepad::transport
