#pragma once

// Payload layouts for each message type. Integers are big-endian; packed
// symbols inside KEYBLOCK keep the little-endian layout of the encode module.

#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "channel.hpp"
#include "encode.hpp"
#include "protocol.hpp"
#include "reconcile.hpp"

namespace noisepad::transport {

class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v) {
    bytes_.push_back(v);
    return *this;
  }
  ByteWriter& u16(std::uint16_t v) { return be(v, 2); }
  ByteWriter& u32(std::uint32_t v) { return be(v, 4); }
  ByteWriter& u64(std::uint64_t v) { return be(v, 8); }
  ByteWriter& f64(double v) { return u64(std::bit_cast<std::uint64_t>(v)); }
  ByteWriter& raw(std::span<const std::uint8_t> data) {
    bytes_.insert(bytes_.end(), data.begin(), data.end());
    return *this;
  }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  ByteWriter& be(std::uint64_t v, int width) {
    for (int i = width - 1; i >= 0; --i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    return *this;
  }
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> data) : data_(data) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(be(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(be(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(be(4)); }
  std::uint64_t u64() { return be(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  std::span<const std::uint8_t> rest() {
    auto r = data_.subspan(pos_);
    pos_ = data_.size();
    return r;
  }
  std::size_t remaining() const noexcept { return data_.size() - pos_; }
  void expect_end() const {
    if (pos_ != data_.size()) throw Error(ErrorCode::protocol, "unexpected trailing payload bytes");
  }

 private:
  std::uint64_t be(std::size_t width) {
    if (remaining() < width) throw Error(ErrorCode::truncated, "payload shorter than its layout");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < width; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += width;
    return v;
  }
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

/// Base-2 exponent of a power-of-two delta_phi.
inline std::int8_t delta_phi_exponent(double delta_phi) {
  int e = 0;
  const double mant = std::frexp(delta_phi, &e);
  if (mant != 0.5 || e - 1 < -128 || e - 1 > 127) {
    throw Error(ErrorCode::validation, "delta_phi must be a power of two on the wire");
  }
  return static_cast<std::int8_t>(e - 1);
}

// HELLO: n_avg f64 | delta_phi exponent i8 | resolution u8 | block_length u32 | safety u16
inline std::vector<std::uint8_t> encode_hello(const SessionParams& p) {
  if (p.block_length > 0xFFFFFFFFu || p.safety_bits > 0xFFFFu) {
    throw Error(ErrorCode::validation, "session parameters do not fit the HELLO layout");
  }
  return ByteWriter{}
      .f64(p.avg_photon_number)
      .u8(static_cast<std::uint8_t>(delta_phi_exponent(p.delta_phi)))
      .u8(static_cast<std::uint8_t>(p.resolution_bits))
      .u32(static_cast<std::uint32_t>(p.block_length))
      .u16(static_cast<std::uint16_t>(p.safety_bits))
      .take();
}

/// Physical parameters from HELLO; reconciliation settings stay local and
/// are taken from `local`.
inline SessionParams decode_hello(std::span<const std::uint8_t> payload, const SessionParams& local = {}) {
  ByteReader r(payload);
  SessionParams p = local;
  p.avg_photon_number = r.f64();
  p.delta_phi = std::ldexp(1.0, static_cast<std::int8_t>(r.u8()));
  p.resolution_bits = r.u8();
  p.block_length = r.u32();
  p.safety_bits = r.u16();
  r.expect_end();
  p.reconciliation_block = std::min(local.reconciliation_block, p.block_length);
  return p;
}

inline std::vector<std::uint8_t> encode_error(ErrorCode code, const std::string& report) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(code));
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>(report.data()), report.size()));
  return w.take();
}

/// An error the remote party reported in an ERROR frame.
class PeerError : public Error {
 public:
  using Error::Error;
};

[[noreturn]] inline void raise_peer_error(const Frame& f) {
  ByteReader r(f.payload);
  auto code = r.remaining() ? static_cast<ErrorCode>(r.u8()) : ErrorCode::protocol;
  auto rest = r.rest();
  throw PeerError(code, "peer reported: " + std::string(rest.begin(), rest.end()));
}

inline void send_error(Channel& channel, const Error& e) {
  try {
    channel.send({MessageType::error, encode_error(e.code(), e.detail())});
  } catch (const Error&) {
    // peer already gone
  }
}

/// Receives the next frame, requiring `expected`; ERROR frames are rethrown
/// with the peer's code.
inline Frame expect_frame(Channel& channel, MessageType expected) {
  Frame f = channel.receive();
  if (f.type == expected) return f;
  if (f.type == MessageType::error) raise_peer_error(f);
  throw Error(ErrorCode::protocol, "expected " + to_string(expected) + ", got " + to_string(f.type));
}

// KEYBLOCK: cycle_index u32 | packed symbols
inline std::vector<std::uint8_t> encode_keyblock(const BlockTranscript& t, int resolution_bits) {
  ByteWriter w;
  w.u32(t.cycle_index);
  w.raw(encode::pack_symbols(t.symbols, resolution_bits));
  return w.take();
}

inline BlockTranscript decode_keyblock(std::span<const std::uint8_t> payload, int resolution_bits,
                                       Direction direction) {
  ByteReader r(payload);
  BlockTranscript t;
  t.direction = direction;
  t.cycle_index = r.u32();
  t.symbols = encode::unpack_symbols(r.rest(), resolution_bits);
  return t;
}

inline void send_keyblock(Channel& channel, const BlockTranscript& t, int resolution_bits) {
  channel.send({MessageType::keyblock, encode_keyblock(t, resolution_bits)});
}

inline BlockTranscript recv_keyblock(Channel& channel, int resolution_bits, Direction direction,
                                     std::size_t expected_symbols) {
  const Frame f = expect_frame(channel, MessageType::keyblock);
  auto t = decode_keyblock(f.payload, resolution_bits, direction);
  if (t.symbols.size() != expected_symbols) {
    throw Error(ErrorCode::protocol, "KEYBLOCK carries " + std::to_string(t.symbols.size()) + " symbols, expected " +
                                         std::to_string(expected_symbols));
  }
  return t;
}

// PARITY_REQ: pass u8 | permutation seed u64 | count u32 | (start u32, length u32) * count
inline std::vector<std::uint8_t> encode_parity_request(const ParityQuery& q) {
  ByteWriter w;
  w.u8(q.pass).u64(q.permutation_seed).u32(static_cast<std::uint32_t>(q.ranges.size()));
  for (const auto& r : q.ranges) w.u32(r.start).u32(r.length);
  return w.take();
}

inline ParityQuery decode_parity_request(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  ParityQuery q;
  q.pass = r.u8();
  q.permutation_seed = r.u64();
  const auto count = r.u32();
  if (r.remaining() != std::size_t{count} * 8) throw Error(ErrorCode::protocol, "PARITY_REQ length mismatch");
  q.ranges.resize(count);
  for (auto& range : q.ranges) {
    range.start = r.u32();
    range.length = r.u32();
  }
  return q;
}

// PARITY_RESP: count u32 | packed parity bits
inline std::vector<std::uint8_t> encode_parity_response(const Bits& parities) {
  ByteWriter w;
  w.u32(static_cast<std::uint32_t>(parities.size()));
  w.raw(pack_bits(parities));
  return w.take();
}

inline Bits decode_parity_response(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  const auto count = r.u32();
  auto rest = r.rest();
  if (rest.size() != (std::size_t{count} + 7) / 8) throw Error(ErrorCode::protocol, "PARITY_RESP length mismatch");
  return unpack_bits(rest, count);
}

struct PublicAmplification {
  std::uint64_t seed = 0;
  std::uint32_t output_bits = 0;
  friend bool operator==(const PublicAmplification&, const PublicAmplification&) = default;
};

// PA_SEED: seed u64 | output length u32
inline std::vector<std::uint8_t> encode_pa_seed(const PublicAmplification& pa) {
  return ByteWriter{}.u64(pa.seed).u32(pa.output_bits).take();
}

inline PublicAmplification decode_pa_seed(std::span<const std::uint8_t> payload) {
  ByteReader r(payload);
  PublicAmplification pa;
  pa.seed = r.u64();
  pa.output_bits = r.u32();
  r.expect_end();
  return pa;
}

/// Parity queries answered by the remote sender over the channel.
class WireParityPeer : public ParityPeer {
 public:
  explicit WireParityPeer(Channel& channel) : channel_(channel) {}

  Bits parities(const ParityQuery& query) override {
    channel_.send({MessageType::parity_req, encode_parity_request(query)});
    return decode_parity_response(expect_frame(channel_, MessageType::parity_resp).payload);
  }

 private:
  Channel& channel_;
};

/// Initiator side: announce parameters, wait for acceptance.
inline void handshake_initiate(Channel& channel, const SessionParams& params) {
  channel.send({MessageType::hello, encode_hello(params)});
  const Frame f = expect_frame(channel, MessageType::hello_ack);
  if (!f.payload.empty()) throw Error(ErrorCode::protocol, "HELLO_ACK carries a payload");
}

/// Responder side: validate the announced parameters, reply HELLO_ACK or an
/// ERROR frame carrying the violation report.
inline SessionParams handshake_respond(Channel& channel, const SessionParams& local_policy = {}) {
  try {
    const Frame f = expect_frame(channel, MessageType::hello);
    SessionParams p = decode_hello(f.payload, local_policy);
    p.validate();
    channel.send({MessageType::hello_ack, {}});
    return p;
  } catch (const Error& e) {
    send_error(channel, e);
    throw;
  }
}

inline SessionParams handshake(Channel& channel, const SessionParams& params, Role role) {
  if (role == Role::initiator) {
    handshake_initiate(channel, params);
    return params;
  }
  return handshake_respond(channel, params);
}

struct RecordedBlock {
  BlockTranscript transcript;
  std::optional<PublicAmplification> amplification;
};

/// Parses a tap file: KEYBLOCK frames (each optionally followed by the
/// PA_SEED that fixed its privacy amplification). Within a cycle the first
/// block is A->B and the second B->A.
inline std::vector<RecordedBlock> read_transcript(std::istream& in, int resolution_bits) {
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<RecordedBlock> blocks;
  std::span<const std::uint8_t> rest(bytes);
  while (!rest.empty()) {
    auto d = frame_decode_prefix(rest);
    rest = rest.subspan(d.consumed);
    if (d.frame.type == MessageType::keyblock) {
      ByteReader peek(d.frame.payload);
      const auto cycle = peek.u32();
      Direction dir = Direction::a_to_b;
      if (!blocks.empty() && blocks.back().transcript.cycle_index == cycle &&
          blocks.back().transcript.direction == Direction::a_to_b) {
        dir = Direction::b_to_a;
      }
      blocks.push_back({decode_keyblock(d.frame.payload, resolution_bits, dir), std::nullopt});
    } else if (d.frame.type == MessageType::pa_seed) {
      if (blocks.empty() || blocks.back().amplification) {
        throw Error(ErrorCode::protocol, "PA_SEED without a preceding KEYBLOCK in transcript");
      }
      blocks.back().amplification = decode_pa_seed(d.frame.payload);
    }
  }
  return blocks;
}

}  // namespace noisepad::transport
