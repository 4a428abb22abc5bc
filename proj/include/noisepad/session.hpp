#pragma once

// Distribution cycles over a channel. In each block the sender encodes fresh
// bits under the latest shared key and sends KEYBLOCK; the receiver decodes,
// drives reconciliation with PARITY_REQ/PARITY_RESP, and closes the block
// with PA_SEED (public hash seed and output length). Both sides then append
// the amplified key to their chains. A cycle is one block A->B followed by
// one block B->A keyed with the key the first block delivered.

#include <exception>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "amplify.hpp"
#include "auth.hpp"
#include "protocol.hpp"
#include "reconcile.hpp"
#include "wire.hpp"

namespace noisepad {

struct CycleProgress {
  std::uint32_t cycle_index = 0;
  std::size_t delivered_a_to_b = 0;
  std::size_t delivered_b_to_a = 0;
  std::size_t total_delivered = 0;
  LeakLedger ledger;
};

struct SessionOptions {
  std::uint32_t cycles = 1;
  /// Finish with a CONFIRM exchange of keyed tags over the final key.
  bool confirm = true;
  std::function<void(const CycleProgress&)> on_cycle;
};

struct SessionSummary {
  Role role = Role::initiator;
  std::uint32_t cycles_completed = 0;
  std::vector<std::size_t> delivered_per_cycle;
  std::size_t k0_bits = 0;
  std::size_t total_delivered = 0;
  LeakLedger ledger;
  std::optional<Tag> confirm_tag;
  std::optional<bool> confirm_match;
  /// Empty when every requested cycle ran.
  std::string stop_reason;

  double boost() const { return k0_bits ? static_cast<double>(total_delivered) / static_cast<double>(k0_bits) : 0.0; }
};

namespace session_detail {

[[noreturn]] inline void report_and_rethrow(transport::Channel& channel) {
  try {
    throw;
  } catch (const transport::PeerError&) {
    throw;
  } catch (const Error& e) {
    transport::send_error(channel, e);
    throw;
  }
}

inline std::vector<std::uint8_t> confirm_message(std::uint32_t cycles, std::size_t delivered) {
  transport::ByteWriter w;
  const std::string label = "noisepad-confirm";
  w.raw(std::span(reinterpret_cast<const std::uint8_t*>(label.data()), label.size()));
  w.u32(cycles).u64(delivered);
  return w.take();
}

}  // namespace session_detail

/// Sender half of a block. Returns the key the block delivered.
inline const Bits& send_key_block(Party& party, transport::Channel& channel, std::uint32_t cycle, Direction dir) {
  try {
    const auto& params = party.params();
    OneTimeKey& basis = party.chain().basis_key();
    const Bits fresh = party.fresh_bits(basis.bits.size());
    const auto t = send_block(fresh, basis, params, party.noise(), cycle, dir);
    transport::send_keyblock(channel, t, params.resolution_bits);
    party.ledger().add_symbols(t.symbols.size(), params.leak_per_symbol());

    ParityResponder responder(fresh);
    for (;;) {
      const transport::Frame f = channel.receive();
      if (f.type == transport::MessageType::parity_req) {
        const Bits answer = responder.parities(transport::decode_parity_request(f.payload));
        party.ledger().add_parities(answer.size());
        channel.send({transport::MessageType::parity_resp, transport::encode_parity_response(answer)});
        continue;
      }
      if (f.type == transport::MessageType::pa_seed) {
        const auto pa = transport::decode_pa_seed(f.payload);
        const auto m = amplified_length(fresh.size(), party.ledger(), params.safety_bits);
        if (m != static_cast<std::int64_t>(pa.output_bits)) {
          throw Error(ErrorCode::protocol, "peer amplifies to " + std::to_string(pa.output_bits) + " bits, expected " +
                                               std::to_string(m));
        }
        party.chain().append(privacy_amplify(fresh, party.ledger(), params.safety_bits, pa.seed));
        return party.chain().latest().bits;
      }
      if (f.type == transport::MessageType::error) transport::raise_peer_error(f);
      throw Error(ErrorCode::protocol, "unexpected " + transport::to_string(f.type) + " during reconciliation");
    }
  } catch (...) {
    session_detail::report_and_rethrow(channel);
  }
}

/// Receiver half of a block whose KEYBLOCK frame has already arrived.
inline const Bits& receive_key_block(Party& party, transport::Channel& channel, const transport::Frame& keyblock,
                                     std::uint32_t cycle, Direction dir) {
  try {
    const auto& params = party.params();
    OneTimeKey& basis = party.chain().basis_key();
    const auto t = transport::decode_keyblock(keyblock.payload, params.resolution_bits, dir);
    if (t.cycle_index != cycle) throw Error(ErrorCode::protocol, "KEYBLOCK for an unexpected cycle");
    if (t.symbols.size() != basis.bits.size()) {
      throw Error(ErrorCode::protocol, "KEYBLOCK length does not match the current key");
    }
    Bits raw = recover_block(t, basis.bits, params);
    basis.consume();
    party.ledger().add_symbols(t.symbols.size(), params.leak_per_symbol());

    if (params.reconcile == ReconcileMode::parity_bisection) {
      transport::WireParityPeer peer(channel);
      raw = reconcile(raw, peer, params.reconciliation_block, party.public_value(), party.ledger()).bits;
    }
    const auto m = amplified_length(raw.size(), party.ledger(), params.safety_bits);
    if (m <= 0) throw Error(ErrorCode::key_exhausted, "leak estimate consumes the whole block");
    const transport::PublicAmplification pa{party.public_value(), static_cast<std::uint32_t>(m)};
    channel.send({transport::MessageType::pa_seed, transport::encode_pa_seed(pa)});
    party.chain().append(privacy_amplify(raw, party.ledger(), params.safety_bits, pa.seed));
    return party.chain().latest().bits;
  } catch (...) {
    session_detail::report_and_rethrow(channel);
  }
}

inline const Bits& receive_key_block(Party& party, transport::Channel& channel, std::uint32_t cycle, Direction dir) {
  transport::Frame f;
  try {
    f = transport::expect_frame(channel, transport::MessageType::keyblock);
  } catch (...) {
    session_detail::report_and_rethrow(channel);
  }
  return receive_key_block(party, channel, f, cycle, dir);
}

/// Whether one more cycle fits the key budget, assuming no decoding errors,
/// and leaves at least `min_final_bits` in the final key.
inline bool cycle_fits(const Party& party, std::size_t min_final_bits) {
  const auto& params = party.params();
  const auto& key = party.chain().latest();
  if (key.status != KeyStatus::available) return false;
  LeakLedger ledger = party.ledger();
  std::size_t len = key.bits.size();
  for (int block = 0; block < 2; ++block) {
    ledger.add_symbols(len, params.leak_per_symbol());
    if (params.reconcile == ReconcileMode::parity_bisection) {
      ledger.add_parities(2 * ((len + params.reconciliation_block - 1) / params.reconciliation_block));
    }
    const auto m = amplified_length(len, ledger, params.safety_bits);
    if (m <= 0) return false;
    ledger.discarded_bits += ledger.outstanding_bits();
    len = static_cast<std::size_t>(m);
  }
  return len >= std::max<std::size_t>(min_final_bits, 1);
}

namespace session_detail {

inline void finish_cycle(Party& party, SessionSummary& s, std::uint32_t cycle, const SessionOptions& options) {
  const auto& chain = party.chain();
  CycleProgress p;
  p.cycle_index = cycle;
  p.delivered_a_to_b = chain[chain.size() - 2].bits.size();
  p.delivered_b_to_a = chain[chain.size() - 1].bits.size();
  p.total_delivered = chain.delivered_bits();
  p.ledger = party.ledger();
  s.delivered_per_cycle.push_back(p.delivered_a_to_b + p.delivered_b_to_a);
  s.cycles_completed = cycle + 1;
  if (options.on_cycle) options.on_cycle(p);
}

inline void finalize(Party& party, SessionSummary& s) {
  s.total_delivered = party.chain().delivered_bits();
  s.ledger = party.ledger();
}

inline std::optional<Tag> try_tag(Party& party, const SessionSummary& s) {
  auto& key = party.chain().latest();
  if (party.chain().size() < 2 || key.status != KeyStatus::available || key.bits.size() < kTagKeyBits) {
    return std::nullopt;
  }
  return authenticate_tag(key, confirm_message(s.cycles_completed, party.chain().delivered_bits()));
}

}  // namespace session_detail

/// Drives a session as party A: HELLO, up to options.cycles cycles, CONFIRM.
inline SessionSummary run_initiator(Party& party, transport::Channel& channel, const SessionOptions& options) {
  SessionSummary s;
  s.role = Role::initiator;
  s.k0_bits = party.chain()[0].bits.size();
  transport::handshake_initiate(channel, party.params());

  const std::size_t reserve = options.confirm ? kTagKeyBits : 1;
  bool exhausted = false;
  for (std::uint32_t cycle = 0; cycle < options.cycles; ++cycle) {
    if (!cycle_fits(party, reserve)) {
      s.stop_reason = "key budget reached before cycle " + std::to_string(cycle);
      break;
    }
    try {
      send_key_block(party, channel, cycle, Direction::a_to_b);
      receive_key_block(party, channel, cycle, Direction::b_to_a);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::key_exhausted) throw;
      s.stop_reason = e.what();
      exhausted = true;
      break;
    }
    session_detail::finish_cycle(party, s, cycle, options);
  }
  session_detail::finalize(party, s);
  if (exhausted) return s;

  std::optional<Tag> mine;
  if (options.confirm) mine = session_detail::try_tag(party, s);
  std::vector<std::uint8_t> payload;
  if (mine) payload.assign(mine->begin(), mine->end());
  channel.send({transport::MessageType::confirm, payload});
  const auto reply = transport::expect_frame(channel, transport::MessageType::confirm);
  if (mine) {
    s.confirm_tag = mine;
    s.confirm_match = reply.payload.size() == mine->size() && std::equal(mine->begin(), mine->end(), reply.payload.begin());
  }
  return s;
}

struct ResponderOutcome {
  SessionSummary summary;
  std::optional<Party> party;
};

/// Serves a session as party B. `seed_key_for` supplies K0 once HELLO has
/// fixed its length; `local_policy` carries the reconciliation settings that
/// HELLO does not.
inline ResponderOutcome run_responder(transport::Channel& channel, const std::function<Bits(std::size_t)>& seed_key_for,
                                      std::uint64_t seed, const SessionParams& local_policy = {},
                                      const SessionOptions& options = {}) {
  ResponderOutcome out;
  SessionSummary& s = out.summary;
  s.role = Role::responder;
  const SessionParams params = transport::handshake_respond(channel, local_policy);
  out.party.emplace(Role::responder, params, seed_key_for(params.block_length), seed);
  Party& party = *out.party;
  s.k0_bits = params.block_length;

  for (std::uint32_t cycle = 0;; ++cycle) {
    transport::Frame f;
    try {
      f = channel.receive();
    } catch (...) {
      session_detail::report_and_rethrow(channel);
    }
    if (f.type == transport::MessageType::keyblock) {
      try {
        receive_key_block(party, channel, f, cycle, Direction::a_to_b);
        send_key_block(party, channel, cycle, Direction::b_to_a);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::key_exhausted) throw;
        s.stop_reason = e.what();
        session_detail::finalize(party, s);
        return out;
      }
      session_detail::finish_cycle(party, s, cycle, options);
      continue;
    }
    if (f.type == transport::MessageType::confirm) {
      session_detail::finalize(party, s);
      std::optional<Tag> mine;
      if (!f.payload.empty()) mine = session_detail::try_tag(party, s);
      std::vector<std::uint8_t> payload;
      if (mine) payload.assign(mine->begin(), mine->end());
      channel.send({transport::MessageType::confirm, payload});
      if (!f.payload.empty()) {
        s.confirm_tag = mine;
        s.confirm_match = mine && f.payload.size() == mine->size() &&
                          std::equal(mine->begin(), mine->end(), f.payload.begin());
      }
      return out;
    }
    if (f.type == transport::MessageType::error) transport::raise_peer_error(f);
    Error e(ErrorCode::protocol, "unexpected " + transport::to_string(f.type) + " between cycles");
    transport::send_error(channel, e);
    throw e;
  }
}

namespace session_detail {

/// Prefer the error that started a failure over the channel error it caused
/// on the other side.
inline void rethrow_primary(std::exception_ptr a, std::exception_ptr b) {
  auto is_secondary = [](std::exception_ptr p) {
    try {
      std::rethrow_exception(p);
    } catch (const transport::PeerError&) {
      return true;
    } catch (const Error& e) {
      return e.code() == ErrorCode::channel;
    } catch (...) {
      return false;
    }
  };
  if (a && b) std::rethrow_exception(is_secondary(a) && !is_secondary(b) ? b : a);
  if (a) std::rethrow_exception(a);
  if (b) std::rethrow_exception(b);
}

}  // namespace session_detail

/// One cycle between two in-process parties over a loopback channel.
/// Returns (K delivered A->B, K delivered B->A).
inline std::pair<Bits, Bits> run_cycle(Party& a, Party& b) {
  if (a.chain().size() != b.chain().size()) throw Error(ErrorCode::protocol, "parties are at different cycles");
  const auto cycle = static_cast<std::uint32_t>((a.chain().size() - 1) / 2);
  auto [ca, cb] = transport::make_loopback_pair();
  std::exception_ptr err_b;
  std::thread responder([&, ch = cb.get()] {
    try {
      receive_key_block(b, *ch, cycle, Direction::a_to_b);
      send_key_block(b, *ch, cycle, Direction::b_to_a);
    } catch (...) {
      err_b = std::current_exception();
      ch->close();
    }
  });
  std::exception_ptr err_a;
  try {
    send_key_block(a, *ca, cycle, Direction::a_to_b);
    receive_key_block(a, *ca, cycle, Direction::b_to_a);
  } catch (...) {
    err_a = std::current_exception();
    ca->close();
  }
  responder.join();
  session_detail::rethrow_primary(err_a, err_b);
  const auto& chain = a.chain();
  return {chain[chain.size() - 2].bits, chain[chain.size() - 1].bits};
}

struct SimulationConfig {
  SessionParams params;
  Bits seed_key;
  std::uint64_t seed = 0;
  SessionOptions options;
  /// Eve's tap on A's side of the wire, if any.
  std::ostream* transcript = nullptr;
};

struct SimulationResult {
  SessionSummary initiator;
  SessionSummary responder;
  KeyChain chain_a;
  KeyChain chain_b;
  bool agreement = false;
  bool tap_failed = false;
};

/// Full session between A and B in one process, over the loopback channel
/// and the same code path as a networked session.
inline SimulationResult simulate_session(const SimulationConfig& config) {
  Party alice(Role::initiator, config.params, config.seed_key, config.seed);
  auto [ca, cb] = transport::make_loopback_pair();
  std::optional<transport::TapChannel> tap;
  transport::Channel* a_side = ca.get();
  if (config.transcript) {
    tap.emplace(*ca, *config.transcript);
    a_side = &*tap;
  }

  SimulationResult result;
  std::optional<ResponderOutcome> bob;
  std::exception_ptr err_b;
  std::thread responder([&, ch = cb.get()] {
    try {
      SessionParams policy = config.params;
      bob = run_responder(*ch, [&](std::size_t) { return config.seed_key; }, config.seed, policy, {});
    } catch (...) {
      err_b = std::current_exception();
      ch->close();
    }
  });
  std::exception_ptr err_a;
  try {
    result.initiator = run_initiator(alice, *a_side, config.options);
  } catch (...) {
    err_a = std::current_exception();
    ca->close();
  }
  responder.join();
  session_detail::rethrow_primary(err_a, err_b);

  result.responder = bob->summary;
  result.chain_a = alice.chain();
  result.chain_b = bob->party->chain();
  result.agreement = result.chain_a == result.chain_b;
  result.tap_failed = tap && tap->failed();
  return result;
}

}  // namespace noisepad
