#pragma once

// Passive eavesdropper: everything here works on what crosses the open
// channel (plus, for the known-plaintext and chain attacks, whatever key or
// plaintext the attack scenario hands her).

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "amplify.hpp"
#include "analysis.hpp"
#include "bits.hpp"
#include "encode.hpp"
#include "phys.hpp"
#include "protocol.hpp"
#include "random.hpp"
#include "wire.hpp"

namespace noisepad::attacker {

/// Both emissions of one key bit: once as basis material for a later block,
/// once as a message bit in the block that delivered it.
struct KeyBitObservation {
  encode::QuantizedPhase as_basis;
  encode::QuantizedPhase as_message;
};

/// Guess from a single emission: offset nearer delta_phi than 0 means basis 1.
inline std::uint8_t guess_basis(encode::QuantizedPhase q, const encode::Constellation& c) {
  return encode::offset_within_set(q, c) > c.delta_phi() / 2.0 ? 1 : 0;
}

/// Maximum-likelihood guess of each key bit from both of its emissions.
///
/// As basis material the bit shows up directly as the offset (0 or
/// delta_phi). As a message bit it fixes the set together with the unknown
/// earlier basis b: offset ~ b*delta_phi and set = bit ^ b, so for set2 the
/// offset is reflected (delta_phi - offset) to line up with the bit. The two
/// offsets have equal Gaussian spread, so the ML rule thresholds their mean
/// at delta_phi/2.
inline Bits eve_ml_basis_guess(std::span<const KeyBitObservation> observations, const encode::Constellation& c) {
  Bits out(observations.size());
  const double dphi = c.delta_phi();
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& o = observations[i];
    const double direct = encode::offset_within_set(o.as_basis, c);
    double folded = encode::offset_within_set(o.as_message, c);
    if (encode::classify_set(o.as_message, c) == encode::SymbolSet::set2) folded = dphi - folded;
    out[i] = (direct + folded) / 2.0 > dphi / 2.0 ? 1 : 0;
  }
  return out;
}

/// Error rate of this phase-measuring eavesdropper: the mean of two offsets
/// has spread sigma_phi/sqrt(2) = 1/sqrt(<n>) and the threshold sits
/// delta_phi/2 away, giving Q(delta_phi sqrt(<n>) / 2).
inline double phase_ml_error(const phys::CoherentStateParams& params, double delta_phi) {
  return phys::gaussian_tail(delta_phi * std::sqrt(params.avg_photon_number) / 2.0);
}

/// Eve reads each symbol's set (always right) and flips a coin for the
/// basis; returns her bit error rate against the true bits.
inline double eve_bit_guess_rate(const BlockTranscript& t, std::span<const std::uint8_t> true_bits,
                                 const encode::Constellation& c, std::uint64_t seed) {
  if (t.symbols.empty() || true_bits.size() != t.symbols.size()) {
    throw Error(ErrorCode::domain, "transcript and reference bits must be non-empty and equally long");
  }
  const Bits coin = SeededStream(seed).bits(t.symbols.size());
  std::size_t errors = 0;
  for (std::size_t j = 0; j < t.symbols.size(); ++j) {
    const auto set = static_cast<std::uint8_t>(encode::classify_set(t.symbols[j], c));
    errors += ((set ^ coin[j]) != true_bits[j]);
  }
  return static_cast<double>(errors) / static_cast<double>(t.symbols.size());
}

/// Same as eve_bit_guess_rate but with the basis handed to her; reduces to
/// the legitimate receiver.
inline double eve_bit_guess_rate_with_basis(const BlockTranscript& t, std::span<const std::uint8_t> true_bits,
                                            std::span<const std::uint8_t> basis, const encode::Constellation& c) {
  if (t.symbols.empty() || true_bits.size() != t.symbols.size() || basis.size() != t.symbols.size()) {
    throw Error(ErrorCode::domain, "transcript, basis and reference bits must be non-empty and equally long");
  }
  std::size_t errors = 0;
  for (std::size_t j = 0; j < t.symbols.size(); ++j) {
    errors += (encode::decode_with_basis(t.symbols[j], basis[j], c) != true_bits[j]);
  }
  return static_cast<double>(errors) / static_cast<double>(t.symbols.size());
}

/// Y xor X: with a known plaintext X, a noiselessly encrypted Y gives the key.
inline Bits known_plaintext_attack(std::span<const std::uint8_t> ciphertext, std::span<const std::uint8_t> plaintext) {
  if (ciphertext.size() != plaintext.size()) {
    throw Error(ErrorCode::validation, "ciphertext and plaintext lengths differ");
  }
  return xor_bits(ciphertext, plaintext);
}

struct RecoveredKey {
  std::size_t index = 0;
  Bits raw;  ///< decoded block before amplification
  Bits key;  ///< K_index as the legitimate parties hold it
};

struct ChainRecovery {
  std::vector<RecoveredKey> keys;
  /// Key indices Eve could not reach because a block was missing or did not
  /// fit the key she held.
  std::vector<std::size_t> gaps;
};

/// Decodes block j+1 with K_j exactly as the receiver would, applies the
/// public amplification seen on the wire, and walks the chain forward.
inline ChainRecovery chain_compromise(std::span<const transport::RecordedBlock> blocks, std::size_t known_index,
                                      std::span<const std::uint8_t> known_key, const encode::Constellation& c) {
  ChainRecovery out;
  Bits key(known_key.begin(), known_key.end());
  std::size_t last_available = 0;
  for (const auto& b : blocks) last_available = std::max(last_available, b.transcript.key_index());

  for (std::size_t next = known_index + 1; next <= last_available; ++next) {
    const transport::RecordedBlock* block = nullptr;
    for (const auto& b : blocks) {
      if (b.transcript.key_index() == next) block = &b;
    }
    if (!block || block->transcript.symbols.size() != key.size()) {
      for (std::size_t k = next; k <= last_available; ++k) out.gaps.push_back(k);
      break;
    }
    RecoveredKey r;
    r.index = next;
    r.raw.resize(key.size());
    for (std::size_t j = 0; j < key.size(); ++j) {
      r.raw[j] = encode::decode_with_basis(block->transcript.symbols[j], key[j], c);
    }
    r.key = block->amplification ? toeplitz_hash(r.raw, block->amplification->output_bits, block->amplification->seed)
                                 : r.raw;
    key = r.key;
    out.keys.push_back(std::move(r));
  }
  return out;
}

struct AttackReport {
  std::size_t symbols_observed = 0;
  std::optional<double> basis_guess_error_rate;
  std::optional<double> bit_guess_error_rate;
  std::optional<double> helstrom_floor;
  std::optional<double> phase_ml_prediction;
  std::vector<std::pair<std::size_t, Bits>> recovered_keys;
  std::vector<std::size_t> gaps;
  std::optional<bool> recovered;
};

inline nlohmann::ordered_json to_json(const AttackReport& r) {
  nlohmann::ordered_json j;
  j["symbols_observed"] = r.symbols_observed;
  auto opt = [&](const char* name, const auto& v) {
    if (v) j[name] = *v;
  };
  opt("basis_guess_error_rate", r.basis_guess_error_rate);
  opt("bit_guess_error_rate", r.bit_guess_error_rate);
  opt("helstrom_floor", r.helstrom_floor);
  opt("phase_ml_prediction", r.phase_ml_prediction);
  opt("recovered", r.recovered);
  auto keys = nlohmann::ordered_json::array();
  for (const auto& [index, bits] : r.recovered_keys) {
    keys.push_back({{"index", index}, {"bits", bits.size()}, {"hex", bits_to_hex(bits)}});
  }
  j["recovered_keys"] = keys;
  j["gaps"] = r.gaps;
  return j;
}

struct BasisAttackConfig {
  double avg_photon_number = 1e4;
  double delta_phi = 0x1p-6;
  int resolution_bits = 32;
  std::size_t key_bits = 100000;
  std::uint64_t seed = 1;
};

/// Monte-Carlo run of the ML basis attack: every key bit is emitted once as
/// a message (under a random earlier basis) and once as basis material
/// (under a random message bit), each with fresh phase noise.
inline AttackReport run_basis_attack(const BasisAttackConfig& cfg) {
  const phys::CoherentStateParams params(cfg.avg_photon_number);
  const encode::Constellation c(cfg.delta_phi, cfg.resolution_bits);
  SeededStream bits(derive_seed(cfg.seed, 1));
  phys::PhaseNoiseSource noise({phys::sigma_phi(params), derive_seed(cfg.seed, 2)});

  const Bits key = bits.bits(cfg.key_bits);
  const Bits earlier_basis = bits.bits(cfg.key_bits);
  const Bits later_message = bits.bits(cfg.key_bits);
  std::vector<KeyBitObservation> obs(cfg.key_bits);
  BlockTranscript as_message_block;
  as_message_block.symbols.reserve(cfg.key_bits);
  for (std::size_t i = 0; i < cfg.key_bits; ++i) {
    obs[i].as_message = encode::transmit_symbol(key[i], earlier_basis[i], c, noise.next());
    obs[i].as_basis = encode::transmit_symbol(later_message[i], key[i], c, noise.next());
    as_message_block.symbols.push_back(obs[i].as_message);
  }
  const Bits guess = eve_ml_basis_guess(obs, c);

  AttackReport r;
  r.symbols_observed = 2 * cfg.key_bits;
  r.basis_guess_error_rate = static_cast<double>(hamming_distance(guess, key)) / static_cast<double>(cfg.key_bits);
  r.bit_guess_error_rate = eve_bit_guess_rate(as_message_block, key, c, derive_seed(cfg.seed, 3));
  r.helstrom_floor = phys::eavesdropper_error(params, cfg.delta_phi, 2);
  r.phase_ml_prediction = phase_ml_error(params, cfg.delta_phi);
  return r;
}

}  // namespace noisepad::attacker
