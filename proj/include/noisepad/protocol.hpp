#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "analysis.hpp"
#include "bits.hpp"
#include "encode.hpp"
#include "keys.hpp"
#include "phys.hpp"
#include "random.hpp"

namespace noisepad {

enum class ReconcileMode : std::uint8_t {
  parity_bisection,
  /// Skip interactive reconciliation. Only accepted when the expected number
  /// of legitimate decoding errors per block is negligible.
  none,
};

inline constexpr std::size_t kDefaultSafetyBits = 32;
inline constexpr std::size_t kDefaultReconciliationBlock = 256;
inline constexpr double kNegligibleBlockErrors = 1e-12;

struct SessionParams {
  double avg_photon_number = 1e4;
  double delta_phi = 0x1p-30;
  int resolution_bits = 40;
  /// Length of K0 and therefore of the first block; later blocks carry as
  /// many symbols as the key they are keyed with.
  std::size_t block_length = 1024;
  std::size_t safety_bits = kDefaultSafetyBits;
  std::size_t reconciliation_block = kDefaultReconciliationBlock;
  ReconcileMode reconcile = ReconcileMode::parity_bisection;

  phys::CoherentStateParams coherent() const { return phys::CoherentStateParams(avg_photon_number); }
  encode::Constellation constellation() const { return encode::Constellation(delta_phi, resolution_bits); }

  /// Per-symbol basis leak charged to the ledger.
  double leak_per_symbol() const { return analysis::entropy_leak_excess(coherent(), delta_phi); }

  /// Throws ErrorCode::validation (or domain) describing the first problem.
  void validate() const {
    const auto report = analysis::validate_params(coherent(), delta_phi);
    if (!report.ok()) throw Error(ErrorCode::validation, report.describe());
    try {
      (void)constellation();
    } catch (const Error& e) {
      throw Error(ErrorCode::validation, e.what());
    }
    if (reconciliation_block < 8 || block_length < reconciliation_block) {
      throw Error(ErrorCode::validation, "need block_length >= reconciliation_block >= 8");
    }
    if (reconcile == ReconcileMode::none) {
      const double expected = static_cast<double>(block_length) * phys::legitimate_error(coherent());
      if (!(expected < kNegligibleBlockErrors)) {
        throw Error(ErrorCode::validation, "reconciliation can only be skipped when decoding errors are negligible");
      }
    }
  }
};

enum class Direction : std::uint8_t { a_to_b = 0, b_to_a = 1 };

struct BlockTranscript {
  Direction direction = Direction::a_to_b;
  std::uint32_t cycle_index = 0;
  std::vector<encode::QuantizedPhase> symbols;

  /// Index j of the key K_j this block delivers; it was keyed with K_{j-1}.
  std::size_t key_index() const noexcept {
    return 2 * static_cast<std::size_t>(cycle_index) + static_cast<std::size_t>(direction) + 1;
  }

  friend bool operator==(const BlockTranscript&, const BlockTranscript&) = default;
};

/// Encodes fresh bits under a one-time basis key. The key is spent even if
/// the caller later drops the transcript.
inline BlockTranscript send_block(std::span<const std::uint8_t> fresh_bits, OneTimeKey& basis_key,
                                  const SessionParams& params, phys::PhaseNoiseSource& noise,
                                  std::uint32_t cycle_index = 0, Direction direction = Direction::a_to_b) {
  if (basis_key.status != KeyStatus::available) {
    throw Error(ErrorCode::one_time_violation, "basis key has already been used for a block");
  }
  if (fresh_bits.size() != basis_key.bits.size()) {
    throw Error(ErrorCode::protocol, "fresh bits and basis key differ in length");
  }
  const auto c = params.constellation();
  basis_key.consume();
  BlockTranscript t{direction, cycle_index, {}};
  t.symbols.reserve(fresh_bits.size());
  for (std::size_t j = 0; j < fresh_bits.size(); ++j) {
    t.symbols.push_back(encode::transmit_symbol(fresh_bits[j], basis_key.bits[j], c, noise.next()));
  }
  return t;
}

inline Bits recover_block(const BlockTranscript& t, std::span<const std::uint8_t> basis_key,
                          const SessionParams& params) {
  if (basis_key.size() != t.symbols.size()) {
    throw Error(ErrorCode::protocol, "basis key length does not match the block");
  }
  const auto c = params.constellation();
  Bits out(t.symbols.size());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = encode::decode_with_basis(t.symbols[j], basis_key[j], c);
  return out;
}

enum class Role : std::uint8_t { initiator = 0, responder = 1 };

/// One side of a session: its copy of the key chain and ledger plus its
/// seeded stand-ins for the physical generator (fresh bits and noise) and
/// a stream for public values.
class Party {
 public:
  Party(Role role, SessionParams params, Bits seed_key, std::uint64_t seed)
      : role_(role),
        params_(params),
        chain_(std::move(seed_key)),
        fresh_(derive_seed(seed, 0x100 + static_cast<std::uint64_t>(role))),
        public_(derive_seed(seed, 0x200 + static_cast<std::uint64_t>(role))),
        noise_({phys::sigma_phi(params.coherent()), derive_seed(seed, 0x300 + static_cast<std::uint64_t>(role))}) {
    params_.validate();
    if (chain_[0].bits.size() != params_.block_length) {
      throw Error(ErrorCode::validation, "seed key length must equal block_length");
    }
  }

  Role role() const noexcept { return role_; }
  const SessionParams& params() const noexcept { return params_; }
  KeyChain& chain() noexcept { return chain_; }
  const KeyChain& chain() const noexcept { return chain_; }
  LeakLedger& ledger() noexcept { return ledger_; }
  const LeakLedger& ledger() const noexcept { return ledger_; }

  Bits fresh_bits(std::size_t n) { return fresh_.bits(n); }
  phys::PhaseNoiseSource& noise() noexcept { return noise_; }
  std::uint64_t public_value() { return public_.next_word(); }

 private:
  Role role_;
  SessionParams params_;
  KeyChain chain_;
  LeakLedger ledger_;
  SeededStream fresh_;
  SeededStream public_;
  phys::PhaseNoiseSource noise_;
};

}  // namespace noisepad
