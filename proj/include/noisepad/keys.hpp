#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "bits.hpp"
#include "error.hpp"

namespace noisepad {

enum class KeyStatus : std::uint8_t { available, consumed };

/// Shared secret bits that may be spent exactly once, either as basis
/// material for one block or as an authentication key.
struct OneTimeKey {
  Bits bits;
  KeyStatus status = KeyStatus::available;

  void consume() {
    if (status == KeyStatus::consumed) {
      throw Error(ErrorCode::one_time_violation, "key material already used");
    }
    status = KeyStatus::consumed;
  }
};

/// K0, K1, K2, ... in delivery order. K_j is the basis for the block that
/// delivers K_{j+1}.
class KeyChain {
 public:
  KeyChain() = default;
  explicit KeyChain(Bits seed_key) { keys_.push_back({std::move(seed_key), KeyStatus::available}); }

  std::size_t size() const noexcept { return keys_.size(); }
  bool empty() const noexcept { return keys_.empty(); }
  const OneTimeKey& operator[](std::size_t i) const { return keys_.at(i); }
  OneTimeKey& operator[](std::size_t i) { return keys_.at(i); }
  OneTimeKey& latest() {
    if (keys_.empty()) throw Error(ErrorCode::key_exhausted, "key chain is empty");
    return keys_.back();
  }
  const OneTimeKey& latest() const {
    if (keys_.empty()) throw Error(ErrorCode::key_exhausted, "key chain is empty");
    return keys_.back();
  }

  /// The latest key, provided it has not been spent yet.
  OneTimeKey& basis_key() {
    auto& k = latest();
    if (k.status != KeyStatus::available) {
      throw Error(ErrorCode::key_exhausted, "no unused key left in the chain; a fresh seed key is needed");
    }
    return k;
  }

  void append(Bits key) {
    if (!keys_.empty() && key.size() > keys_.back().bits.size()) {
      throw Error(ErrorCode::protocol, "a delivered key may not be longer than its predecessor");
    }
    keys_.push_back({std::move(key), KeyStatus::available});
  }

  /// Sum of the lengths of K1, K2, ... (the seed excluded).
  std::size_t delivered_bits() const noexcept {
    std::size_t n = 0;
    for (std::size_t i = 1; i < keys_.size(); ++i) n += keys_[i].bits.size();
    return n;
  }

  friend bool operator==(const KeyChain& a, const KeyChain& b) {
    if (a.keys_.size() != b.keys_.size()) return false;
    for (std::size_t i = 0; i < a.keys_.size(); ++i) {
      if (a.keys_[i].bits != b.keys_[i].bits) return false;
    }
    return true;
  }

 private:
  std::vector<OneTimeKey> keys_;
};

/// Running estimate of what an eavesdropper may know, in bits.
struct LeakLedger {
  double statistical_leak = 0.0;
  std::uint64_t disclosed_parity_bits = 0;
  /// Bits already removed by privacy amplification to cover the leak
  /// (safety margins not included).
  std::uint64_t discarded_bits = 0;

  double total() const noexcept { return statistical_leak + static_cast<double>(disclosed_parity_bits); }

  void add_symbols(std::size_t symbols, double excess_per_symbol) {
    statistical_leak += static_cast<double>(symbols) * excess_per_symbol;
  }

  void add_parities(std::uint64_t count) { disclosed_parity_bits += count; }

  /// Leak that has not been paid for by discarding bits yet, rounded up.
  std::uint64_t outstanding_bits() const {
    const auto covered = static_cast<std::uint64_t>(std::ceil(total()));
    return covered > discarded_bits ? covered - discarded_bits : 0;
  }
};

}  // namespace noisepad
