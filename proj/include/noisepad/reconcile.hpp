#pragma once

// Two-pass parity bisection (a simplified Cascade). The receiver asks the
// sender for block parities, bisects every block whose parity disagrees to
// find and flip one bit, then repeats over a public permutation of the
// positions. Every parity the sender reveals is charged to the leak ledger.

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "bits.hpp"
#include "keys.hpp"
#include "random.hpp"

namespace noisepad {

struct ParityRange {
  std::uint32_t start = 0;
  std::uint32_t length = 0;
  friend bool operator==(const ParityRange&, const ParityRange&) = default;
};

/// Ranges are in pass coordinates: pass 0 is the natural order, pass 1 reads
/// position permutation[k] at index k.
struct ParityQuery {
  std::uint8_t pass = 0;
  std::uint64_t permutation_seed = 0;
  std::vector<ParityRange> ranges;
};

/// Whatever answers parity queries about the sender's bits (in-process
/// object or the wire).
class ParityPeer {
 public:
  virtual ~ParityPeer() = default;
  virtual Bits parities(const ParityQuery& query) = 0;
};

namespace detail {

class PassView {
 public:
  PassView(std::size_t n, std::uint8_t pass, std::uint64_t seed) {
    if (pass == 1) perm_ = public_permutation(n, seed);
  }
  std::size_t operator()(std::size_t k) const { return perm_.empty() ? k : perm_[k]; }

 private:
  std::vector<std::size_t> perm_;
};

inline std::uint8_t range_parity(std::span<const std::uint8_t> bits, const PassView& view, ParityRange r) {
  std::uint8_t p = 0;
  for (std::uint32_t k = r.start; k < r.start + r.length; ++k) p ^= bits[view(k)];
  return p & 1u;
}

}  // namespace detail

/// Sender side: answers queries against its own bits.
class ParityResponder : public ParityPeer {
 public:
  explicit ParityResponder(Bits bits) : bits_(std::move(bits)) {}

  Bits parities(const ParityQuery& query) override {
    if (query.pass > 1) throw Error(ErrorCode::protocol, "unknown reconciliation pass");
    const auto& view = view_for(query);
    Bits out;
    out.reserve(query.ranges.size());
    for (const auto& r : query.ranges) {
      if (std::uint64_t{r.start} + r.length > bits_.size()) {
        throw Error(ErrorCode::protocol, "parity range outside the block");
      }
      out.push_back(detail::range_parity(bits_, view, r));
    }
    answered_ += out.size();
    return out;
  }

  std::uint64_t answered() const noexcept { return answered_; }

 private:
  const detail::PassView& view_for(const ParityQuery& q) {
    const std::uint64_t key = q.pass == 0 ? 0 : q.permutation_seed;
    auto& slot = views_[q.pass];
    auto it = slot.find(key);
    if (it == slot.end()) it = slot.emplace(key, detail::PassView(bits_.size(), q.pass, key)).first;
    return it->second;
  }

  Bits bits_;
  std::unordered_map<std::uint64_t, detail::PassView> views_[2];
  std::uint64_t answered_ = 0;
};

struct ReconcileResult {
  Bits bits;
  std::size_t flipped = 0;
  std::uint64_t parities_disclosed = 0;
};

/// Receiver side. Corrects `local` towards the sender's bits; throws
/// reconciliation_failure when any revealed parity still disagrees after
/// both passes.
inline ReconcileResult reconcile(std::span<const std::uint8_t> local, ParityPeer& peer, std::size_t block_size,
                                 std::uint64_t permutation_seed, LeakLedger& ledger) {
  if (block_size == 0) throw Error(ErrorCode::domain, "reconciliation block size must be positive");
  ReconcileResult result;
  result.bits.assign(local.begin(), local.end());
  Bits& bits = result.bits;
  const std::size_t n = bits.size();

  struct Revealed {
    std::uint8_t pass;
    ParityRange range;
    std::uint8_t parity;
  };
  std::vector<Revealed> revealed;
  detail::PassView views[2] = {detail::PassView(n, 0, 0), detail::PassView(n, 1, permutation_seed)};

  auto ask = [&](std::uint8_t pass, std::vector<ParityRange> ranges) {
    ParityQuery q{pass, pass == 0 ? 0 : permutation_seed, std::move(ranges)};
    Bits answer = peer.parities(q);
    if (answer.size() != q.ranges.size()) throw Error(ErrorCode::protocol, "parity response has the wrong length");
    ledger.add_parities(answer.size());
    result.parities_disclosed += answer.size();
    for (std::size_t i = 0; i < answer.size(); ++i) revealed.push_back({pass, q.ranges[i], answer[i]});
    return std::pair{std::move(q.ranges), std::move(answer)};
  };

  for (std::uint8_t pass = 0; pass < 2 && n > 0; ++pass) {
    const auto& view = views[pass];
    std::vector<ParityRange> blocks;
    for (std::size_t s = 0; s < n; s += block_size) {
      blocks.push_back({static_cast<std::uint32_t>(s), static_cast<std::uint32_t>(std::min(block_size, n - s))});
    }
    auto [ranges, remote] = ask(pass, std::move(blocks));
    std::vector<ParityRange> pending;
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      if (detail::range_parity(bits, view, ranges[i]) != remote[i]) pending.push_back(ranges[i]);
    }
    while (!pending.empty()) {
      std::vector<ParityRange> halves;
      std::vector<ParityRange> open;
      for (const auto& r : pending) {
        if (r.length == 1) {
          bits[view(r.start)] ^= 1u;
          ++result.flipped;
        } else {
          open.push_back(r);
          halves.push_back({r.start, r.length / 2});
        }
      }
      pending.clear();
      if (open.empty()) break;
      auto [left, left_remote] = ask(pass, std::move(halves));
      for (std::size_t i = 0; i < open.size(); ++i) {
        if (detail::range_parity(bits, view, left[i]) != left_remote[i]) {
          pending.push_back(left[i]);
        } else {
          pending.push_back({open[i].start + left[i].length, open[i].length - left[i].length});
        }
      }
    }
  }

  for (const auto& r : revealed) {
    if (detail::range_parity(bits, views[r.pass], r.range) != r.parity) {
      throw Error(ErrorCode::reconciliation_failure, "residual parity mismatch after both passes");
    }
  }
  return result;
}

}  // namespace noisepad
