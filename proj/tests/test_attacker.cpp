#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include <noisepad/attacker.hpp>
#include <noisepad/session.hpp>

#include "oracle.hpp"

using namespace noisepad;
using namespace noisepad::attacker;

namespace {

double binomial_sd(double p, double n) { return std::sqrt(p * (1 - p) / n); }

SimulationConfig session_config(std::size_t k0, std::uint32_t cycles, std::ostream* tape) {
  SimulationConfig cfg;
  cfg.params.block_length = k0;
  cfg.seed_key = bits_from_seed(77, k0);
  cfg.seed = 77;
  cfg.options.cycles = cycles;
  cfg.transcript = tape;
  return cfg;
}

}  // namespace

TEST(MlBasisGuess, NoiselessSymbols) {
  const encode::Constellation c(0x1p-6, 32);
  for (std::uint8_t key = 0; key < 2; ++key) {
    for (std::uint8_t earlier = 0; earlier < 2; ++earlier) {
      for (std::uint8_t later_msg = 0; later_msg < 2; ++later_msg) {
        const KeyBitObservation o{encode::transmit_symbol(later_msg, key, c, 0.0),
                                  encode::transmit_symbol(key, earlier, c, 0.0)};
        EXPECT_EQ(eve_ml_basis_guess(std::span(&o, 1), c)[0], key);
      }
    }
  }
  EXPECT_EQ(guess_basis(encode::quantize(0x1p-6, 32), c), 1);
  EXPECT_EQ(guess_basis(encode::quantize(0.0, 32), c), 0);
}

TEST(MlBasisGuess, ErrorLiesBetweenHelstromFloorAndPhaseEstimate) {
  const auto r = run_basis_attack({});
  const double n = 1e5;
  const double floor = oracle::d(oracle::eavesdropper_error(1e4, oracle::Real(0x1p-6), 2));
  const double q = 0.21732773567808563;  // Q(0.78125), mpmath
  EXPECT_NEAR(*r.helstrom_floor, floor, 1e-15);
  EXPECT_NEAR(*r.phase_ml_prediction, q, 1e-15);
  EXPECT_GE(*r.basis_guess_error_rate, floor - 3 * binomial_sd(floor, n));
  EXPECT_LE(*r.basis_guess_error_rate, q + 3 * binomial_sd(q, n));
  EXPECT_NEAR(*r.bit_guess_error_rate, 0.5, 3 * binomial_sd(0.5, n));
}

TEST(MlBasisGuess, HelstromFloorHoldsAcrossGrid) {
  for (double n_avg : {1e3, 1e4, 1e5}) {
    for (int e : {-8, -6, -4}) {
      BasisAttackConfig cfg;
      cfg.avg_photon_number = n_avg;
      cfg.delta_phi = std::ldexp(1.0, e);
      cfg.key_bits = 20000;
      cfg.seed = 1000 + static_cast<std::uint64_t>(n_avg) + static_cast<std::uint64_t>(-e);
      const auto r = run_basis_attack(cfg);
      const double floor = *r.helstrom_floor;
      const double rate = *r.basis_guess_error_rate;
      EXPECT_GE(rate, floor - 3 * binomial_sd(floor, 2e4)) << n_avg << " 2^" << e;
      EXPECT_LE(rate, 0.5 + 3 * binomial_sd(0.5, 2e4));
      EXPECT_GE(rate, 0.0);
      EXPECT_LE(rate, 1.0);
    }
  }
}

TEST(BitGuess, BlindEveIsCoinFlip) {
  SessionParams p;
  p.block_length = 10000;
  const Bits x = SeededStream(3).bits(10000);
  OneTimeKey key{SeededStream(4).bits(10000), KeyStatus::available};
  const Bits basis = key.bits;
  phys::PhaseNoiseSource noise({phys::sigma_phi(p.coherent()), 5});
  const auto t = send_block(x, key, p, noise);
  const auto c = p.constellation();

  const double rate = eve_bit_guess_rate(t, x, c, 6);
  EXPECT_NEAR(rate, 0.5, 0.015);
  // the set is always read right, so her errors are exactly her basis misses
  EXPECT_EQ(rate, static_cast<double>(hamming_distance(SeededStream(6).bits(10000), basis)) / 1e4);
  EXPECT_EQ(eve_bit_guess_rate_with_basis(t, x, basis, c), 0.0);
  EXPECT_THROW(eve_bit_guess_rate(BlockTranscript{}, Bits{}, c, 1), Error);
}

TEST(KnownPlaintext, RecoversKey) {
  const Bits k = SeededStream(8).bits(300);
  EXPECT_EQ(known_plaintext_attack(k, Bits(300, 0)), k);

  const auto r = simulate_session(session_config(1024, 1, nullptr));
  const Bits& k1 = r.chain_a[1].bits;
  const Bits x = SeededStream(9).bits(k1.size());
  EXPECT_EQ(known_plaintext_attack(xor_bits(x, k1), x), k1);

  try {
    known_plaintext_attack(Bits(5, 0), Bits(6, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::validation);
  }
}

TEST(ChainCompromise, WalksForwardFromOneKnownKey) {
  std::ostringstream tape;
  const auto cfg = session_config(1024, 5, &tape);
  const auto r = simulate_session(cfg);
  std::istringstream in(tape.str());
  const auto blocks = transport::read_transcript(in, cfg.params.resolution_bits);
  ASSERT_EQ(blocks.size(), 10u);
  const auto c = cfg.params.constellation();

  const auto rec = chain_compromise(blocks, 1, r.chain_a[1].bits, c);
  EXPECT_TRUE(rec.gaps.empty());
  ASSERT_EQ(rec.keys.size(), 9u);
  EXPECT_EQ(rec.keys[0].raw, recover_block(blocks[1].transcript, r.chain_a[1].bits, cfg.params));
  for (const auto& k : rec.keys) EXPECT_EQ(k.key, r.chain_a[k.index].bits) << k.index;
}

TEST(ChainCompromise, WrongKeyGivesCoinFlips) {
  std::ostringstream tape;
  const auto cfg = session_config(8192, 1, &tape);
  const auto r = simulate_session(cfg);
  std::istringstream in(tape.str());
  const auto blocks = transport::read_transcript(in, cfg.params.resolution_bits);
  const Bits& k1 = r.chain_a[1].bits;
  const Bits& k2 = r.chain_a[2].bits;
  Bits wrong = SeededStream(10).bits(k1.size());
  const auto rec = chain_compromise(blocks, 1, wrong, cfg.params.constellation());
  ASSERT_FALSE(rec.keys.empty());
  const double agree = 1.0 - static_cast<double>(hamming_distance(rec.keys[0].key, k2)) / k2.size();
  EXPECT_NEAR(agree, 0.5, 3 * binomial_sd(0.5, k2.size()));
}

TEST(ChainCompromise, MissingBlockIsReportedAsGap) {
  std::ostringstream tape;
  const auto cfg = session_config(1024, 3, &tape);
  const auto r = simulate_session(cfg);
  std::istringstream in(tape.str());
  auto blocks = transport::read_transcript(in, cfg.params.resolution_bits);
  blocks.erase(blocks.begin() + 2);  // the block that delivers K3
  const auto rec = chain_compromise(blocks, 1, r.chain_a[1].bits, cfg.params.constellation());
  ASSERT_EQ(rec.keys.size(), 1u);
  EXPECT_EQ(rec.keys[0].key, r.chain_a[2].bits);
  EXPECT_EQ(rec.gaps, (std::vector<std::size_t>{3, 4, 5, 6}));
}

TEST(AttackReport, Json) {
  AttackReport rep;
  rep.symbols_observed = 4;
  rep.recovered = true;
  rep.recovered_keys.push_back({2, Bits{1, 0, 0, 0, 0, 0, 0, 0, 1}});
  rep.gaps = {5};
  const auto j = to_json(rep);
  EXPECT_EQ(j["symbols_observed"], 4);
  EXPECT_EQ(j["recovered"], true);
  EXPECT_EQ(j["recovered_keys"][0]["index"], 2);
  EXPECT_EQ(j["recovered_keys"][0]["bits"], 9);
  EXPECT_EQ(j["recovered_keys"][0]["hex"], "0101");
  EXPECT_EQ(j["gaps"][0], 5);
  EXPECT_FALSE(j.contains("helstrom_floor"));
}
