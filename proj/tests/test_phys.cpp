#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include <noisepad/phys.hpp>

#include "oracle.hpp"

using namespace noisepad;
using namespace noisepad::phys;

TEST(Phys, SigmaPhi) {
  EXPECT_DOUBLE_EQ(sigma_phi(CoherentStateParams(2)), 1.0);
  EXPECT_DOUBLE_EQ(sigma_phi(CoherentStateParams(8)), 0.5);
  EXPECT_NEAR(sigma_phi(CoherentStateParams(1e4)), 0.014142135623730950488, 1e-17);
}

TEST(Phys, NonPositivePhotonNumberIsDomainError) {
  for (double n : {0.0, -1.0, std::nan("")}) {
    try {
      CoherentStateParams p(n);
      FAIL() << "accepted " << n;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::domain);
    }
  }
}

TEST(Phys, OverlapProbability) {
  EXPECT_DOUBLE_EQ(overlap_probability(0.0, 0.3), 1.0);
  EXPECT_NEAR(overlap_probability(0.3, 0.3), 0.60653065971263342360, 1e-15);
  EXPECT_LT(overlap_probability(100 * 0.3, 0.3), 1e-15);
  EXPECT_THROW(overlap_probability(0.1, 0.0), Error);
  EXPECT_THROW(overlap_probability(0.1, -1.0), Error);
}

TEST(Phys, FidelityExactAndApprox) {
  const CoherentStateParams p(1000);
  EXPECT_DOUBLE_EQ(fidelity_exact(p, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(fidelity_approx(p, 0.0), 1.0);
  // mpmath, 40 digits
  EXPECT_NEAR(fidelity_exact(p, 0.1), 0.08212775879835856001, 1e-15);
  EXPECT_NEAR(fidelity_approx(p, 0.1), 0.08208499862389879517, 1e-15);
  EXPECT_EQ(fidelity_exact(p, 2 * std::numbers::pi), 0.0);
  const double gap = std::abs(fidelity_exact(p, 0.1) - fidelity_approx(p, 0.1)) / fidelity_exact(p, 0.1);
  EXPECT_LT(gap, 0.01);
}

// 1 - cos(x) <= x^2/2, so the small-angle form never exceeds the exact overlap.
TEST(Phys, ApproxNeverExceedsExact) {
  for (double n : {1.0, 10.0, 100.0, 1e4, 1e6}) {
    for (int k = 1; k <= 400; ++k) {
      const double dphi = std::numbers::pi * k / 400.0;
      EXPECT_LE(fidelity_approx(CoherentStateParams(n), dphi), fidelity_exact(CoherentStateParams(n), dphi))
          << n << " " << dphi;
    }
  }
}

TEST(Phys, ApproxWithinOnePercentInRegime) {
  for (double n : {100.0, 1e3, 1e4, 1e5}) {
    for (double dphi = 1e-4; dphi <= 0.1; dphi *= 1.5) {
      const CoherentStateParams p(n);
      const double ex = fidelity_exact(p, dphi);
      // the neglected term is about <n> dphi^4 / 192
      if (n * std::pow(dphi, 4) > 1.0) continue;
      EXPECT_LT(std::abs(ex - fidelity_approx(p, dphi)) / ex, 1e-2) << n << " " << dphi;
    }
  }
}

TEST(Phys, HelstromError) {
  EXPECT_DOUBLE_EQ(helstrom_error(0.0), 0.0);
  EXPECT_DOUBLE_EQ(helstrom_error(1.0), 0.5);
  EXPECT_NEAR(helstrom_error(0.5), 0.14644660940672623780, 1e-16);
  EXPECT_DOUBLE_EQ(helstrom_error(1.0 + 5e-13), 0.5);
  EXPECT_DOUBLE_EQ(helstrom_error(-5e-13), 0.0);
  EXPECT_THROW(helstrom_error(1.0 + 1e-9), Error);
  EXPECT_THROW(helstrom_error(-0.1), Error);
}

TEST(Phys, EavesdropperErrorValues) {
  const CoherentStateParams p(1e4);
  EXPECT_DOUBLE_EQ(eavesdropper_error(p, 0.0, 2), 0.5);
  EXPECT_DOUBLE_EQ(eavesdropper_error(CoherentStateParams(3), 0.0, 7), 0.5);
  EXPECT_NEAR(eavesdropper_error(p, 0x1p-6, 2), oracle::d(oracle::eavesdropper_error(1e4, oracle::Real(0x1p-6))),
              1e-15);
  EXPECT_NEAR(eavesdropper_error(p, 0x1p-6, 2), 0.08018535523830366180, 1e-15);
  EXPECT_NEAR(eavesdropper_error(p, 0x1p-6, 1), helstrom_error(fidelity_approx(p, 0x1p-6)), 1e-15);
  EXPECT_THROW(eavesdropper_error(p, 0.1, 0), Error);
}

TEST(Phys, EavesdropperErrorMonotone) {
  for (double n = 1; n <= 1e6; n *= 3.7) {
    double prev = 0.5;
    for (int k = 0; k <= 200; ++k) {
      const double dphi = std::numbers::pi / 4 * k / 200.0;
      const double e = eavesdropper_error(CoherentStateParams(n), dphi);
      EXPECT_LE(e, prev + 1e-15);
      prev = e;
    }
  }
  for (int k = 1; k <= 20; ++k) {
    const double dphi = 0.01 * k;
    double prev = 0.5;
    for (double n = 1; n <= 1e6; n *= 2) {
      const double e = eavesdropper_error(CoherentStateParams(n), dphi);
      EXPECT_LE(e, prev + 1e-15);
      prev = e;
    }
  }
}

TEST(Phys, HelstromOfExactOverlapIsHalfOnlyAtZero) {
  for (double n : {1.0, 50.0, 1e4}) {
    const CoherentStateParams p(n);
    EXPECT_DOUBLE_EQ(helstrom_error(fidelity_exact(p, 0.0)), 0.5);
    for (double dphi = 1e-3; dphi < std::numbers::pi; dphi *= 2) {
      EXPECT_LT(helstrom_error(fidelity_exact(p, dphi)), 0.5);
    }
  }
}

TEST(Phys, LegitimateError) {
  EXPECT_NEAR(legitimate_error(CoherentStateParams(2)), oracle::d(2 * oracle::q_function(oracle::pi() / 2)), 1e-14);
  EXPECT_NEAR(legitimate_error(CoherentStateParams(2)), 0.11622996556681899230, 1e-14);
  EXPECT_LT(legitimate_error(CoherentStateParams(1e4)), 1e-300);
  double prev = 1.0;
  for (double n = 0.5; n < 1e4; n *= 1.3) {
    const double e = legitimate_error(CoherentStateParams(n));
    EXPECT_LE(e, prev);
    prev = e;
  }
}

TEST(Phys, GaussianTailRelativeAccuracy) {
  for (double z = 0.0; z <= 8.0; z += 0.25) {
    const double ref = oracle::d(oracle::q_function(oracle::Real(z)));
    EXPECT_NEAR(gaussian_tail(z), ref, 1e-12 * ref) << z;
  }
}

TEST(Phys, NoiseSamplerDeterministicAndCalibrated) {
  EXPECT_TRUE(sample_phase_noise({0.5, 9}, 0).empty());
  const auto a = sample_phase_noise({0.5, 1234}, 1000000);
  const auto b = sample_phase_noise({0.5, 1234}, 1000000);
  EXPECT_EQ(a, b);
  double mean = 0, sq = 0;
  for (double x : a) mean += x;
  mean /= a.size();
  for (double x : a) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / (a.size() - 1));
  EXPECT_NEAR(sd, 0.5, 0.002);
  EXPECT_LT(std::abs(mean), 4 * 0.5 / std::sqrt(1e6));
  EXPECT_NE(a, sample_phase_noise({0.5, 1235}, 1000000));
}

TEST(Phys, NoiseSamplerMeanSmallForManySeeds) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto xs = sample_phase_noise({0.2, seed}, 10000);
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= xs.size();
    EXPECT_LT(std::abs(mean), 4 * 0.2 / 100.0) << seed;
  }
}

TEST(Phys, NoiseModelRejectsOutOfRangeSigma) {
  EXPECT_THROW(PhaseNoiseSource({-0.1, 1}), Error);
  PhaseNoiseSource silent({0.0, 1});
  EXPECT_EQ(silent.sample(3), (std::vector<double>{0.0, 0.0, 0.0}));
  EXPECT_THROW(PhaseNoiseSource({2.0, 1}), Error);
}
