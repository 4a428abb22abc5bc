#pragma once

// Closed-form statistics of a phase-encoded coherent signal: phase spread,
// state overlap, and two-state discrimination error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "error.hpp"

namespace noisepad::phys {

struct CoherentStateParams {
  double avg_photon_number = 0.0;  ///< <n> = |alpha|^2

  explicit CoherentStateParams(double n) : avg_photon_number(n) {
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw Error(ErrorCode::domain, "average photon number must be positive and finite, got " + std::to_string(n));
    }
  }
};

inline double sigma_phi(const CoherentStateParams& params) {
  return std::sqrt(2.0 / params.avg_photon_number);
}

inline double overlap_probability(double delta_phi_12, double sigma) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::domain, "sigma_phi must be positive");
  return std::exp(-(delta_phi_12 * delta_phi_12) / (2.0 * sigma * sigma));
}

/// |<psi0|psi1>|^2 for two coherent states of equal amplitude whose phases
/// differ by delta_phi.
inline double fidelity_exact(const CoherentStateParams& params, double delta_phi) {
  const double s = std::sin(delta_phi / 4.0);
  return std::exp(-4.0 * params.avg_photon_number * s * s);
}

/// Small-angle form of fidelity_exact; never larger than it.
inline double fidelity_approx(const CoherentStateParams& params, double delta_phi) {
  return std::exp(-params.avg_photon_number * delta_phi * delta_phi / 4.0);
}

inline double helstrom_error(double overlap_sq) {
  constexpr double tol = 1e-12;
  if (overlap_sq < -tol || overlap_sq > 1.0 + tol || std::isnan(overlap_sq)) {
    throw Error(ErrorCode::domain, "overlap must lie in [0,1], got " + std::to_string(overlap_sq));
  }
  overlap_sq = std::clamp(overlap_sq, 0.0, 1.0);
  return 0.5 * (1.0 - std::sqrt(1.0 - overlap_sq));
}

/// sqrt(1 - exp(-x)) evaluated without cancellation for tiny x.
inline double distinguishability(double x) { return std::sqrt(-std::expm1(-x)); }

/// Minimum error for an eavesdropper telling the two bases apart when every
/// key bit is emitted `repetitions` times (2 in the protocol: once as a
/// message, once as basis material).
inline double eavesdropper_error(const CoherentStateParams& params, double delta_phi, int repetitions = 2) {
  if (repetitions < 1) throw Error(ErrorCode::domain, "repetitions must be >= 1");
  const double x = repetitions * params.avg_photon_number / 4.0 * delta_phi * delta_phi;
  return 0.5 * (1.0 - distinguishability(x));
}

/// Gaussian tail Q(z) = P(Z > z).
inline double gaussian_tail(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

/// Probability that phase noise pushes a symbol past the decision boundary
/// of a known basis (the boundary sits pi/2 away on either side).
inline double legitimate_error(const CoherentStateParams& params) {
  return 2.0 * gaussian_tail((std::numbers::pi / 2.0) / sigma_phi(params));
}

struct PhaseNoiseModel {
  double sigma_phi = 0.0;
  std::uint64_t seed = 0;
};

/// Seedable stand-in for a physical noise source. A deployment needs real
/// physical entropy here; a deterministic generator can be searched.
class PhaseNoiseSource {
 public:
  explicit PhaseNoiseSource(const PhaseNoiseModel& model)
      : engine_(model.seed), dist_(0.0, model.sigma_phi > 0.0 ? model.sigma_phi : 1.0), silent_(model.sigma_phi == 0.0) {
    if (!(model.sigma_phi >= 0.0) || !(model.sigma_phi < std::numbers::pi / 2.0)) {
      throw Error(ErrorCode::domain, "phase noise sigma must lie in [0, pi/2)");
    }
  }

  /// sigma_phi = 0 gives a noiseless source (always 0).
  double next() { return silent_ ? 0.0 : dist_(engine_); }

  std::vector<double> sample(std::size_t count) {
    std::vector<double> out(count);
    for (auto& v : out) v = next();
    return out;
  }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> dist_;
  bool silent_;
};

inline std::vector<double> sample_phase_noise(const PhaseNoiseModel& model, std::size_t count) {
  PhaseNoiseSource source(model);
  return source.sample(count);
}

}  // namespace noisepad::phys
