#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "encode.hpp"
#include "phys.hpp"

namespace noisepad::analysis {

inline constexpr double kDefaultRatio = 8.0;

/// Basis-information excess DeltaH - 1/2 in bits per symbol.
///
/// With u = sqrt(1 - overlap) the success probability is P_s = (1+u)/2 and
/// DeltaH = 1 + P_s log2 P_s, which rearranges to
/// ((1+u) log2(1+u) - u) / 2. That form keeps full relative precision when
/// u ~ 1e-7 (delta_phi around 2^-30).
inline double entropy_leak_excess(const phys::CoherentStateParams& params, double delta_phi) {
  if (delta_phi == 0.0) return 0.0;
  const double x = 2.0 * params.avg_photon_number / 4.0 * delta_phi * delta_phi;
  const double u = phys::distinguishability(x);
  const double excess = ((1.0 + u) * std::log1p(u) / std::numbers::ln2 - u) / 2.0;
  return std::max(excess, 0.0);
}

/// DeltaH_bases in bits; exactly 1/2 when the bases coincide.
inline double entropy_leak(const phys::CoherentStateParams& params, double delta_phi) {
  return 0.5 + entropy_leak_excess(params, delta_phi);
}

/// Symbols that must be exchanged before one bit about the bases leaks.
inline double min_leak_length_from_delta_h(double delta_h) {
  const double excess = delta_h - 0.5;
  if (excess <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / excess;
}

inline double min_leak_length(const phys::CoherentStateParams& params, double delta_phi) {
  const double excess = entropy_leak_excess(params, delta_phi);
  if (excess <= 0.0) return std::numeric_limits<double>::infinity();
  return 1.0 / excess;
}

struct SecurityPoint {
  double avg_photon_number = 0.0;
  double delta_phi = 0.0;
  double p_error = 0.5;
  double p_success = 0.5;
  double delta_h = 0.5;
  double leak_length = std::numeric_limits<double>::infinity();
};

inline SecurityPoint security_point(const phys::CoherentStateParams& params, double delta_phi) {
  SecurityPoint p;
  p.avg_photon_number = params.avg_photon_number;
  p.delta_phi = delta_phi;
  p.p_error = phys::eavesdropper_error(params, delta_phi, 2);
  p.p_success = 1.0 - p.p_error;
  p.delta_h = entropy_leak(params, delta_phi);
  p.leak_length = min_leak_length(params, delta_phi);
  return p;
}

struct Violation {
  std::string inequality;  ///< e.g. "pi/2 >> sigma_phi"
  double required_ratio = 0.0;
  double actual_ratio = 0.0;
};

struct ValidationReport {
  double sigma_phi = 0.0;
  double ratio = kDefaultRatio;
  std::vector<Violation> violations;

  bool ok() const noexcept { return violations.empty(); }

  std::string describe() const {
    if (ok()) return "ok";
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
      const auto& v = violations[i];
      if (i) os << "; ";
      os << "violated " << v.inequality << ": ratio " << v.actual_ratio << " < required " << v.required_ratio;
    }
    return os.str();
  }
};

/// Operating window pi/2 >> sigma_phi >> delta_phi, with ">>" read as "at
/// least `ratio` times".
inline ValidationReport validate_params(const phys::CoherentStateParams& params, double delta_phi,
                                        double ratio = kDefaultRatio) {
  ValidationReport report;
  report.ratio = ratio;
  report.sigma_phi = phys::sigma_phi(params);
  const double upper = (std::numbers::pi / 2.0) / report.sigma_phi;
  if (upper < ratio) report.violations.push_back({"pi/2 >> sigma_phi", ratio, upper});
  const double lower = delta_phi > 0.0 ? report.sigma_phi / delta_phi : std::numeric_limits<double>::infinity();
  if (lower < ratio) report.violations.push_back({"sigma_phi >> delta_phi", ratio, lower});
  return report;
}

inline ValidationReport validate_params(const phys::CoherentStateParams& params, const encode::Constellation& c,
                                        double ratio = kDefaultRatio) {
  return validate_params(params, c.delta_phi(), ratio);
}

/// Fresh key bits deliverable (one per symbol) before the accumulated basis
/// leak reaches one bit, less the safety margin, relative to the seed length.
inline double boost_factor(const phys::CoherentStateParams& params, double delta_phi, std::size_t seed_key_length,
                           std::size_t safety_bits) {
  if (seed_key_length < 128) throw Error(ErrorCode::domain, "seed key must be at least 128 bits");
  const double symbols = min_leak_length(params, delta_phi);
  if (std::isinf(symbols)) return symbols;
  const double deliverable = std::max(0.0, symbols - static_cast<double>(safety_bits));
  return deliverable / static_cast<double>(seed_key_length);
}

inline double boost_factor(const phys::CoherentStateParams& params, const encode::Constellation& c,
                           std::size_t seed_key_length, std::size_t safety_bits) {
  return boost_factor(params, c.delta_phi(), seed_key_length, safety_bits);
}

enum class SurfaceQuantity { delta_h, leak_length };

/// Shortest text that parses back to the same double; "inf"/"-inf" for
/// infinities.
inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// CSV surface with header `n_avg,delta_phi_exp2,value`. Delta-phi is given
/// as a base-2 exponent; -inf stands for delta_phi = 0. Rows run over <n>
/// (outer) then the exponent (inner), both ascending.
inline std::string emit_surface(std::span<const double> n_grid, std::span<const double> exp_grid,
                                SurfaceQuantity quantity) {
  std::vector<double> ns(n_grid.begin(), n_grid.end());
  std::vector<double> es(exp_grid.begin(), exp_grid.end());
  std::sort(ns.begin(), ns.end());
  std::sort(es.begin(), es.end());
  std::string out = "n_avg,delta_phi_exp2,value\n";
  for (double n : ns) {
    const phys::CoherentStateParams params(n);
    for (double e : es) {
      const double dphi = std::exp2(e);
      const double v = quantity == SurfaceQuantity::delta_h ? entropy_leak(params, dphi) : min_leak_length(params, dphi);
      out += format_number(n);
      out += ',';
      out += format_number(e);
      out += ',';
      out += format_number(v);
      out += '\n';
    }
  }
  return out;
}

}  // namespace noisepad::analysis
