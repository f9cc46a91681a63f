#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "qmet/linalg.hpp"
#include "qmet/rng.hpp"

namespace qmet {

/// Estimation target x = (phi, delta), both in radians.
struct ParamPoint {
  double phi = 0.0;
  double delta = 0.0;

  ParamPoint(double phi_, double delta_) : phi(phi_), delta(delta_) {
    if (delta < 0.0) throw std::invalid_argument("ParamPoint: delta < 0");
  }

  /// The Bell probabilities depend only on cos 2*phi, so [0, pi/2) is one
  /// identifiability cell.
  ParamPoint canonical() const {
    double p = std::fmod(phi, M_PI);
    if (p < 0.0) p += M_PI;
    if (p >= M_PI / 2.0) p = M_PI - p;
    return {p, delta};
  }
};

/// Bloch polar angle of the initial pure state
/// cos(theta/2)|0> + sin(theta/2)|1>.
struct QubitPrep {
  double theta = M_PI / 2.0;

  explicit QubitPrep(double theta_) : theta(theta_) {
    if (theta < 0.0 || theta > M_PI)
      throw std::invalid_argument("QubitPrep: theta outside [0, pi]");
  }
};

enum class PhaseSampleMode { iid, quantile };

/// Discrete phase list approximating the Gaussian channel, N(phi, 2*delta^2).
struct PhaseSampleSet {
  std::vector<double> samples;
  std::uint64_t seed = 0;
};

namespace detail {

/// Inverse standard-normal CDF by Newton iteration on erf; used by the
/// deterministic quantile grid mode.
inline double inv_norm_cdf(double p) {
  // crude initial guess, then Newton on Phi(x) - p
  double x = 0.0;
  double lo = -12.0, hi = 12.0;
  for (int i = 0; i < 80; ++i) {
    double mid = 0.5 * (lo + hi);
    double c = 0.5 * (1.0 + std::erf(mid / std::sqrt(2.0)));
    if (c < p)
      lo = mid;
    else
      hi = mid;
  }
  x = 0.5 * (lo + hi);
  for (int i = 0; i < 4; ++i) {
    double c = 0.5 * (1.0 + std::erf(x / std::sqrt(2.0)));
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
    if (pdf < 1e-300) break;
    x -= (c - p) / pdf;
  }
  return x;
}

}  // namespace detail

/// Draws `count` phases from N(phi, 2*delta^2). The quantile mode replaces
/// i.i.d. draws with a deterministic mid-point quantile grid of the same
/// Gaussian (the seed is then unused).
inline PhaseSampleSet sample_phases(const ParamPoint& p, int count,
                                    std::uint64_t seed,
                                    PhaseSampleMode mode = PhaseSampleMode::iid) {
  if (count < 1) throw std::invalid_argument("sample_phases: count < 1");
  const double sigma = std::sqrt(2.0) * p.delta;
  PhaseSampleSet out;
  out.seed = seed;
  out.samples.reserve(count);
  if (mode == PhaseSampleMode::iid) {
    SplitMix64 g(seed);
    for (int i = 0; i < count; ++i)
      out.samples.push_back(normal(g, p.phi, sigma));
  } else {
    for (int i = 0; i < count; ++i) {
      double q = (i + 0.5) / count;
      out.samples.push_back(p.phi + sigma * detail::inv_norm_cdf(q));
    }
  }
  return out;
}

/// Eq.-(3)-style qubit: diagonal (cos^2, sin^2)(theta/2), off-diagonal
/// damped by e^{-delta^2} with phase e^{-i phi} in entry (0,1).
inline DensityMatrix diffused_qubit(const QubitPrep& prep, const ParamPoint& p) {
  const double c = std::cos(prep.theta / 2.0);
  const double s = std::sin(prep.theta / 2.0);
  const Complex off = c * s * std::exp(Complex(-p.delta * p.delta, -p.phi));
  Mat m(2, 2);
  m << Complex(c * c, 0.0), off, std::conj(off), Complex(s * s, 0.0);
  return DensityMatrix(m);
}

/// Gaussian dephasing in a truncated Fock basis: entry (n,m) picks up
/// exp(-delta^2 (n-m)^2 + i phi (n-m)); diagonal unchanged.
inline DensityMatrix diffused_fock(const DensityMatrix& rho0, const ParamPoint& p) {
  Mat m = rho0.mat();
  for (Eigen::Index n = 0; n < m.rows(); ++n)
    for (Eigen::Index k = 0; k < m.cols(); ++k) {
      const double nm = static_cast<double>(n - k);
      m(n, k) *= std::exp(Complex(-p.delta * p.delta * nm * nm, p.phi * nm));
    }
  return DensityMatrix(m);
}

inline DensityMatrix two_copy(const DensityMatrix& rho) {
  return DensityMatrix(kron(rho.mat(), rho.mat()));
}

/// Finite-sample channel: uniform mixture of the pure states dephased by
/// each listed phase. Converges to diffused_qubit as the list grows.
inline DensityMatrix finite_sample_state(const QubitPrep& prep,
                                         const PhaseSampleSet& phases) {
  if (phases.samples.empty())
    throw std::invalid_argument("finite_sample_state: empty sample set");
  const double c = std::cos(prep.theta / 2.0);
  const double s = std::sin(prep.theta / 2.0);
  Complex off_sum = 0.0;
  for (double ph : phases.samples) off_sum += std::exp(Complex(0.0, -ph));
  const Complex off = c * s * off_sum / static_cast<double>(phases.samples.size());
  Mat m(2, 2);
  m << Complex(c * c, 0.0), off, std::conj(off), Complex(s * s, 0.0);
  return DensityMatrix(m);
}

/// Ideal product-state calibration probabilities for two pure equatorial
/// qubits under the Bell measurement.
inline std::array<double, 4> calibration_probs(double phi1, double phi2) {
  return {0.25 * (1.0 + std::cos(phi1 + phi2)),
          0.25 * (1.0 - std::cos(phi1 + phi2)),
          0.25 * (1.0 + std::cos(phi1 - phi2)),
          0.25 * (1.0 - std::cos(phi1 - phi2))};
}

}  // namespace qmet
