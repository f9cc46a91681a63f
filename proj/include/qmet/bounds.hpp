#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "qmet/information.hpp"
#include "qmet/linalg.hpp"

namespace qmet {

/// Incompatibility coefficients of the regret trade-off relation:
/// c   = |Im Omega_12| / sqrt(Q11 Q22)
/// c~  = Tr|sqrt(rho) [L1, L2] sqrt(rho)| / (2 sqrt(Q11 Q22)),
/// with c <= c~ <= 1 and equality c = c~ on pure states.
struct LuWangCoeffs {
  double c = 0.0;
  double c_tilde = 0.0;
};

inline LuWangCoeffs lu_wang_coeffs(const DensityMatrix& rho, const Mat& L1,
                                   const Mat& L2, const Mat2d& qfim) {
  if (qfim(0, 0) <= 0.0 || qfim(1, 1) <= 0.0)
    throw SingularQfimError("lu_wang_coeffs: QFIM diagonal entry <= 0");
  if (!is_hermitian(L1, 1e-9) || !is_hermitian(L2, 1e-9))
    throw NonHermitianError("lu_wang_coeffs: SLD not Hermitian");
  const double norm = std::sqrt(qfim(0, 0) * qfim(1, 1));
  const Complex omega12 = (L1 * L2 * rho.mat()).trace();
  const Mat s = mat_sqrt(rho.mat());
  const Mat comm = L1 * L2 - L2 * L1;
  LuWangCoeffs out;
  out.c = std::abs(omega12.imag()) / norm;
  out.c_tilde = trace_norm(s * comm * s) / (2.0 * norm);
  return out;
}

struct RegretCheck {
  bool satisfied = false;
  double slack = 0.0;  // rhs - lhs; negative means violated
};

/// Evaluates the error-form trade-off
/// g_phi + g_delta - 2 sqrt(1-c~^2) sqrt((1-g_phi)(1-g_delta)) <= 2 - c~^2.
inline RegretCheck lu_wang_regret_check(double gamma_phi, double gamma_delta,
                                        double c_tilde) {
  if (gamma_phi < 0.0 || gamma_phi > 1.0 || gamma_delta < 0.0 || gamma_delta > 1.0)
    throw OutOfRangeError("lu_wang_regret_check: gamma outside [0,1]");
  if (c_tilde < 0.0 || c_tilde > 1.0)
    throw OutOfRangeError("lu_wang_regret_check: c_tilde outside [0,1]");
  const double ct2 = c_tilde * c_tilde;
  const double lhs = gamma_phi + gamma_delta -
                     2.0 * std::sqrt(std::max(0.0, 1.0 - ct2)) *
                         std::sqrt((1.0 - gamma_phi) * (1.0 - gamma_delta));
  const double rhs = 2.0 - ct2;
  return {lhs <= rhs, rhs - lhs};
}

/// Collective and separable information ceilings for two-copy states of a
/// d-dimensional system: Tr(Q^{-1} F_2) <= 3d-3 (collective), 2(d-1)
/// (separable). Normalized by Q_2 = 2Q, d=2 gives the 1.5 ceiling.
inline std::pair<double, double> zhu_hayashi_bound(int d) {
  if (d < 2) throw std::invalid_argument("zhu_hayashi_bound: d < 2");
  return {3.0 * d - 3.0, 2.0 * (d - 1.0)};
}

/// Pure-state ensemble rho = sum_q lambda_q |phi_q><phi_q| built from an
/// orthonormal basis via |phi_q> = sqrt(rho)|u_q>/sqrt(lambda_q).
struct PureDecomposition {
  std::vector<Vec> basis;
  std::vector<double> weights;
  std::vector<Vec> vectors;  // normalized; zero vector when weight ~ 0
};

inline PureDecomposition pure_decomposition(const DensityMatrix& rho,
                                            const std::vector<Vec>& basis) {
  const Eigen::Index d = rho.dim();
  if (static_cast<Eigen::Index>(basis.size()) != d)
    throw NonOrthonormalBasisError("pure_decomposition: basis does not span");
  for (std::size_t i = 0; i < basis.size(); ++i)
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const Complex dot = basis[i].adjoint() * basis[j];
      if (std::abs(dot - (i == j ? 1.0 : 0.0)) > 1e-10)
        throw NonOrthonormalBasisError("pure_decomposition: basis not orthonormal");
    }
  const Mat s = mat_sqrt(rho.mat());
  PureDecomposition out;
  out.basis = basis;
  for (const auto& u : basis) {
    const double lam = (u.adjoint() * rho.mat() * u)(0, 0).real();
    out.weights.push_back(lam);
    if (lam > 1e-12)
      out.vectors.push_back(Vec(s * u) / std::sqrt(lam));
    else
      out.vectors.push_back(Vec::Zero(d));
  }
  return out;
}

/// RHS of the weighted pure-state-decomposition trade-off,
/// sum_q (lambda_q/2)(alpha_q - sqrt(alpha_q^2 - beta_q^2)) with
/// alpha_q = w1 Var_q(L1) + w2 Var_q(L2) and
/// beta_q = i sqrt(w1 w2) <phi_q|[L1, L2]|phi_q>.
inline double chen_yuan_rhs(const DensityMatrix& rho2, const Mat& L1,
                            const Mat& L2, std::pair<double, double> w,
                            const std::vector<Vec>& basis) {
  if (w.first < 0.0 || w.second < 0.0)
    throw std::invalid_argument("chen_yuan_rhs: weights must be >= 0");
  PureDecomposition dec = pure_decomposition(rho2, basis);
  double rhs = 0.0;
  for (std::size_t q = 0; q < dec.weights.size(); ++q) {
    const double lam = dec.weights[q];
    if (lam <= 1e-12) continue;
    const Vec& v = dec.vectors[q];
    auto variance = [&](const Mat& L) {
      const double m1 = (v.adjoint() * L * v)(0, 0).real();
      const double m2 = (v.adjoint() * L * L * v)(0, 0).real();
      return m2 - m1 * m1;
    };
    const double alpha = w.first * variance(L1) + w.second * variance(L2);
    const Complex beta_c = Complex(0.0, 1.0) * std::sqrt(w.first * w.second) *
                           (v.adjoint() * (L1 * L2 - L2 * L1) * v)(0, 0);
    if (std::abs(beta_c.imag()) > 1e-8)
      throw ComplexBetaError("chen_yuan_rhs: beta_q has imaginary residue");
    const double beta = beta_c.real();
    const double disc = std::max(0.0, alpha * alpha - beta * beta);
    rhs += 0.5 * lam * (alpha - std::sqrt(disc));
  }
  return rhs;
}

/// Basis used in the two-copy decomposition bound:
/// {(0,1,0,0), (0,0,1,0), (1,0,0,0), (0,0,0,1)}.
inline std::vector<Vec> default_decomposition_basis() {
  std::vector<Vec> basis(4, Vec::Zero(4));
  basis[0](1) = 1.0;
  basis[1](2) = 1.0;
  basis[2](0) = 1.0;
  basis[3](3) = 1.0;
  return basis;
}

/// Merit ceiling implied by the equal-weight decomposition bound with
/// Q-normalized SLDs: w(1-g1) + w(1-g2) >= RHS gives g1 + g2 <= 2 - RHS/w.
/// For the two-copy family this evaluates to 1.5 for every (phi, delta).
inline double chen_yuan_merit_ceiling(const DensityMatrix& rho2, const Mat& L1,
                                      const Mat& L2, const Mat2d& qfim,
                                      double w = 0.5,
                                      const std::vector<Vec>* basis = nullptr) {
  if (qfim(0, 0) <= 0.0 || qfim(1, 1) <= 0.0)
    throw SingularQfimError("chen_yuan_merit_ceiling: QFIM entry <= 0");
  const Mat l1n = L1 / std::sqrt(qfim(0, 0));
  const Mat l2n = L2 / std::sqrt(qfim(1, 1));
  const std::vector<Vec> def = default_decomposition_basis();
  const double rhs = chen_yuan_rhs(rho2, l1n, l2n, {w, w}, basis ? *basis : def);
  return 2.0 - rhs / w;
}

/// Sampled trade-off diagram for one delta: the regret-relation boundary,
/// the attainable line gamma_phi + gamma_delta = 1.5, and the parametric
/// Bell-measurement curve over phi in [0, pi/2].
struct TradeoffRegion {
  double delta = 0.0;
  std::vector<std::pair<double, double>> boundary_lw;
  std::vector<std::pair<double, double>> bell_curve;
  double attainable_sum = 1.5;
};

inline TradeoffRegion region_curve(double delta, int samples) {
  if (samples < 2) throw std::invalid_argument("region_curve: samples < 2");
  if (delta <= 0.0) throw std::invalid_argument("region_curve: delta <= 0");
  TradeoffRegion out;
  out.delta = delta;
  const double e = std::exp(-2.0 * delta * delta);
  const double k = std::sqrt(3.0 - e);        // 2 sqrt(1 - c~^2) for two copies
  const double b = (7.0 - e) / 4.0;           // 2 - c~^2
  for (int i = 0; i < samples; ++i) {
    const double gp = static_cast<double>(i) / (samples - 1);
    // lhs(gd) is increasing in gd; boundary is the root, clamped to 1.
    auto lhs = [&](double gd) {
      return gp + gd - k * std::sqrt((1.0 - gp) * (1.0 - gd)) - b;
    };
    double gd;
    if (lhs(1.0) <= 0.0) {
      gd = 1.0;
    } else {
      double lo = 0.0, hi = 1.0;
      for (int it = 0; it < 60 && hi - lo > 1e-10; ++it) {
        const double mid = 0.5 * (lo + hi);
        (lhs(mid) <= 0.0 ? lo : hi) = mid;
      }
      gd = 0.5 * (lo + hi);
    }
    out.boundary_lw.emplace_back(gp, gd);
  }
  for (int i = 0; i < samples; ++i) {
    const double phi = (M_PI / 2.0) * static_cast<double>(i) / (samples - 1);
    out.bell_curve.push_back(bell_ratio_analytic({phi, delta}));
  }
  return out;
}

}  // namespace qmet
