#pragma once

#include <cmath>
#include <functional>

#include "qmet/encoding.hpp"
#include "qmet/linalg.hpp"

namespace qmet {

/// Classical FIM F, QFIM Q, the complex matrix Omega_jk = Tr(L_j L_k rho),
/// and the mean Uhlmann curvature U_jk = i Tr(rho [L_j, L_k]) / 4.
/// `fim` is only populated by info_matrices(); qfim() leaves it zero.
struct InfoMatrices {
  Mat2d fim = Mat2d::Zero();
  Mat2d qfim = Mat2d::Zero();
  Mat2c omega = Mat2c::Zero();
  Mat2d uhlmann = Mat2d::Zero();
  bool sld_support_truncated = false;
};

/// Parameterized state family; builder returns the raw matrix so hot loops
/// skip re-validation. copies is bookkeeping only (the builder already
/// returns the full state).
struct StateFamily {
  std::function<Mat(const ParamPoint&)> builder;
  int copies = 1;
  double fd_step = 1e-5;
};

inline StateFamily single_copy_family(double theta = M_PI / 2.0) {
  return {[theta](const ParamPoint& p) {
            return diffused_qubit(QubitPrep(theta), p).mat();
          },
          1, 1e-5};
}

inline StateFamily two_copy_family(double theta = M_PI / 2.0) {
  return {[theta](const ParamPoint& p) {
            Mat m = diffused_qubit(QubitPrep(theta), p).mat();
            return kron(m, m);
          },
          2, 1e-5};
}

namespace detail {

inline std::pair<Mat, Mat> fd_derivatives(const StateFamily& f,
                                          const ParamPoint& p) {
  const double h = f.fd_step;
  Mat dphi = (f.builder({p.phi + h, p.delta}) - f.builder({p.phi - h, p.delta})) /
             (2.0 * h);
  Mat ddelta =
      (f.builder({p.phi, p.delta + h}) - f.builder({p.phi, p.delta - h})) /
      (2.0 * h);
  return {dphi, ddelta};
}

}  // namespace detail

/// FIM of the outcome distribution p_k = Tr(rho E_k) under central-difference
/// parameter derivatives. Outcomes with p_k < 1e-12 contribute zero only if
/// their derivatives also vanish.
inline Mat2d classical_fim(const StateFamily& family, const Povm& povm,
                           const ParamPoint& p) {
  const double h = family.fd_step;
  const Mat rho0 = family.builder(p);
  if (povm.dim() != rho0.rows())
    throw std::invalid_argument("classical_fim: POVM/state dimension mismatch");
  auto probs = [&](const ParamPoint& q) {
    std::vector<double> out;
    Mat rho = family.builder(q);
    out.reserve(povm.size());
    for (const auto& e : povm.elements())
      out.push_back((rho * e).trace().real());
    return out;
  };
  const auto p0 = probs(p);
  const auto pp = probs({p.phi + h, p.delta});
  const auto pm = probs({p.phi - h, p.delta});
  const auto dp = probs({p.phi, p.delta + h});
  const auto dm = probs({p.phi, p.delta - h});
  Mat2d fim = Mat2d::Zero();
  for (std::size_t k = 0; k < povm.size(); ++k) {
    double d1 = (pp[k] - pm[k]) / (2.0 * h);
    double d2 = (dp[k] - dm[k]) / (2.0 * h);
    if (p0[k] < 1e-12) {
      if (std::abs(d1) > 1e-8 || std::abs(d2) > 1e-8)
        throw DegenerateOutcomeError(
            "classical_fim: vanishing probability with nonzero derivative");
      continue;
    }
    fim(0, 0) += d1 * d1 / p0[k];
    fim(0, 1) += d1 * d2 / p0[k];
    fim(1, 1) += d2 * d2 / p0[k];
  }
  fim(1, 0) = fim(0, 1);
  return fim;
}

/// QFIM and companions via finite-difference state derivatives and the SLD
/// solver. Requires delta >= 1e-4: the family is not differentiable in delta
/// at 0 from below.
inline InfoMatrices qfim(const StateFamily& family, const ParamPoint& p) {
  if (p.delta < 1e-4)
    throw std::invalid_argument("qfim: requires delta >= 1e-4");
  const Mat rho = family.builder(p);
  DensityMatrix dm(rho);
  auto [dphi, ddelta] = detail::fd_derivatives(family, p);
  // hermitize FD rounding noise before the SLD solve
  dphi = 0.5 * (dphi + dphi.adjoint());
  ddelta = 0.5 * (ddelta + ddelta.adjoint());
  SldResult l1 = solve_sld(dm, dphi);
  SldResult l2 = solve_sld(dm, ddelta);
  InfoMatrices out;
  out.sld_support_truncated = l1.support_truncated || l2.support_truncated;
  const Mat* L[2] = {&l1.L, &l2.L};
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k)
      out.omega(j, k) = (*L[j] * *L[k] * rho).trace();
  out.qfim = out.omega.real();
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) {
      Complex comm = (rho * (*L[j] * *L[k] - *L[k] * *L[j])).trace();
      out.uhlmann(j, k) = (Complex(0.0, 1.0) * comm).real() / 4.0;
    }
  return out;
}

inline InfoMatrices info_matrices(const StateFamily& family, const Povm& povm,
                                  const ParamPoint& p) {
  InfoMatrices out = qfim(family, p);
  out.fim = classical_fim(family, povm, p);
  return out;
}

/// Max |U_jk|; zero means the quantum Cramer-Rao bound is asymptotically
/// attainable (weak commutativity).
inline double weak_commutativity(const InfoMatrices& info) {
  return info.uhlmann.cwiseAbs().maxCoeff();
}

/// Tr(Q^{-1} F).
inline double figure_of_merit(const Mat2d& fim, const Mat2d& qfim) {
  if (qfim(0, 0) < 1e-12 || qfim(1, 1) < 1e-12)
    throw SingularQfimError("figure_of_merit: QFIM diagonal entry ~ 0");
  return (qfim.inverse() * fim).trace();
}

/// Single-copy equatorial QFIM, diag(e^{-2 delta^2}, 4 delta^2/(e^{2 delta^2}-1)).
inline Mat2d qfim_analytic(double delta) {
  Mat2d q = Mat2d::Zero();
  const double d2 = delta * delta;
  q(0, 0) = std::exp(-2.0 * d2);
  q(1, 1) = 4.0 * d2 / std::expm1(2.0 * d2);
  return q;
}

/// Two-copy QFIM is additive: 2x the single-copy one.
inline Mat2d qfim2_analytic(double delta) { return 2.0 * qfim_analytic(delta); }

/// Closed-form FIM of the Bell measurement on the two-copy equatorial state.
inline Mat2d bell_fim_analytic(const ParamPoint& p) {
  const double d2 = p.delta * p.delta;
  const double c4 = std::cos(4.0 * p.phi);
  const double s2 = std::sin(2.0 * p.phi);
  const double c2 = std::cos(2.0 * p.phi);
  const double e4 = std::exp(4.0 * d2);
  const double denom = 1.0 - 2.0 * e4 + c4;  // < 0 for delta > 0
  Mat2d f;
  f(0, 0) = -4.0 * s2 * s2 / denom;
  f(0, 1) = -4.0 * p.delta * std::sin(4.0 * p.phi) / denom;
  f(1, 0) = f(0, 1);
  f(1, 1) = 4.0 * d2 * (-4.0 * c2 * c2 + e4 * (3.0 + c4)) /
            ((e4 - 1.0) * (e4 - c2 * c2));
  return f;
}

/// Closed-form figure of merit of the Bell measurement on two copies,
/// 1/(1+e^{2 delta^2}) + (1 - 2 e^{2 delta^2} + cos 4 phi)
///                     / (1 - 2 e^{4 delta^2} + cos 4 phi).
/// The first summand is the delta-ratio F_dd/Q_dd and the phi-dependent
/// second summand is the phi-ratio F_pp/Q_pp (verified numerically; see
/// bell_ratio_analytic).
inline double bell_merit_analytic(const ParamPoint& p) {
  if (p.delta <= 0.0)
    throw std::invalid_argument("bell_merit_analytic: requires delta > 0");
  const double d2 = p.delta * p.delta;
  const double c4 = std::cos(4.0 * p.phi);
  const double term_delta = 1.0 / (1.0 + std::exp(2.0 * d2));
  const double term_phi = (1.0 - 2.0 * std::exp(2.0 * d2) + c4) /
                          (1.0 - 2.0 * std::exp(4.0 * d2) + c4);
  return term_delta + term_phi;
}

/// (gamma_phi, gamma_delta) = (F_pp/Q2_pp, F_dd/Q2_dd) for the Bell
/// measurement, from the closed forms.
inline std::pair<double, double> bell_ratio_analytic(const ParamPoint& p) {
  Mat2d f = bell_fim_analytic(p);
  Mat2d q2 = qfim2_analytic(p.delta);
  return {f(0, 0) / q2(0, 0), f(1, 1) / q2(1, 1)};
}

}  // namespace qmet
