#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include <json.hpp>

#include "qmet/information.hpp"
#include "qmet/linalg.hpp"
#include "qmet/measurement.hpp"
#include "qmet/rng.hpp"

namespace qmet {

/// POVM as a stacked block matrix S = [A_1; ...; A_k] (each A_k is r x d)
/// with orthonormal columns, so Pi_k = A_k^dag A_k is automatically a POVM.
struct PovmParametrization {
  int k_outcomes = 4;
  int rank = 1;
  Mat stack;  // (k_outcomes * rank) x d

  Eigen::Index dim() const { return stack.cols(); }

  std::vector<Mat> elements() const {
    std::vector<Mat> out;
    out.reserve(k_outcomes);
    for (int k = 0; k < k_outcomes; ++k) {
      Mat a = stack.middleRows(k * rank, rank);
      out.push_back(a.adjoint() * a);
    }
    return out;
  }

  Povm povm() const { return Povm(elements()); }
};

/// Projection back onto the orthonormal-column manifold (polar retraction).
inline Mat retract_orthonormal(const Mat& stack) {
  Eigen::JacobiSVD<Mat> svd(stack, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

struct OptimizationTrace {
  std::vector<std::pair<double, double>> iterations;  // (objective, grad norm)
  std::vector<Mat> final_povm;
  double final_objective = 0.0;
  int restarts_used = 0;
};

namespace detail {

/// States of the two-copy equatorial family at the five finite-difference
/// probe points (center, phi+-h, delta+-h); fixed per parameter point.
struct ObjectiveContext {
  std::array<Mat, 5> states;
  Mat2d q2;
  double h = 1e-5;

  explicit ObjectiveContext(const ParamPoint& p, double step = 1e-5) : h(step) {
    auto build = [](const ParamPoint& q) {
      Mat m = diffused_qubit(QubitPrep(M_PI / 2.0), q).mat();
      return kron(m, m);
    };
    states[0] = build(p);
    states[1] = build({p.phi + h, p.delta});
    states[2] = build({p.phi - h, p.delta});
    states[3] = build({p.phi, p.delta + h});
    states[4] = build({p.phi, p.delta - h});
    q2 = qfim2_analytic(p.delta);
  }

  double eval(const std::vector<Mat>& elements) const {
    Mat2d fim = Mat2d::Zero();
    for (const auto& e : elements) {
      std::array<double, 5> pk{};
      for (int s = 0; s < 5; ++s) pk[s] = (states[s] * e).trace().real();
      const double d1 = (pk[1] - pk[2]) / (2.0 * h);
      const double d2 = (pk[3] - pk[4]) / (2.0 * h);
      if (pk[0] < 1e-12) {
        if (std::abs(d1) > 1e-8 || std::abs(d2) > 1e-8)
          throw DegenerateOutcomeError(
              "objective: vanishing probability with nonzero derivative");
        continue;
      }
      fim(0, 0) += d1 * d1 / pk[0];
      fim(0, 1) += d1 * d2 / pk[0];
      fim(1, 1) += d2 * d2 / pk[0];
    }
    fim(1, 0) = fim(0, 1);
    return (q2.inverse() * fim).trace();
  }
};

inline Mat haar_stack(SplitMix64& g, int rows, int cols) {
  Mat m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = Complex(normal(g), normal(g));
  return retract_orthonormal(m);
}

/// Bell projectors written as a rank-one stack, optionally perturbed.
inline Mat bell_stack(SplitMix64& g, double noise) {
  auto basis = bell_basis();
  Mat s(4, 4);
  for (int k = 0; k < 4; ++k) s.row(k) = basis[k].adjoint();
  if (noise > 0.0)
    for (Eigen::Index i = 0; i < s.rows(); ++i)
      for (Eigen::Index j = 0; j < s.cols(); ++j)
        s(i, j) += Complex(normal(g, 0.0, noise), normal(g, 0.0, noise));
  return retract_orthonormal(s);
}

}  // namespace detail

/// Tr(Q2^{-1} F2) for a POVM on the two-copy equatorial state at p.
inline double objective(const Povm& povm, const ParamPoint& p) {
  if (povm.dim() != 4)
    throw std::invalid_argument("objective: POVM must act on dim 4");
  detail::ObjectiveContext ctx(p);
  return ctx.eval(povm.elements());
}

/// Gradient ascent on the orthonormal-stack manifold: finite-difference
/// gradient in the block entries, polar retraction after every step,
/// backtracking line search. Restarts alternate between noise-perturbed Bell
/// stacks and Haar-random ones; the best restart wins (ties by index).
inline OptimizationTrace optimize_povm(const ParamPoint& p, int k_outcomes,
                                       int restarts, std::uint64_t seed,
                                       int rank = 1, int max_iters = 2000) {
  if (k_outcomes < 3)
    throw std::invalid_argument("optimize_povm: need >= 3 outcomes");
  if (restarts < 1) throw std::invalid_argument("optimize_povm: restarts < 1");
  const int d = 4;
  if (k_outcomes * rank < d)
    throw std::invalid_argument("optimize_povm: k * rank < dim, POVM cannot be complete");
  const detail::ObjectiveContext ctx(p);
  const double grad_step = 1e-6;
  const double grad_tol = 1e-7;

  auto eval_stack = [&](const Mat& stack) {
    PovmParametrization param{k_outcomes, rank, stack};
    return ctx.eval(param.elements());
  };

  OptimizationTrace best;
  bool have_best = false;
  bool any_improved = false;
  for (int r = 0; r < restarts; ++r) {
    SplitMix64 g(SplitMix64::split(seed, r));
    Mat stack = (r % 2 == 0 && k_outcomes == 4 && rank == 1)
                    ? detail::bell_stack(g, r == 0 ? 0.0 : 0.2)
                    : detail::haar_stack(g, k_outcomes * rank, d);
    double value = eval_stack(stack);
    const double start_value = value;
    OptimizationTrace trace;
    double step = 0.1;
    for (int it = 0; it < max_iters; ++it) {
      // numerical Euclidean gradient over re/im of every stack entry
      Mat grad = Mat::Zero(stack.rows(), stack.cols());
      for (Eigen::Index i = 0; i < stack.rows(); ++i)
        for (Eigen::Index j = 0; j < stack.cols(); ++j)
          for (int part = 0; part < 2; ++part) {
            const Complex dz = part == 0 ? Complex(grad_step, 0.0)
                                         : Complex(0.0, grad_step);
            Mat sp = stack, sm = stack;
            sp(i, j) += dz;
            sm(i, j) -= dz;
            const double dv =
                (ctx.eval(PovmParametrization{k_outcomes, rank, sp}.elements()) -
                 ctx.eval(PovmParametrization{k_outcomes, rank, sm}.elements())) /
                (2.0 * grad_step);
            grad(i, j) += part == 0 ? Complex(dv, 0.0) : Complex(0.0, dv);
          }
      const double gnorm = grad.norm();
      trace.iterations.emplace_back(value, gnorm);
      if (gnorm < grad_tol) break;
      bool accepted = false;
      for (double a = step * 2.0; a > 1e-12; a *= 0.5) {
        Mat candidate = retract_orthonormal(stack + a * grad);
        const double v = eval_stack(candidate);
        if (v > value) {
          stack = std::move(candidate);
          value = v;
          step = a;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;
    }
    if (value > start_value) any_improved = true;
    if (!have_best || value > best.final_objective) {
      best.iterations = std::move(trace.iterations);
      best.final_objective = value;
      best.final_povm = PovmParametrization{k_outcomes, rank, stack}.elements();
      have_best = true;
    }
    best.restarts_used = r + 1;
  }
  if (!any_improved)
    throw NoImprovementError("optimize_povm: no restart improved on its start");
  return best;
}

/// Structure report of a POVM: per-element rank, pairwise overlaps
/// Tr(Pi_m Pi_n), and whether all elements are projectors.
struct PovmReport {
  std::vector<int> ranks;
  Eigen::MatrixXd overlaps;
  bool projective = false;
};

/// rank_tol is the eigenvalue cutoff for the rank count; loosen it (~1e-2)
/// for POVMs reconstructed from a few printed decimals.
inline PovmReport analyze_povm(const Povm& povm, double rank_tol = 1e-8) {
  PovmReport rep;
  const auto& el = povm.elements();
  rep.overlaps.resize(el.size(), el.size());
  rep.projective = true;
  for (std::size_t m = 0; m < el.size(); ++m) {
    Eigen::SelfAdjointEigenSolver<Mat> es(el[m], Eigen::EigenvaluesOnly);
    int rank = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
      if (es.eigenvalues()(i) > rank_tol) ++rank;
    rep.ranks.push_back(rank);
    if (max_abs(el[m] * el[m] - el[m]) > 1e-8) rep.projective = false;
    for (std::size_t n = 0; n < el.size(); ++n)
      rep.overlaps(m, n) = (el[m] * el[n]).trace().real();
  }
  return rep;
}

inline nlohmann::json povm_to_json(const std::vector<Mat>& elements) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& e : elements) j.push_back(matrix_to_json(e));
  return j;
}

inline std::vector<Mat> povm_elements_from_json(const nlohmann::json& j) {
  std::vector<Mat> out;
  for (const auto& m : j) out.push_back(matrix_from_json(m));
  return out;
}

}  // namespace qmet
