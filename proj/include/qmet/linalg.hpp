#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "qmet/errors.hpp"

namespace qmet {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using Mat2d = Eigen::Matrix2d;
using Mat2c = Eigen::Matrix2cd;

inline double max_abs(const Mat& m) { return m.cwiseAbs().maxCoeff(); }

inline bool is_hermitian(const Mat& m, double tol = 1e-12) {
  return max_abs(m - m.adjoint()) <= tol;
}

/// Tensor (Kronecker) product; dim = a.dim * b.dim.
inline Mat kron(const Mat& a, const Mat& b) {
  Mat out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Hermitian PSD square root. Eigenvalues in [-1e-8, 0) are clamped to 0;
/// anything below -1e-8 is rejected.
inline Mat mat_sqrt(const Mat& m) {
  if (max_abs(m - m.adjoint()) > 1e-9)
    throw NonHermitianError("mat_sqrt: matrix is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(m);
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < -1e-8)
      throw IndefiniteMatrixError("mat_sqrt: eigenvalue below tolerance");
    if (ev(i) < 0.0) ev(i) = 0.0;
  }
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() *
         es.eigenvectors().adjoint();
}

/// Sum of singular values, Tr|X| with |X| = sqrt(X^dag X).
inline double trace_norm(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues().sum();
}

/// Hermitian, unit-trace, PSD matrix. Validates on construction.
class DensityMatrix {
 public:
  explicit DensityMatrix(Mat m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
      throw std::invalid_argument("DensityMatrix: not square");
    if (!is_hermitian(m_, 1e-12))
      throw NonHermitianError("DensityMatrix: not Hermitian");
    if (std::abs(m_.trace().real() - 1.0) > 1e-12 ||
        std::abs(m_.trace().imag()) > 1e-12)
      throw std::invalid_argument("DensityMatrix: trace != 1");
    Eigen::SelfAdjointEigenSolver<Mat> es(m_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10)
      throw IndefiniteMatrixError("DensityMatrix: negative eigenvalue");
  }

  const Mat& mat() const { return m_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  Mat m_;
};

/// List of PSD matrices summing to identity.
class Povm {
 public:
  explicit Povm(std::vector<Mat> elements, double tol = 1e-10)
      : elements_(std::move(elements)) {
    if (elements_.empty()) throw std::invalid_argument("Povm: no elements");
    const Eigen::Index d = elements_.front().rows();
    Mat sum = Mat::Zero(d, d);
    for (auto& e : elements_) {
      if (e.rows() != d || e.cols() != d)
        throw std::invalid_argument("Povm: mixed dimensions");
      if (!is_hermitian(e, tol))
        throw NonHermitianError("Povm: element not Hermitian");
      Eigen::SelfAdjointEigenSolver<Mat> es(e, Eigen::EigenvaluesOnly);
      if (es.eigenvalues().minCoeff() < -std::max(tol, 1e-10))
        throw IndefiniteMatrixError("Povm: element not PSD");
      sum += e;
    }
    if (max_abs(sum - Mat::Identity(d, d)) > tol)
      throw std::invalid_argument("Povm: elements do not sum to identity");
  }

  /// Loads elements known only to a few printed decimals: hermitizes and
  /// clamps small negative eigenvalues before validating at the given
  /// tolerance.
  static Povm from_approximate(const std::vector<Mat>& elements,
                               double tol = 5e-3) {
    std::vector<Mat> fixed;
    fixed.reserve(elements.size());
    for (const auto& e : elements) {
      Mat h = 0.5 * (e + e.adjoint());
      Eigen::SelfAdjointEigenSolver<Mat> es(h);
      Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0);
      fixed.push_back(es.eigenvectors() * ev.asDiagonal() *
                      es.eigenvectors().adjoint());
    }
    return Povm(std::move(fixed), tol);
  }

  const std::vector<Mat>& elements() const { return elements_; }
  std::size_t size() const { return elements_.size(); }
  Eigen::Index dim() const { return elements_.front().rows(); }

 private:
  std::vector<Mat> elements_;
};

struct SldResult {
  Mat L;
  bool support_truncated = false;  // some 1/(lambda_a+lambda_b) terms zeroed
};

/// Solves (rho L + L rho)/2 = drho in the eigenbasis of rho,
/// L_ab = 2 drho_ab / (lambda_a + lambda_b), with terms outside the support
/// of rho set to zero.
inline SldResult solve_sld(const DensityMatrix& rho, const Mat& drho) {
  if (!is_hermitian(drho, 1e-9))
    throw NonHermitianError("solve_sld: drho not Hermitian");
  Eigen::SelfAdjointEigenSolver<Mat> es(rho.mat());
  const Eigen::VectorXd& lam = es.eigenvalues();
  const Mat& v = es.eigenvectors();
  Mat d = v.adjoint() * drho * v;
  bool truncated = false;
  for (Eigen::Index a = 0; a < d.rows(); ++a) {
    for (Eigen::Index b = 0; b < d.cols(); ++b) {
      double denom = lam(a) + lam(b);
      if (denom < 1e-12) {
        if (std::abs(d(a, b)) > 0.0) truncated = true;
        d(a, b) = 0.0;
      } else {
        d(a, b) *= 2.0 / denom;
      }
    }
  }
  Mat L = v * d * v.adjoint();
  L = 0.5 * (L + L.adjoint());  // remove rounding skew
  return {L, truncated};
}

}  // namespace qmet
