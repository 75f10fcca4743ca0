#pragma once

// Dense complex linear-algebra kernels shared by the solver and the
// Monte Carlo harness. Everything is double precision; logs are natural.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "detequiv/error.hpp"

namespace detequiv {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr double kPivotThreshold = 1e-14;
inline constexpr double kHermitianTolerance = 1e-12;

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i)
      if (!std::isfinite(std::abs(m(i, j)))) return false;
  return true;
}

/// Square matrix equal to its conjugate transpose within a relative
/// tolerance of 1e-12 on the max-norm. Stored exactly symmetrized.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(CMatrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols())
      throw Error(Errc::DimensionMismatch, "Hermitian matrix must be square");
    if (m_.rows() == 0)
      throw Error(Errc::DimensionMismatch, "Hermitian matrix must be nonempty");
    if (!all_finite(m_)) throw Error(Errc::InvalidEntry, "non-finite entry");
    const double scale = std::max(1.0, max_abs(m_));
    const double skew = max_abs(CMatrix(m_ - m_.adjoint()));
    if (skew > kHermitianTolerance * scale)
      throw Error(Errc::InvalidArgument,
                  "matrix is not Hermitian (skew " + std::to_string(skew) + ")");
    m_ = (0.5 * (m_ + m_.adjoint())).eval();
  }

  /// Builds M M^* (or M^* M when `left` is false); Hermitian by construction.
  static HermitianMatrix gram(const CMatrix& m, bool left = true) {
    CMatrix g = left ? CMatrix(m * m.adjoint()) : CMatrix(m.adjoint() * m);
    return HermitianMatrix(std::move(g));
  }

  Eigen::Index order() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }

 private:
  CMatrix m_;
};

/// Solves M X = B by partial-pivot LU. A pivot below 1e-14 * max|M_ij|
/// is reported as singular rather than propagated as inf/nan.
template <typename DerivedM, typename DerivedB>
auto linear_solve(const Eigen::MatrixBase<DerivedM>& m, const Eigen::MatrixBase<DerivedB>& b) {
  using Scalar = typename DerivedM::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  if (m.rows() != m.cols()) throw Error(Errc::DimensionMismatch, "linear_solve: M not square");
  if (b.rows() != m.rows()) throw Error(Errc::DimensionMismatch, "linear_solve: B not conformal");
  const double scale = max_abs(m);
  Eigen::PartialPivLU<Matrix> lu(m);
  const auto pivots = lu.matrixLU().diagonal().cwiseAbs();
  if (m.rows() > 0 && !(pivots.minCoeff() >= kPivotThreshold * scale && scale > 0.0))
    throw Error(Errc::SingularMatrix, "pivot below threshold");
  return Matrix(lu.solve(Matrix(b)));
}

/// Inverse through linear_solve; same singularity contract.
template <typename Derived>
auto checked_inverse(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  return linear_solve(m, Matrix::Identity(m.rows(), m.cols()));
}

/// Natural log-determinant of a Hermitian positive definite matrix
/// via Cholesky: log det H = 2 sum log L_kk.
inline double log_det_hpd(const HermitianMatrix& h) {
  Eigen::LLT<CMatrix> llt(h.matrix());
  if (llt.info() != Eigen::Success)
    throw Error(Errc::NotPositiveDefinite, "Cholesky factorization broke down");
  const auto diag = llt.matrixLLT().diagonal();
  double acc = 0.0;
  for (Eigen::Index k = 0; k < diag.size(); ++k) {
    const double lkk = diag(k).real();
    if (!(lkk > 0.0)) throw Error(Errc::NotPositiveDefinite, "nonpositive Cholesky pivot");
    acc += std::log(lkk);
  }
  return 2.0 * acc;
}

struct HermitianEigen {
  RVector values;   // ascending
  CMatrix vectors;  // columns
};

inline HermitianEigen hermitian_eigen(const HermitianMatrix& h, bool with_vectors = true) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(
      h.matrix(), with_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw Error(Errc::ConvergenceFailure, "Hermitian eigensolver did not converge");
  HermitianEigen out;
  out.values = es.eigenvalues();
  if (with_vectors) out.vectors = es.eigenvectors();
  return out;
}

/// Real eigenvalues in ascending order.
inline RVector hermitian_eigenvalues(const HermitianMatrix& h) {
  return hermitian_eigen(h, false).values;
}

/// Exact spectral norm through the eigenvalues of M^* M.
template <typename Derived>
double spectral_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  CMatrix mc = m.template cast<Complex>();
  const bool left = mc.rows() <= mc.cols();
  const RVector ev = hermitian_eigenvalues(HermitianMatrix::gram(mc, left));
  return std::sqrt(std::max(0.0, ev(ev.size() - 1)));
}

/// Largest singular value by power iteration on M^* M. Stops when the
/// Rayleigh quotient changes by less than `tol` relative; throws
/// ConvergenceFailure once `max_iter` sweeps are spent.
template <typename Derived>
double spectral_norm_estimate(const Eigen::MatrixBase<Derived>& m, double tol,
                              int max_iter = 100000) {
  if (!(tol > 0.0)) throw Error(Errc::InvalidArgument, "spectral_norm_estimate: tol must be > 0");
  if (m.size() == 0 || max_abs(m) == 0.0) return 0.0;
  const CMatrix mc = m.template cast<Complex>();
  CVector v(mc.cols());
  // fixed, non-degenerate start vector
  for (Eigen::Index k = 0; k < v.size(); ++k)
    v(k) = Complex(1.0 + 0.5 * std::sin(1.7 * static_cast<double>(k) + 0.3),
                   0.25 * std::cos(0.9 * static_cast<double>(k)));
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iter; ++it) {
    CVector w = mc.adjoint() * (mc * v);
    const double next = v.dot(w).real();
    const double wn = w.norm();
    if (wn == 0.0) return 0.0;
    v = w / wn;
    // relative change of sigma = sqrt(lambda) is half that of lambda
    if (it > 0 && std::abs(next - lambda) <= 2.0 * tol * std::abs(next))
      return std::sqrt(std::max(0.0, next));
    lambda = next;
  }
  throw Error(Errc::ConvergenceFailure, "power iteration hit its iteration cap");
}

/// Smallest eigenvalue of the Hermitian part Im(M) = (M - M^*)/(2i).
inline double min_eig_imag_part(const CMatrix& m) {
  const CMatrix im = (m - m.adjoint()) / Complex(0.0, 2.0);
  const RVector ev = hermitian_eigenvalues(HermitianMatrix(im));
  return ev(0);
}

}  // namespace detequiv
