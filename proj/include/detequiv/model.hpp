#pragma once

// Information-plus-noise models Sigma = Y + A with Y_ij = sigma_ij X_ij / sqrt(n).

#include <cmath>
#include <complex>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "detequiv/error.hpp"
#include "detequiv/numerics.hpp"

namespace detequiv {

/// Real models use the transpose, complex models the conjugate transpose.
enum class ScalarField { real, complex };

/// How a model was constructed. Only informational, except that the
/// companion identity is asserted for `dx` models.
enum class ModelKind { explicit_, separable, gaussian_field, block_example, dx };

inline std::string_view to_string(ScalarField f) { return f == ScalarField::real ? "real" : "complex"; }

inline CMatrix field_adjoint(const CMatrix& a, ScalarField field) {
  return field == ScalarField::real ? CMatrix(a.transpose()) : CMatrix(a.adjoint());
}

struct SeparableFactors {
  RVector d;        // N
  RVector d_tilde;  // n
};

struct VarianceProfile {
  RMatrix sigma;    // N x n, entries >= 0
  RMatrix sigma2;   // cached elementwise square
  double sigma_max = 0.0;
  std::optional<SeparableFactors> separable;
};

struct CenteringMatrix {
  CMatrix a;
  double a_max = 0.0;  // max over column and row Euclidean norms
};

/// Immutable model description with cached bounds.
class ModelSpec {
 public:
  ModelSpec(VarianceProfile profile, CenteringMatrix centering, ScalarField field,
            ModelKind kind = ModelKind::explicit_)
      : profile_(std::move(profile)), centering_(std::move(centering)), field_(field), kind_(kind) {
    N_ = profile_.sigma.rows();
    n_ = profile_.sigma.cols();
    c_ = static_cast<double>(N_) / static_cast<double>(n_);
    d_n_ = std::max(c_, 1.0 / c_);
  }

  Eigen::Index N() const { return N_; }
  Eigen::Index n() const { return n_; }
  double c() const { return c_; }
  double d_n() const { return d_n_; }
  const VarianceProfile& profile() const { return profile_; }
  const CenteringMatrix& centering() const { return centering_; }
  const CMatrix& A() const { return centering_.a; }
  const RMatrix& sigma2() const { return profile_.sigma2; }
  double sigma_max() const { return profile_.sigma_max; }
  double a_max() const { return centering_.a_max; }
  ScalarField field() const { return field_; }
  ModelKind kind() const { return kind_; }
  bool is_separable() const { return profile_.separable.has_value(); }
  bool centering_is_zero() const { return centering_.a_max == 0.0; }

  /// sigma_max^2 + a_max^2 + 1, the natural spectral scale of the model.
  double scale() const { return sigma_max() * sigma_max() + a_max() * a_max() + 1.0; }

  CMatrix A_adjoint() const { return field_adjoint(centering_.a, field_); }

 private:
  VarianceProfile profile_;
  CenteringMatrix centering_;
  ScalarField field_;
  ModelKind kind_;
  Eigen::Index N_ = 0;
  Eigen::Index n_ = 0;
  double c_ = 0.0;
  double d_n_ = 1.0;
};

namespace detail {

inline VarianceProfile make_profile(const RMatrix& sigma) {
  if (sigma.rows() == 0 || sigma.cols() == 0)
    throw Error(Errc::DimensionMismatch, "profile must have positive dimensions");
  for (Eigen::Index j = 0; j < sigma.cols(); ++j)
    for (Eigen::Index i = 0; i < sigma.rows(); ++i) {
      const double s = sigma(i, j);
      if (!std::isfinite(s)) throw Error(Errc::InvalidEntry, "non-finite variance profile entry");
      if (s < 0.0) throw Error(Errc::InvalidEntry, "negative variance profile entry");
    }
  VarianceProfile p;
  p.sigma = sigma;
  p.sigma2 = sigma.cwiseProduct(sigma);
  p.sigma_max = sigma.maxCoeff();
  return p;
}

inline CenteringMatrix make_centering(const CMatrix& a, ScalarField field) {
  if (!all_finite(a)) throw Error(Errc::InvalidEntry, "non-finite centering entry");
  if (field == ScalarField::real && a.size() > 0 && a.imag().cwiseAbs().maxCoeff() != 0.0)
    throw Error(Errc::InvalidEntry, "complex centering entry in a real-field model");
  CenteringMatrix c;
  c.a = a;
  double amax = 0.0;
  if (a.size() > 0) {
    amax = std::max(a.colwise().norm().maxCoeff(), a.rowwise().norm().maxCoeff());
  }
  c.a_max = amax;
  return c;
}

}  // namespace detail

/// Validates and packages a variance profile and centering matrix.
inline ModelSpec build_model(const RMatrix& profile, const CMatrix& a, ScalarField field,
                             ModelKind kind = ModelKind::explicit_) {
  if (profile.rows() != a.rows() || profile.cols() != a.cols())
    throw Error(Errc::DimensionMismatch, "profile is " + std::to_string(profile.rows()) + "x" +
                                             std::to_string(profile.cols()) + " but A is " +
                                             std::to_string(a.rows()) + "x" +
                                             std::to_string(a.cols()));
  return ModelSpec(detail::make_profile(profile), detail::make_centering(a, field), field, kind);
}

inline ModelSpec build_model(const RMatrix& profile, const RMatrix& a, ScalarField field) {
  return build_model(profile, CMatrix(a.cast<Complex>()), field);
}

/// sigma_ij^2 = d_i * d_tilde_j; the factors are kept for the two-equation solver.
inline ModelSpec separable_model(const RVector& d, const RVector& d_tilde, const CMatrix& a,
                                 ScalarField field) {
  for (const RVector* v : {&d, &d_tilde})
    for (Eigen::Index k = 0; k < v->size(); ++k) {
      if (!std::isfinite((*v)(k))) throw Error(Errc::InvalidEntry, "non-finite separable factor");
      if ((*v)(k) < 0.0) throw Error(Errc::InvalidEntry, "negative separable factor");
    }
  if (a.rows() != d.size() || a.cols() != d_tilde.size())
    throw Error(Errc::DimensionMismatch, "A does not match the separable factor lengths");
  RMatrix sigma(d.size(), d_tilde.size());
  for (Eigen::Index j = 0; j < d_tilde.size(); ++j)
    for (Eigen::Index i = 0; i < d.size(); ++i) sigma(i, j) = std::sqrt(d(i) * d_tilde(j));
  auto profile = detail::make_profile(sigma);
  profile.sigma2 = d * d_tilde.transpose();
  profile.separable = SeparableFactors{d, d_tilde};
  return ModelSpec(std::move(profile), detail::make_centering(a, field), field,
                   ModelKind::separable);
}

/// Unitary p x p Fourier matrix, F_jk = exp(2 pi i j k / p) / sqrt(p).
inline CMatrix fourier_matrix(Eigen::Index p) {
  CMatrix f(p, p);
  const double norm = 1.0 / std::sqrt(static_cast<double>(p));
  for (Eigen::Index j = 0; j < p; ++j)
    for (Eigen::Index k = 0; k < p; ++k) {
      // reduce j*k mod p first so the phase stays accurate for large p
      const auto r = static_cast<double>((j * k) % p);
      const double phase = 2.0 * std::numbers::pi * r / static_cast<double>(p);
      f(j, k) = norm * Complex(std::cos(phase), std::sin(phase));
    }
  return f;
}

using FieldTaps = std::map<std::pair<int, int>, Complex>;

/// Symbol Phi(t1, t2) = sum h(l1, l2) exp(2 pi i (l1 t1 - l2 t2)).
inline Complex field_symbol(const FieldTaps& h, double t1, double t2) {
  Complex acc = 0.0;
  for (const auto& [lag, value] : h) {
    const double phase = 2.0 * std::numbers::pi *
                         (static_cast<double>(lag.first) * t1 - static_cast<double>(lag.second) * t2);
    acc += value * Complex(std::cos(phase), std::sin(phase));
  }
  return acc;
}

/// Stationary Gaussian field model: sigma_ij = |Phi(i/N, j/n)| and
/// A = F_N B F_n^*, complex field.
inline ModelSpec gaussian_field_model(const FieldTaps& h, const CMatrix& b, Eigen::Index N,
                                      Eigen::Index n) {
  if (N <= 0 || n <= 0) throw Error(Errc::DimensionMismatch, "dimensions must be positive");
  if (b.rows() != N || b.cols() != n)
    throw Error(Errc::DimensionMismatch, "B must be N x n");
  for (const auto& [lag, value] : h)
    if (!std::isfinite(std::abs(value))) throw Error(Errc::InvalidEntry, "non-finite tap");
  RMatrix sigma(N, n);
  for (Eigen::Index i = 0; i < N; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      sigma(i, j) = std::abs(field_symbol(h, static_cast<double>(i + 1) / static_cast<double>(N),
                                          static_cast<double>(j + 1) / static_cast<double>(n)));
  const CMatrix a = fourier_matrix(N) * b * fourier_matrix(n).adjoint();
  return build_model(sigma, a, ScalarField::complex, ModelKind::gaussian_field);
}

enum class BlockVariant { upsilon, upsilon_tilde };

/// 2n x 2n model: noise only on the top-left n x n block, identity
/// centering on the top-left (upsilon) or bottom-right (upsilon_tilde) block.
/// The active block uses sigma = sqrt(2) so that the global 1/sqrt(2n)
/// scaling gives entries X_ij / sqrt(n).
inline ModelSpec block_example_model(Eigen::Index n, BlockVariant variant) {
  if (n < 1) throw Error(Errc::InvalidArgument, "block size must be >= 1");
  const Eigen::Index m = 2 * n;
  RMatrix sigma = RMatrix::Zero(m, m);
  sigma.topLeftCorner(n, n).setConstant(std::sqrt(2.0));
  CMatrix a = CMatrix::Zero(m, m);
  if (variant == BlockVariant::upsilon)
    a.topLeftCorner(n, n).setIdentity();
  else
    a.bottomRightCorner(n, n).setIdentity();
  return build_model(sigma, a, ScalarField::real, ModelKind::block_example);
}

/// Y = Delta X / sqrt(n): row i of the profile is constant |lambda_i|, A = 0.
inline ModelSpec dx_model(const RVector& lambdas, Eigen::Index n) {
  if (lambdas.size() == 0 || n <= 0) throw Error(Errc::DimensionMismatch, "empty dimensions");
  RMatrix sigma(lambdas.size(), n);
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    if (!std::isfinite(lambdas(i))) throw Error(Errc::InvalidEntry, "non-finite lambda");
    sigma.row(i).setConstant(std::abs(lambdas(i)));
  }
  return build_model(sigma, CMatrix::Zero(lambdas.size(), n), ScalarField::real, ModelKind::dx);
}

}  // namespace detequiv
