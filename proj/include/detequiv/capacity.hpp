#pragma once

// Deterministic approximant of the mutual information
//   C(sigma2) = (1/N) E log det(I + Sigma Sigma^* / sigma2)
// in nats, by closed form at z = -sigma2 and by quadrature over
// gamma in [0, 1/sigma2].

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "detequiv/error.hpp"
#include "detequiv/matrix_io.hpp"
#include "detequiv/model.hpp"
#include "detequiv/numerics.hpp"
#include "detequiv/solver.hpp"
#include "detequiv/spectral.hpp"

namespace detequiv {

enum class CapacityMethod { closed_form, quadrature };

inline std::string_view to_string(CapacityMethod m) {
  return m == CapacityMethod::closed_form ? "closed_form" : "quadrature";
}

struct CapacityReport {
  double sigma2 = 0.0;
  double value = 0.0;
  double term_logdet_main = 0.0;
  double term_logdet_tilde = 0.0;
  double term_correction = 0.0;
  CapacityMethod method = CapacityMethod::closed_form;
};

namespace detail {

inline void check_sigma2(double sigma2) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw Error(Errc::InvalidArgument, "noise variance sigma2 must be finite and > 0");
}

inline CapacityReport closed_form_terms(const ModelSpec& model, double sigma2,
                                        const EquivalentSolution& s) {
  const auto N = static_cast<double>(model.N());
  const auto n = static_cast<double>(model.n());
  CapacityReport r;
  r.sigma2 = sigma2;
  r.method = CapacityMethod::closed_form;

  // Psi^-1 / sigma2 + A Psitilde A^*
  CMatrix main = model.A() * s.psi_tilde.asDiagonal() * model.A_adjoint();
  main.diagonal() += s.psi.cwiseInverse() / sigma2;
  r.term_logdet_main = log_det_hpd(HermitianMatrix(std::move(main))) / N;

  double tilde = 0.0;
  for (Eigen::Index j = 0; j < s.psi_tilde.size(); ++j) {
    const double p = s.psi_tilde(j).real();
    if (!(p > 0.0)) throw Error(Errc::NotPositiveDefinite, "psi_tilde not positive at z = -sigma2");
    tilde -= std::log(sigma2 * p);
  }
  r.term_logdet_tilde = tilde / N;

  const RVector t = s.T.diagonal().real();
  const RVector tt = s.T_tilde.diagonal().real();
  r.term_correction = -sigma2 / (n * N) * t.dot(model.sigma2() * tt);

  r.value = r.term_logdet_main + r.term_logdet_tilde + r.term_correction;
  return r;
}

/// J(gamma) at z = -1/gamma written as (z^2/N) Tr[T (diag(r) + A Psitilde A^*)],
/// r_i = (1/n) sum_j sigma_ij^2 Ttilde_jj. Same value as
/// (1/gamma)(1 - (1/gamma) m(-1/gamma)) without the cancellation at small gamma.
inline double integrand_from_solution(const ModelSpec& model, const EquivalentSolution& s) {
  const Complex z = s.z;
  const double inv_n = 1.0 / static_cast<double>(model.n());
  const CVector r = model.sigma2().cast<Complex>() * s.T_tilde.diagonal() * inv_n;
  Complex tr = (s.T.diagonal().array() * r.array()).sum();
  if (!model.centering_is_zero()) {
    const CMatrix ta = s.T * model.A();
    const CMatrix pa = s.psi_tilde.asDiagonal() * model.A_adjoint();
    tr += (ta.array() * pa.transpose().array()).sum();
  }
  return (z * z * tr).real() / static_cast<double>(model.N());
}

}  // namespace detail

/// Closed form at each sigma2, solving along the list with warm starts.
inline std::vector<CapacityReport> capacity_closed_form(const ModelSpec& model,
                                                        const std::vector<double>& sigma2_list,
                                                        const SolverConfig& config = {}) {
  std::vector<Complex> targets;
  for (const double s2 : sigma2_list) {
    detail::check_sigma2(s2);
    targets.emplace_back(-s2, 0.0);
  }
  const auto sols = solve_path(model, targets, config);
  std::vector<CapacityReport> out;
  out.reserve(sols.size());
  for (std::size_t k = 0; k < sols.size(); ++k)
    out.push_back(detail::closed_form_terms(model, sigma2_list[k], sols[k]));
  return out;
}

/// Integrand of the gamma representation; at gamma = 0 it is the first moment.
inline double capacity_integrand(const ModelSpec& model, double gamma,
                                 const SolverConfig& config = {},
                                 const std::optional<PsiPair>& start = std::nullopt) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error(Errc::InvalidArgument, "gamma must be >= 0");
  if (gamma == 0.0) return first_moment(model);
  return detail::integrand_from_solution(model, solve(model, Complex(-1.0 / gamma, 0.0), config, start));
}

/// Adaptive Gauss-Kronrod (7/15) over [0, 1/sigma2]; each node warm-starts
/// from the previously evaluated one. Tolerances under 1e-10 relative sit
/// below the solver noise and are raised to 1e-10.
inline CapacityReport capacity_quadrature(const ModelSpec& model, double sigma2, double quad_tol,
                                          const SolverConfig& config = {}) {
  detail::check_sigma2(sigma2);
  if (!(quad_tol > 0.0)) throw Error(Errc::InvalidArgument, "quad_tol must be > 0");
  config.validate();
  const double tol = std::max(quad_tol, 1e-10);
  std::optional<PsiPair> last;
  auto f = [&model, &config, &last](double gamma) -> double {
    if (gamma <= 0.0) return first_moment(model);
    const auto s = solve(model, Complex(-1.0 / gamma, 0.0), config, last);
    last = s.guess();
    return detail::integrand_from_solution(model, s);
  };
  constexpr unsigned kMaxDepth = 15;
  double error = 0.0;
  double l1 = 0.0;
  const double value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, 0.0, 1.0 / sigma2, kMaxDepth, tol, &error, &l1);
  if (!std::isfinite(value) || (error > tol * l1 && error > 1e-14))
    throw Error(Errc::QuadratureFailure, "quadrature error estimate " + format_real(error) +
                                             " above tolerance after depth " +
                                             std::to_string(kMaxDepth));
  CapacityReport r;
  r.sigma2 = sigma2;
  r.value = value;
  r.method = CapacityMethod::quadrature;
  return r;
}

inline std::string render_capacity_csv(const std::vector<CapacityReport>& reports) {
  std::string out = "sigma2,value,term1,term2,term3,method\n";
  for (const auto& r : reports) {
    out += format_real(r.sigma2) + "," + format_real(r.value) + ",";
    if (r.method == CapacityMethod::closed_form)
      out += format_real(r.term_logdet_main) + "," + format_real(r.term_logdet_tilde) + "," +
             format_real(r.term_correction);
    else
      out += ",,";
    out += "," + std::string(to_string(r.method)) + "\n";
  }
  return out;
}

}  // namespace detequiv
