#pragma once

// Stieltjes transforms of the deterministic equivalent, smoothed densities
// by the inversion formula, and the moment / identity checks.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "detequiv/error.hpp"
#include "detequiv/matrix_io.hpp"
#include "detequiv/model.hpp"
#include "detequiv/numerics.hpp"
#include "detequiv/solver.hpp"

namespace detequiv {

struct StieltjesPair {
  Complex m;        // (1/N) Tr T(z)
  Complex m_tilde;  // (1/n) Tr Ttilde(z)
};

inline StieltjesPair equivalent_stieltjes(const ModelSpec& model, Complex z,
                                          const SolverConfig& config = {}) {
  const auto sols = solve_path(model, {z}, config);
  return {sols.front().m(), sols.front().m_tilde()};
}

/// max(1e-3 * scale, 2 * mean grid spacing)
inline double default_eta(const ModelSpec& model, const std::vector<double>& grid) {
  double eta = 1e-3 * model.scale();
  if (grid.size() >= 2) {
    const double spacing = (grid.back() - grid.front()) / static_cast<double>(grid.size() - 1);
    eta = std::max(eta, 2.0 * spacing);
  }
  return eta;
}

struct DensityPoint {
  double lambda = 0.0;
  double density = 0.0;
};

struct IntervalMass {
  double a = 0.0;
  double b = 0.0;
  double mass = 0.0;
};

struct DensityEstimate {
  double eta = 0.0;
  std::vector<DensityPoint> points;
  std::vector<IntervalMass> masses;
};

namespace detail {

inline void check_grid(const std::vector<double>& grid) {
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (!std::isfinite(grid[k]) || grid[k] < 0.0)
      throw Error(Errc::InvalidArgument, "density grid points must be finite and >= 0");
    if (k > 0 && !(grid[k] > grid[k - 1]))
      throw Error(Errc::InvalidArgument, "density grid must be strictly ascending");
  }
}

/// (1/pi) Im m(lambda + i eta) along the horizontal line, warm-started.
inline std::vector<double> line_density(const ModelSpec& model, const std::vector<double>& xs,
                                        double eta, const SolverConfig& config) {
  std::vector<Complex> targets;
  targets.reserve(xs.size());
  for (const double x : xs) targets.emplace_back(x, eta);
  const auto pts = trace_path(model, targets, config);
  std::vector<double> out;
  out.reserve(pts.size());
  for (const auto& p : pts) out.push_back(p.m.imag() / std::numbers::pi);
  return out;
}

}  // namespace detail

/// rho(lambda) = (1/pi) Im m(lambda + i eta). Interval masses integrate the
/// same quantity by the trapezoid rule on a mesh of width min(eta/4, (b-a)/16);
/// they carry the O(eta) smoothing bias of a finite height.
inline DensityEstimate density_estimate(const ModelSpec& model, const std::vector<double>& grid,
                                        std::optional<double> eta, const SolverConfig& config = {},
                                        const std::vector<std::pair<double, double>>& intervals = {}) {
  detail::check_grid(grid);
  DensityEstimate est;
  est.eta = eta.value_or(default_eta(model, grid));
  if (!(est.eta > 0.0) || !std::isfinite(est.eta))
    throw Error(Errc::InvalidArgument, "eta must be finite and > 0");
  const auto rho = detail::line_density(model, grid, est.eta, config);
  est.points.reserve(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) est.points.push_back({grid[k], rho[k]});

  for (const auto& [a, b] : intervals) {
    if (!(b > a) || !std::isfinite(a) || !std::isfinite(b))
      throw Error(Errc::InvalidArgument, "mass interval needs a < b");
    const double h_max = std::min(est.eta / 4.0, (b - a) / 16.0);
    const auto steps = static_cast<std::size_t>(std::ceil((b - a) / h_max));
    const double h = (b - a) / static_cast<double>(steps);
    std::vector<double> xs(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) xs[k] = a + h * static_cast<double>(k);
    xs.back() = b;
    const auto vals = detail::line_density(model, xs, est.eta, config);
    double mass = 0.5 * (vals.front() + vals.back());
    for (std::size_t k = 1; k < steps; ++k) mass += vals[k];
    est.masses.push_back({a, b, mass * h});
  }
  return est;
}

inline std::string render_density_csv(const DensityEstimate& est) {
  std::string out = "lambda,density\n";
  for (const auto& p : est.points) out += format_real(p.lambda) + "," + format_real(p.density) + "\n";
  if (!est.masses.empty()) {
    out += "interval,a,b,mass\n";
    for (const auto& m : est.masses)
      out += "interval," + format_real(m.a) + "," + format_real(m.b) + "," + format_real(m.mass) + "\n";
  }
  return out;
}

struct MomentReport {
  double analytic = 0.0;
  double numeric = 0.0;
  double y_used = 0.0;
  double relative_gap = 0.0;  // absolute gap when analytic == 0
};

/// (1/(Nn)) sum sigma_ij^2 + (1/N) Tr A A^*
inline double first_moment(const ModelSpec& model) {
  const auto N = static_cast<double>(model.N());
  const auto n = static_cast<double>(model.n());
  return model.sigma2().sum() / (N * n) + model.A().squaredNorm() / N;
}

/// Compares the first moment with Re[-iy (iy m(iy) + 1)] at large y.
inline MomentReport moment_consistency(const ModelSpec& model, double y,
                                       const SolverConfig& config = {}) {
  if (!(y > 0.0) || !std::isfinite(y)) throw Error(Errc::InvalidArgument, "y must be > 0");
  MomentReport r;
  r.y_used = y;
  r.analytic = first_moment(model);
  const Complex iy(0.0, y);
  const Complex m = solve(model, iy, config).m();
  r.numeric = (-iy * (iy * m + 1.0)).real();
  const double gap = std::abs(r.numeric - r.analytic);
  r.relative_gap = r.analytic > 0.0 ? gap / r.analytic : gap;
  return r;
}

/// Marchenko-Pastur Stieltjes transform for ratio c: root of
/// c z f^2 - (1 - c - z) f + 1 = 0 on the Herglotz branch.
inline Complex mp_reference_stieltjes(double c, Complex z) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(Errc::InvalidArgument, "ratio c must be > 0");
  check_spectral_point(z);
  if (z.imag() < 0.0) return std::conj(mp_reference_stieltjes(c, std::conj(z)));
  z = Complex(z.real(), std::abs(z.imag()));  // drop a -0.0 imaginary part
  const double rc = std::sqrt(c);
  const double a = (1.0 - rc) * (1.0 - rc);
  const double b = (1.0 + rc) * (1.0 + rc);
  const Complex big_b = 1.0 - c - z;
  const Complex s = std::sqrt(z - a) * std::sqrt(z - b);
  // (B + S)(B - S) = 4cz, so pick whichever side does not cancel
  if (std::abs(big_b + s) >= std::abs(big_b - s)) return (big_b + s) / (2.0 * c * z);
  return 2.0 / (big_b - s);
}

/// |(1/n) sum psitilde - [c (1/N) sum psi + (1 - c)(-1/z)]|
inline double companion_identity_residual(const EquivalentSolution& s, const ModelSpec& model) {
  const Complex lhs = s.psi_tilde.mean();
  const Complex rhs = model.c() * s.psi.mean() + (1.0 - model.c()) * (-1.0 / s.z);
  return std::abs(lhs - rhs);
}

/// Defect of f = (1/N) sum_i 1 / (lambda_i^2 (1 - c - c z f) - z) at f = (1/N) Tr T,
/// for models built by dx_model.
inline double dx_equation_defect(const EquivalentSolution& s, const ModelSpec& model) {
  if (model.kind() != ModelKind::dx)
    throw Error(Errc::InvalidArgument, "equation defect is defined for dx models only");
  const Complex f = s.m();
  const Complex z = s.z;
  const double c = model.c();
  Complex acc = 0.0;
  for (Eigen::Index i = 0; i < model.N(); ++i) {
    const double l2 = model.sigma2()(i, 0);
    acc += 1.0 / (l2 * (1.0 - c - c * z * f) - z);
  }
  return std::abs(f - acc / static_cast<double>(model.N()));
}

/// || T A Psitilde - Psi A Ttilde ||_F
inline double lemma_identity_residual(const EquivalentSolution& s, const ModelSpec& model) {
  const CMatrix lhs = s.T * model.A() * s.psi_tilde.asDiagonal();
  const CMatrix rhs = s.psi.asDiagonal() * model.A() * s.T_tilde;
  return (lhs - rhs).norm();
}

}  // namespace detequiv
