#pragma once

// Fixed-point solver for the N + n deterministic equations
//
//   psi_i       = -1 / (z (1 + (1/n) sum_j sigma_ij^2 Ttilde_jj))
//   psitilde_j  = -1 / (z (1 + (1/n) sum_i sigma_ij^2 T_ii))
//   T      = (Psi^-1      - z A Psitilde A^*)^-1
//   Ttilde = (Psitilde^-1 - z A^* Psi A)^-1
//
// started from psi = psitilde = -1/z, with damping and continuation in
// Im z as fallbacks.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>
#include <utility>
#include <vector>

#include "detequiv/error.hpp"
#include "detequiv/model.hpp"
#include "detequiv/numerics.hpp"

namespace detequiv {

struct SolverConfig {
  double tol = 1e-12;
  int max_iter = 10000;
  double damping = 0.0;
  /// History length of the Anderson-accelerated first attempt; 0 disables it.
  int anderson_depth = 5;
  /// Imaginary height where continuation starts; defaults to 16 * model.scale().
  std::optional<double> continuation_start_height;

  void validate() const {
    if (!(tol > 0.0)) throw Error(Errc::InvalidArgument, "solver tol must be > 0");
    if (max_iter < 1) throw Error(Errc::InvalidArgument, "solver max_iter must be >= 1");
    if (!(damping >= 0.0 && damping < 1.0))
      throw Error(Errc::InvalidArgument, "solver damping must lie in [0, 1)");
    if (anderson_depth < 0) throw Error(Errc::InvalidArgument, "anderson_depth must be >= 0");
    if (continuation_start_height && !(*continuation_start_height > 0.0))
      throw Error(Errc::InvalidArgument, "continuation start height must be > 0");
  }

  double start_height(const ModelSpec& model) const {
    return continuation_start_height.value_or(16.0 * model.scale());
  }

  bool operator==(const SolverConfig&) const = default;
};

/// Diagonal entries psi (length N) and psi_tilde (length n).
struct PsiPair {
  CVector psi;
  CVector psi_tilde;
};

struct EquivalentSolution {
  Complex z;
  CVector psi;
  CVector psi_tilde;
  CMatrix T;
  CMatrix T_tilde;
  int iterations = 0;
  double residual = 0.0;

  /// (1/N) Tr T(z)
  Complex m() const { return T.trace() / static_cast<double>(T.rows()); }
  /// (1/n) Tr Ttilde(z)
  Complex m_tilde() const { return T_tilde.trace() / static_cast<double>(T_tilde.rows()); }
  PsiPair guess() const { return {psi, psi_tilde}; }
};

inline bool on_positive_axis(Complex z) {
  return std::abs(z.imag()) <= 1e-14 && z.real() >= -1e-14;
}

inline void check_spectral_point(Complex z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw Error(Errc::InvalidSpectralPoint, "non-finite spectral point");
  if (on_positive_axis(z))
    throw Error(Errc::InvalidSpectralPoint, "z lies on the nonnegative real axis");
}

namespace detail {

inline CMatrix solve_system(const CMatrix& m) {
  try {
    return checked_inverse(m);
  } catch (const Error& e) {
    if (e.code() == Errc::SingularMatrix)
      throw Error(Errc::SingularSystem, "equivalent system matrix is singular");
    throw;
  }
}

inline void check_iterates(const ModelSpec& model, const CVector& psi, const CVector& psi_tilde) {
  if (psi.size() != model.N() || psi_tilde.size() != model.n())
    throw Error(Errc::DimensionMismatch, "psi / psi_tilde lengths do not match the model");
  for (const CVector* v : {&psi, &psi_tilde})
    for (Eigen::Index k = 0; k < v->size(); ++k)
      if ((*v)(k) == Complex(0.0) || !std::isfinite(std::abs((*v)(k))))
        throw Error(Errc::SingularSystem, "psi entries must be finite and nonzero");
}

/// diag(T) and diag(Ttilde) with a single inversion of the smaller side;
/// the other diagonal follows from Ttilde = Psitilde + z Psitilde A^* T A Psitilde
/// (and symmetrically T = Psi + z Psi A Ttilde A^* Psi).
inline std::pair<CVector, CVector> equivalent_diagonals(const ModelSpec& model, Complex z,
                                                        const CVector& psi,
                                                        const CVector& psi_tilde) {
  if (model.centering_is_zero()) return {psi, psi_tilde};
  const CMatrix& a = model.A();
  const CMatrix a_adj = model.A_adjoint();
  if (model.N() <= model.n()) {
    CMatrix m = -z * (a * psi_tilde.asDiagonal() * a_adj);
    m.diagonal() += psi.cwiseInverse();
    const CMatrix t = solve_system(m);
    const CMatrix ta = t * a;
    const CVector q = a_adj.transpose().cwiseProduct(ta).colwise().sum().transpose();
    CVector t_tilde = psi_tilde + z * psi_tilde.cwiseProduct(psi_tilde).cwiseProduct(q);
    return {t.diagonal(), std::move(t_tilde)};
  }
  CMatrix m = -z * (a_adj * psi.asDiagonal() * a);
  m.diagonal() += psi_tilde.cwiseInverse();
  const CMatrix tt = solve_system(m);
  const CMatrix tta = tt * a_adj;
  const CVector q = a.transpose().cwiseProduct(tta).colwise().sum().transpose();
  CVector t = psi + z * psi.cwiseProduct(psi).cwiseProduct(q);
  return {std::move(t), tt.diagonal()};
}

/// One application of the update map to (psi, psi_tilde).
inline PsiPair update_map(const ModelSpec& model, Complex z, const CVector& psi,
                          const CVector& psi_tilde) {
  const auto [t_diag, tt_diag] = equivalent_diagonals(model, z, psi, psi_tilde);
  const double inv_n = 1.0 / static_cast<double>(model.n());
  const RMatrix& s2 = model.sigma2();
  const CVector row_sums = (s2 * tt_diag.real() + Complex(0.0, 1.0) * (s2 * tt_diag.imag())) * inv_n;
  const CVector col_sums =
      (s2.transpose() * t_diag.real() + Complex(0.0, 1.0) * (s2.transpose() * t_diag.imag())) * inv_n;
  PsiPair next;
  next.psi = (-(z * (1.0 + row_sums.array()))).inverse().matrix();
  next.psi_tilde = (-(z * (1.0 + col_sums.array()))).inverse().matrix();
  return next;
}

inline double sup_norm(const CVector& a, const CVector& b) {
  double s = 0.0;
  if (a.size() > 0) s = std::max(s, a.cwiseAbs().maxCoeff());
  if (b.size() > 0) s = std::max(s, b.cwiseAbs().maxCoeff());
  return s;
}

struct Attempt {
  bool converged = false;
  PsiPair iterate;
  int iterations = 0;
};

/// Plain (optionally damped) fixed-point sweeps. Gives up early when the
/// observed contraction rate predicts the budget cannot be met.
inline Attempt iterate(const ModelSpec& model, Complex z, PsiPair start, double damping,
                       double tol, int max_iter) {
  Attempt out;
  out.iterate = std::move(start);
  std::vector<double> changes;
  changes.reserve(static_cast<std::size_t>(std::min(max_iter, 4096)));
  constexpr int kWindow = 50;
  for (int it = 1; it <= max_iter; ++it) {
    PsiPair next = update_map(model, z, out.iterate.psi, out.iterate.psi_tilde);
    if (damping > 0.0) {
      next.psi = (1.0 - damping) * next.psi + damping * out.iterate.psi;
      next.psi_tilde = (1.0 - damping) * next.psi_tilde + damping * out.iterate.psi_tilde;
    }
    const double scale = sup_norm(next.psi, next.psi_tilde);
    const double change =
        sup_norm(next.psi - out.iterate.psi, next.psi_tilde - out.iterate.psi_tilde) / scale;
    out.iterate = std::move(next);
    out.iterations = it;
    if (!std::isfinite(change)) return out;
    if (change < tol) {
      out.converged = true;
      return out;
    }
    changes.push_back(change);
    if (it >= 4 * kWindow && it % kWindow == 0) {
      const double ratio = changes[changes.size() - 1] / changes[changes.size() - 1 - kWindow];
      const double rate = std::pow(ratio, 1.0 / kWindow);
      if (!(rate < 1.0)) return out;
      const double needed = std::log(tol / change) / std::log(rate);
      if (needed > static_cast<double>(max_iter - it)) return out;
    }
  }
  return out;
}

/// Sign pattern every admissible solution has: Im psi, Im(z psi) >= 0 above
/// the axis (mirrored below), psi > 0 on the negative half-line.
inline bool admissible(Complex z, const PsiPair& p) {
  const double slack = 1e-10;
  const double sign = z.imag() < 0.0 ? -1.0 : 1.0;
  for (const CVector* v : {&p.psi, &p.psi_tilde})
    for (Eigen::Index k = 0; k < v->size(); ++k) {
      const Complex w = (*v)(k);
      const double mag = std::abs(w);
      if (z.imag() == 0.0) {
        if (!(w.real() > 0.0)) return false;
      } else if (sign * w.imag() < -slack * mag || sign * (z * w).imag() < -slack * mag * std::abs(z)) {
        return false;
      }
    }
  return true;
}

/// Anderson-accelerated sweeps (type II, mixing 1 - damping). Stops on the
/// same relative-change test as the plain iteration, measured on a plain
/// step, and gives up when the residual stagnates.
inline Attempt iterate_anderson(const ModelSpec& model, Complex z, PsiPair start, int depth,
                                double damping, double tol, int max_iter) {
  const Eigen::Index N = model.N();
  const Eigen::Index len = N + model.n();
  auto pack = [&](const PsiPair& p) {
    CVector x(len);
    x << p.psi, p.psi_tilde;
    return x;
  };
  auto unpack = [&](const CVector& x) { return PsiPair{x.head(N), x.tail(len - N)}; };
  const double beta = 1.0 - damping;
  Attempt out;
  CVector x = pack(start);
  CMatrix dx(len, 0);
  CMatrix df(len, 0);
  CVector x_prev;
  CVector f_prev;
  double best = std::numeric_limits<double>::infinity();
  int since_best = 0;
  for (int it = 1; it <= max_iter; ++it) {
    const PsiPair gp = update_map(model, z, x.head(N), x.tail(len - N));
    const CVector g = pack(gp);
    const CVector f = g - x;
    out.iterations = it;
    const double scale = g.cwiseAbs().maxCoeff();
    const double change = f.cwiseAbs().maxCoeff() / scale;
    if (!std::isfinite(change)) return out;
    if (change < tol) {
      out.iterate = gp;
      out.converged = true;
      return out;
    }
    if (change < 0.5 * best) {
      best = change;
      since_best = 0;
    } else if (++since_best > 200) {
      return out;
    }
    if (it > 1) {
      const Eigen::Index cols = std::min<Eigen::Index>(dx.cols() + 1, depth);
      CMatrix ndx(len, cols);
      CMatrix ndf(len, cols);
      if (cols > 1) {
        ndx.leftCols(cols - 1) = dx.rightCols(cols - 1);
        ndf.leftCols(cols - 1) = df.rightCols(cols - 1);
      }
      ndx.col(cols - 1) = x - x_prev;
      ndf.col(cols - 1) = f - f_prev;
      dx = std::move(ndx);
      df = std::move(ndf);
    }
    x_prev = x;
    f_prev = f;
    if (dx.cols() == 0) {
      x = x + beta * f;
    } else {
      const CVector gamma = df.completeOrthogonalDecomposition().solve(f);
      x = x + beta * f - (dx + beta * df) * gamma;
    }
    out.iterate = unpack(x);
  }
  return out;
}

inline PsiPair initial_guess(const ModelSpec& model, Complex z) {
  const Complex v = -1.0 / z;
  return {CVector::Constant(model.N(), v), CVector::Constant(model.n(), v)};
}

/// Accelerated attempt (kept only if it lands on an admissible point), then
/// plain sweeps with the configured damping, then damping 0.5, all from `start`.
inline Attempt iterate_with_retry(const ModelSpec& model, Complex z, const PsiPair& start,
                                  const SolverConfig& config) {
  int spent = 0;
  if (config.anderson_depth > 0) {
    Attempt acc = iterate_anderson(model, z, start, config.anderson_depth, config.damping,
                                   config.tol, config.max_iter);
    if (acc.converged && admissible(z, acc.iterate)) return acc;
    spent = acc.iterations;
  }
  Attempt a = iterate(model, z, start, config.damping, config.tol, config.max_iter);
  a.iterations += spent;
  if (a.converged) return a;
  spent = a.iterations;
  Attempt b = iterate(model, z, start, 0.5, config.tol, config.max_iter);
  b.iterations += spent;
  return b;
}

/// Continuation: solve at Re z + i h for h = H, H/4, ... down to |Im z|,
/// warm-starting each stage, then at z itself.
inline Attempt descend(const ModelSpec& model, Complex z, const SolverConfig& config) {
  const double sign = z.imag() < 0.0 ? -1.0 : 1.0;
  const double target = std::abs(z.imag());
  const double floor = std::max(target, 1e-8 * model.scale());
  double h = std::max(config.start_height(model), 2.0 * target);
  PsiPair guess = initial_guess(model, Complex(z.real(), sign * h));
  int total = 0;
  while (h > floor) {
    const Complex zk(z.real(), sign * h);
    Attempt stage = iterate_with_retry(model, zk, guess, config);
    total += stage.iterations;
    if (!stage.converged) {
      stage.iterations = total;
      return stage;
    }
    guess = std::move(stage.iterate);
    if (h <= 4.0 * target) break;
    h /= 4.0;
  }
  Attempt last = iterate_with_retry(model, z, guess, config);
  last.iterations += total;
  return last;
}

inline double fixed_point_residual(const ModelSpec& model, Complex z, const CVector& psi,
                                   const CVector& psi_tilde, const CMatrix& t,
                                   const CMatrix& t_tilde) {
  const double inv_n = 1.0 / static_cast<double>(model.n());
  const CVector row_sums = model.sigma2().cast<Complex>() * t_tilde.diagonal() * inv_n;
  const CVector col_sums = model.sigma2().transpose().cast<Complex>() * t.diagonal() * inv_n;
  double r = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i)
    r = std::max(r, std::abs(psi(i) + 1.0 / (z * (1.0 + row_sums(i)))) / (1.0 + std::abs(psi(i))));
  for (Eigen::Index j = 0; j < psi_tilde.size(); ++j)
    r = std::max(r, std::abs(psi_tilde(j) + 1.0 / (z * (1.0 + col_sums(j)))) /
                        (1.0 + std::abs(psi_tilde(j))));
  return r;
}

}  // namespace detail

/// T = (Psi^-1 - z A Psitilde A^*)^-1 and Ttilde = (Psitilde^-1 - z A^* Psi A)^-1,
/// each by a direct solve against the assembled system matrix.
inline std::pair<CMatrix, CMatrix> assemble_equivalents(const ModelSpec& model, Complex z,
                                                        const CVector& psi,
                                                        const CVector& psi_tilde) {
  if (on_positive_axis(z)) throw Error(Errc::SingularSystem, "z on the nonnegative real axis");
  detail::check_iterates(model, psi, psi_tilde);
  if (model.centering_is_zero())
    return {CMatrix(psi.asDiagonal()), CMatrix(psi_tilde.asDiagonal())};
  const CMatrix& a = model.A();
  const CMatrix a_adj = model.A_adjoint();
  CMatrix m = -z * (a * psi_tilde.asDiagonal() * a_adj);
  m.diagonal() += psi.cwiseInverse();
  CMatrix mt = -z * (a_adj * psi.asDiagonal() * a);
  mt.diagonal() += psi_tilde.cwiseInverse();
  return {detail::solve_system(m), detail::solve_system(mt)};
}

namespace detail {

inline EquivalentSolution finish(const ModelSpec& model, Complex z, PsiPair iterate,
                                 int iterations) {
  EquivalentSolution s;
  s.z = z;
  std::tie(s.T, s.T_tilde) = assemble_equivalents(model, z, iterate.psi, iterate.psi_tilde);
  s.psi = std::move(iterate.psi);
  s.psi_tilde = std::move(iterate.psi_tilde);
  s.iterations = iterations;
  s.residual = fixed_point_residual(model, z, s.psi, s.psi_tilde, s.T, s.T_tilde);
  return s;
}

}  // namespace detail

namespace detail {

/// Plain iteration (with the damping retry) from `start`, falling back to
/// continuation; with `descend_first` the continuation is tried first.
inline Attempt converge(const ModelSpec& model, Complex z, const SolverConfig& config,
                        const std::optional<PsiPair>& start, bool descend_first) {
  int spent = 0;
  if (descend_first) {
    Attempt a = descend(model, z, config);
    if (a.converged) return a;
    spent = a.iterations;
  }
  PsiPair guess = start ? *start : initial_guess(model, z);
  check_iterates(model, guess.psi, guess.psi_tilde);
  Attempt a = iterate_with_retry(model, z, guess, config);
  a.iterations += spent;
  if (!a.converged && !descend_first) {
    spent = a.iterations;
    a = descend(model, z, config);
    a.iterations += spent;
  }
  if (!a.converged)
    throw Error(Errc::MaxIterExceeded, "fixed-point iteration did not converge at z = (" +
                                           std::to_string(z.real()) + ", " +
                                           std::to_string(z.imag()) + ")");
  return a;
}

}  // namespace detail

/// Solves the deterministic system at z (anywhere off [0, inf)). When the
/// plain iteration stalls, retries with damping 0.5 and then continues
/// down from z + i*H; throws MaxIterExceeded if all of that fails.
inline EquivalentSolution solve(const ModelSpec& model, Complex z, const SolverConfig& config = {},
                                const std::optional<PsiPair>& start = std::nullopt) {
  config.validate();
  check_spectral_point(z);
  detail::Attempt a = detail::converge(model, z, config, start, false);
  return detail::finish(model, z, std::move(a.iterate), a.iterations);
}

/// True for targets just above/below the positive half-line, where the
/// solve is started high in the half-plane and walked down.
inline bool near_positive_axis(const ModelSpec& model, Complex z) {
  return z.real() > 0.0 && std::abs(z.imag()) < 1e-2 * model.scale();
}

/// Solves the targets in order, each warm-started from the previous one.
inline std::vector<EquivalentSolution> solve_path(const ModelSpec& model,
                                                  const std::vector<Complex>& targets,
                                                  const SolverConfig& config = {}) {
  config.validate();
  for (const Complex z : targets) check_spectral_point(z);
  std::vector<EquivalentSolution> out;
  out.reserve(targets.size());
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const Complex z = targets[k];
    std::optional<PsiPair> start;
    if (k > 0) start = out.back().guess();
    detail::Attempt a = detail::converge(model, z, config, start, k == 0 && near_positive_axis(model, z));
    out.push_back(detail::finish(model, z, std::move(a.iterate), a.iterations));
  }
  return out;
}

struct TracePoint {
  Complex z;
  Complex m;        // (1/N) Tr T(z)
  Complex m_tilde;  // (1/n) Tr Ttilde(z)
  int iterations = 0;
};

/// Same sweep as solve_path but keeps only the normalized traces, from the
/// diagonals of T and Ttilde. For long grids.
inline std::vector<TracePoint> trace_path(const ModelSpec& model, const std::vector<Complex>& targets,
                                          const SolverConfig& config = {}) {
  config.validate();
  for (const Complex z : targets) check_spectral_point(z);
  std::vector<TracePoint> out;
  out.reserve(targets.size());
  std::optional<PsiPair> prev;
  for (std::size_t k = 0; k < targets.size(); ++k) {
    const Complex z = targets[k];
    detail::Attempt a = detail::converge(model, z, config, prev, k == 0 && near_positive_axis(model, z));
    const auto [t, tt] = detail::equivalent_diagonals(model, z, a.iterate.psi, a.iterate.psi_tilde);
    out.push_back({z, t.mean(), tt.mean(), a.iterations});
    prev = std::move(a.iterate);
  }
  return out;
}

struct SeparableSolution {
  Complex delta;
  Complex delta_tilde;
  EquivalentSolution solution;
};

/// Two-equation reduction for sigma_ij^2 = d_i dtilde_j:
///   delta      = (1/n) Tr D      (-z(I + deltatilde D) + A (I + delta Dtilde)^-1 A^*)^-1
///   deltatilde = (1/n) Tr Dtilde (-z(I + delta Dtilde) + A^* (I + deltatilde D)^-1 A)^-1
/// then Psi = -(1/z)(I + deltatilde D)^-1, Psitilde = -(1/z)(I + delta Dtilde)^-1.
inline SeparableSolution solve_separable(const ModelSpec& model, Complex z,
                                         const SolverConfig& config = {}) {
  config.validate();
  check_spectral_point(z);
  if (!model.is_separable()) throw Error(Errc::NotSeparable, "model carries no separable factors");
  const auto& factors = *model.profile().separable;
  const CVector d = factors.d.cast<Complex>();
  const CVector dt = factors.d_tilde.cast<Complex>();
  const double inv_n = 1.0 / static_cast<double>(model.n());
  const CMatrix& a = model.A();
  const CMatrix a_adj = model.A_adjoint();
  const bool centered = model.centering_is_zero();

  auto update = [&](Complex delta, Complex delta_t) -> std::pair<Complex, Complex> {
    const CVector row = (1.0 + delta_t * d.array()).matrix();   // I + deltatilde D
    const CVector col = (1.0 + delta * dt.array()).matrix();    // I + delta Dtilde
    CVector t_diag;
    CVector tt_diag;
    if (centered) {
      t_diag = (-z * row.array()).inverse().matrix();
      tt_diag = (-z * col.array()).inverse().matrix();
    } else {
      CMatrix m = a * col.cwiseInverse().asDiagonal() * a_adj;
      m.diagonal() += -z * row;
      CMatrix mt = a_adj * row.cwiseInverse().asDiagonal() * a;
      mt.diagonal() += -z * col;
      t_diag = detail::solve_system(m).diagonal();
      tt_diag = detail::solve_system(mt).diagonal();
    }
    return {(d.array() * t_diag.array()).sum() * inv_n,
            (dt.array() * tt_diag.array()).sum() * inv_n};
  };

  auto run = [&](double damping, int& used) -> std::optional<std::pair<Complex, Complex>> {
    Complex delta = -d.sum() * inv_n / z;
    Complex delta_t = -dt.sum() * inv_n / z;
    for (int it = 1; it <= config.max_iter; ++it) {
      auto [nd, ndt] = update(delta, delta_t);
      nd = (1.0 - damping) * nd + damping * delta;
      ndt = (1.0 - damping) * ndt + damping * delta_t;
      const double scale = std::max(std::abs(nd), std::abs(ndt));
      const double change =
          scale == 0.0 ? 0.0 : std::max(std::abs(nd - delta), std::abs(ndt - delta_t)) / scale;
      delta = nd;
      delta_t = ndt;
      used = it;
      if (!std::isfinite(change)) return std::nullopt;
      if (change < config.tol) return std::make_pair(delta, delta_t);
    }
    return std::nullopt;
  };

  int used = 0;
  int total = 0;
  auto result = run(config.damping, used);
  total += used;
  if (!result) {
    result = run(0.5, used);
    total += used;
  }
  if (!result) throw Error(Errc::MaxIterExceeded, "separable iteration did not converge");
  const auto [delta, delta_t] = *result;
  PsiPair psi;
  psi.psi = (-z * (1.0 + delta_t * d.array())).inverse().matrix();
  psi.psi_tilde = (-z * (1.0 + delta * dt.array())).inverse().matrix();
  return {delta, delta_t, detail::finish(model, z, std::move(psi), total)};
}

/// Contraction factor of the update map at z in C+:
/// E(z) = |z|^2 d_n smax^2 / (Im z)^4 * { |z| (1 + d_n smax^2 / Im z)^2 + amax^2 }.
/// The iteration is a strict contraction wherever E(z) < 1.
inline double contraction_bound(const ModelSpec& model, Complex z) {
  if (!(z.imag() > 0.0)) throw Error(Errc::InvalidSpectralPoint, "contraction bound needs Im z > 0");
  const double y = z.imag();
  const double az = std::abs(z);
  const double s2 = model.sigma_max() * model.sigma_max();
  const double dn = model.d_n();
  const double inner = 1.0 + dn * s2 / y;
  return az * az * dn * s2 / (y * y * y * y) *
         (az * inner * inner + model.a_max() * model.a_max());
}

/// Measured Herglotz-type quantities of a solution. For Im z < 0 the
/// checks run on the conjugate problem.
struct InvariantReport {
  double min_im_psi = 0.0;        // min Im psi over psi and psi_tilde
  double min_im_z_psi = 0.0;      // min Im (z psi)
  double max_psi_excess = 0.0;    // max |psi| - bound
  double max_t_norm_excess = 0.0;  // ||T||_sp - 1/Im z (or - 1/|z| for real z < 0)
  double t_norm_bound = 0.0;
  double min_im_t = 0.0;          // lambda_min(Im T), also over Ttilde
  double min_im_z_t = 0.0;        // lambda_min(Im zT)
  double min_re_psi_real_axis = 0.0;  // for real z < 0: min psi (must be > 0)
  bool real_axis = false;

  bool holds() const {
    const bool norm_ok = max_t_norm_excess <= 1e-10 * std::max(1.0, t_norm_bound);
    if (real_axis) return min_re_psi_real_axis > 0.0 && norm_ok;
    return min_im_psi >= -1e-12 && min_im_z_psi >= -1e-12 && max_psi_excess <= 1e-12 && norm_ok &&
           min_im_t >= -1e-10 && min_im_z_t >= -1e-10;
  }
};

inline InvariantReport solution_invariants(const EquivalentSolution& s) {
  InvariantReport r;
  const bool lower = s.z.imag() < 0.0;
  auto flip = [&](Complex v) { return lower ? std::conj(v) : v; };
  const Complex z = flip(s.z);
  if (z.imag() == 0.0) {
    r.real_axis = true;
    double min_psi = std::numeric_limits<double>::infinity();
    for (const CVector* v : {&s.psi, &s.psi_tilde})
      for (Eigen::Index k = 0; k < v->size(); ++k) min_psi = std::min(min_psi, (*v)(k).real());
    r.min_re_psi_real_axis = min_psi;
    r.t_norm_bound = 1.0 / std::abs(z);
    r.max_t_norm_excess = std::max(spectral_norm(s.T), spectral_norm(s.T_tilde)) - r.t_norm_bound;
    return r;
  }
  const double y = z.imag();
  r.min_im_psi = std::numeric_limits<double>::infinity();
  r.min_im_z_psi = std::numeric_limits<double>::infinity();
  r.max_psi_excess = -std::numeric_limits<double>::infinity();
  for (const CVector* v : {&s.psi, &s.psi_tilde})
    for (Eigen::Index k = 0; k < v->size(); ++k) {
      const Complex p = flip((*v)(k));
      r.min_im_psi = std::min(r.min_im_psi, p.imag());
      r.min_im_z_psi = std::min(r.min_im_z_psi, (z * p).imag());
      r.max_psi_excess = std::max(r.max_psi_excess, std::abs(p) - 1.0 / y);
    }
  r.t_norm_bound = 1.0 / y;
  r.max_t_norm_excess = std::max(spectral_norm(s.T), spectral_norm(s.T_tilde)) - r.t_norm_bound;
  r.min_im_t = std::numeric_limits<double>::infinity();
  r.min_im_z_t = std::numeric_limits<double>::infinity();
  for (const CMatrix* t : {&s.T, &s.T_tilde}) {
    const CMatrix tz = lower ? CMatrix(t->conjugate()) : *t;
    r.min_im_t = std::min(r.min_im_t, min_eig_imag_part(tz));
    r.min_im_z_t = std::min(r.min_im_z_t, min_eig_imag_part(CMatrix(z * tz)));
  }
  return r;
}

}  // namespace detequiv
