#pragma once

// Executes a RunConfig: builds the model, runs the command, writes CSV
// artifacts and summary.txt into the output directory.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "detequiv/capacity.hpp"
#include "detequiv/config.hpp"
#include "detequiv/error.hpp"
#include "detequiv/matrix_io.hpp"
#include "detequiv/model.hpp"
#include "detequiv/montecarlo.hpp"
#include "detequiv/solver.hpp"
#include "detequiv/spectral.hpp"

namespace detequiv {

enum ExitCode : int { kExitOk = 0, kExitSolver = 2, kExitConfig = 3, kExitValidation = 4 };

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() ? path : base / path;
}

inline RMatrix real_part_checked(const CMatrix& m, const std::string& what) {
  if (m.size() > 0 && m.imag().cwiseAbs().maxCoeff() != 0.0)
    throw Error(Errc::InvalidEntry, what + " must be real");
  return m.real();
}

/// Scalar, inline list "a, b, c" or CSV path (one column or one row).
inline RVector real_source(const std::string& text, const std::filesystem::path& base,
                           Eigen::Index length, const std::string& what) {
  if (is_csv_path(text)) {
    const RMatrix m = real_part_checked(read_matrix_csv(resolve(base, text).string()), what);
    if (m.rows() != 1 && m.cols() != 1) throw Error(Errc::DimensionMismatch, what + " file must be a vector");
    RVector v = m.rows() == 1 ? RVector(m.row(0).transpose()) : RVector(m.col(0));
    if (length != 0 && v.size() != length)
      throw Error(Errc::DimensionMismatch, what + " has " + std::to_string(v.size()) + " entries, expected " +
                                               std::to_string(length));
    return v;
  }
  const auto items = split(text, ',');
  if (items.size() == 1) {
    if (length == 0) throw Error(Errc::SchemaError, what + " is a scalar; the dimension must be given");
    double v = 0.0;
    parse_double(items.front(), v);
    return RVector::Constant(length, v);
  }
  RVector v(static_cast<Eigen::Index>(items.size()));
  for (std::size_t k = 0; k < items.size(); ++k) parse_double(items[k], v(static_cast<Eigen::Index>(k)));
  if (length != 0 && v.size() != length)
    throw Error(Errc::DimensionMismatch, what + " has " + std::to_string(v.size()) + " entries, expected " +
                                             std::to_string(length));
  return v;
}

/// A_ij = sqrt(N/n) when j mod N == i (N <= n), transposed rule otherwise:
/// unit Euclidean norm along the longer side.
inline RMatrix tiled_identity(Eigen::Index N, Eigen::Index n) {
  RMatrix a = RMatrix::Zero(N, n);
  if (N <= n) {
    const double w = std::sqrt(static_cast<double>(N) / static_cast<double>(n));
    for (Eigen::Index j = 0; j < n; ++j) a(j % N, j) = w;
  } else {
    const double w = std::sqrt(static_cast<double>(n) / static_cast<double>(N));
    for (Eigen::Index i = 0; i < N; ++i) a(i, i % n) = w;
  }
  return a;
}

/// sigma_ij = 1 + sin(2 pi i/N) sin(2 pi j/n) / 2, i = 1..N, j = 1..n
inline RMatrix sine_bump(Eigen::Index N, Eigen::Index n) {
  RMatrix s(N, n);
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < N; ++i)
      s(i, j) = 1.0 + 0.5 * std::sin(2.0 * std::numbers::pi * static_cast<double>(i + 1) / static_cast<double>(N)) *
                          std::sin(2.0 * std::numbers::pi * static_cast<double>(j + 1) / static_cast<double>(n));
  return s;
}

inline CMatrix centering_source(const std::string& text, const std::filesystem::path& base,
                                Eigen::Index N, Eigen::Index n) {
  if (text == "0") return CMatrix::Zero(N, n);
  if (text == "tiled_identity") return tiled_identity(N, n).cast<Complex>();
  return read_matrix_csv(resolve(base, text).string());
}

/// Whether the model can be rebuilt at another size without data files.
inline bool scalable(const RunConfig& c) {
  switch (c.model_type) {
    case ModelKind::explicit_: return !is_csv_path(c.profile) && !is_csv_path(c.a);
    case ModelKind::separable:
      return !is_csv_path(c.d) && !is_csv_path(c.d_tilde) && split(c.d, ',').size() == 1 &&
             split(c.d_tilde, ',').size() == 1 && !is_csv_path(c.a) && c.N && c.n;
    case ModelKind::gaussian_field: return c.b == "0";
    case ModelKind::block_example: return true;
    case ModelKind::dx: return !is_csv_path(c.lambdas) && split(c.lambdas, ',').size() == 1 && c.N;
  }
  return false;
}

}  // namespace detail

/// Builds the configured model. With n_override the model is rebuilt at
/// that n, scaling N by the same factor; only models without data files
/// can be rescaled. Relative file paths resolve against base_dir.
inline ModelSpec build_model_from_config(const RunConfig& c, const std::filesystem::path& base_dir,
                                         std::optional<Eigen::Index> n_override = std::nullopt) {
  using namespace detail;
  Eigen::Index N = c.N;
  Eigen::Index n = c.n;
  if (n_override) {
    if (!scalable(c)) throw Error(Errc::SchemaError, "model is read from files and cannot be rescaled");
    if (N != 0 && n != 0)
      N = std::max<Eigen::Index>(1, std::llround(static_cast<double>(N) * static_cast<double>(*n_override) /
                                                 static_cast<double>(n)));
    n = *n_override;
  }
  switch (c.model_type) {
    case ModelKind::explicit_: {
      RMatrix profile;
      if (c.profile == "sine_bump") {
        profile = sine_bump(N, n);
      } else if (is_csv_path(c.profile)) {
        profile = real_part_checked(read_matrix_csv(resolve(base_dir, c.profile).string()), "model.profile");
        if ((N && profile.rows() != N) || (n && profile.cols() != n))
          throw Error(Errc::DimensionMismatch, "profile file does not match model.N x model.n");
        N = profile.rows();
        n = profile.cols();
      } else {
        double s = 0.0;
        parse_double(c.profile, s);
        profile = RMatrix::Constant(N, n, s);
      }
      const CMatrix a = centering_source(c.a, base_dir, N, n);
      return build_model(profile, a, c.field);
    }
    case ModelKind::separable: {
      const RVector d = real_source(c.d, base_dir, N, "model.d");
      const RVector dt = real_source(c.d_tilde, base_dir, n, "model.d_tilde");
      const CMatrix a = centering_source(c.a, base_dir, d.size(), dt.size());
      return separable_model(d, dt, a, c.field);
    }
    case ModelKind::gaussian_field: {
      const CMatrix b = c.b == "0" ? CMatrix(CMatrix::Zero(N, n)) : read_matrix_csv(resolve(base_dir, c.b).string());
      return gaussian_field_model(c.taps, b, N, n);
    }
    case ModelKind::block_example:
      return block_example_model(n, c.variant);
    case ModelKind::dx: {
      const RVector lambdas = real_source(c.lambdas, base_dir, N, "model.lambdas");
      return dx_model(lambdas, n);
    }
  }
  throw Error(Errc::SchemaError, "unknown model type");
}

struct RunResult {
  int exit_code = kExitOk;
  std::vector<std::string> files;  // written artifacts, relative to the output dir
  std::string message;
};

namespace detail {

inline void write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text,
                       RunResult& result) {
  std::ofstream out(dir / name, std::ios::binary);
  if (!out) throw Error(Errc::IoError, "cannot write '" + (dir / name).string() + "'");
  out << text;
  if (!out) throw Error(Errc::IoError, "write failed for '" + (dir / name).string() + "'");
  result.files.push_back(name);
}

inline std::string model_line(const ModelSpec& m) {
  return "model: " + std::to_string(m.N()) + " x " + std::to_string(m.n()) + ", " +
         std::string(to_string(m.field())) + " field, sigma_max " + format_real(m.sigma_max()) +
         ", a_max " + format_real(m.a_max()) + "\n";
}

struct Check {
  std::string name;
  Eigen::Index n = 0;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

inline std::string render_checks(const std::vector<Check>& checks) {
  std::string out = "check,n,value,threshold,pass\n";
  for (const auto& c : checks)
    out += c.name + "," + std::to_string(c.n) + "," + format_real(c.value) + "," + format_real(c.threshold) +
           "," + (c.pass ? "true" : "false") + "\n";
  return out;
}

inline bool is_mp_model(const ModelSpec& m) {
  return m.centering_is_zero() && (m.sigma2().array() == 1.0).all();
}

inline void run_solve(const RunConfig& c, const ModelSpec& model, const std::filesystem::path& dir,
                      RunResult& result, std::string& summary) {
  const auto sols = solve_path(model, c.z, c.solver);
  std::string csv = "z_re,z_im,m_re,m_im,m_tilde_re,m_tilde_im,iterations,residual\n";
  for (const auto& s : sols) {
    const Complex m = s.m();
    const Complex mt = s.m_tilde();
    csv += format_real(s.z.real()) + "," + format_real(s.z.imag()) + "," + format_real(m.real()) + "," +
           format_real(m.imag()) + "," + format_real(mt.real()) + "," + format_real(mt.imag()) + "," +
           std::to_string(s.iterations) + "," + format_real(s.residual) + "\n";
    summary += "z = " + format_scalar(s.z) + ": m = " + format_scalar(m) + " (" + std::to_string(s.iterations) +
               " iterations)\n";
  }
  write_file(dir, "solve.csv", csv, result);
}

inline void run_density(const RunConfig& c, const ModelSpec& model, const std::filesystem::path& dir,
                        RunResult& result, std::string& summary) {
  const auto est = density_estimate(model, c.grid->points(), c.eta, c.solver, c.intervals);
  write_file(dir, "density.csv", render_density_csv(est), result);
  summary += "density on " + std::to_string(est.points.size()) + " points, eta = " + format_real(est.eta) + "\n";
  for (const auto& m : est.masses)
    summary += "mass [" + format_real(m.a) + ", " + format_real(m.b) + "] = " + format_real(m.mass) + "\n";
}

inline void run_capacity(const RunConfig& c, const ModelSpec& model, const std::filesystem::path& dir,
                         RunResult& result, std::string& summary) {
  std::vector<CapacityReport> reports;
  if (c.method != CapacityMode::quadrature) reports = capacity_closed_form(model, c.sigma2, c.solver);
  if (c.method != CapacityMode::closed_form)
    for (const double s2 : c.sigma2) reports.push_back(capacity_quadrature(model, s2, c.quad_tol, c.solver));
  write_file(dir, "capacity.csv", render_capacity_csv(reports), result);
  for (const auto& r : reports)
    summary += "sigma2 = " + format_real(r.sigma2) + ": " + format_real(r.value) + " nats (" +
               std::string(to_string(r.method)) + ")\n";
}

inline void run_demo(const RunConfig& c, const std::filesystem::path& dir, RunResult& result,
                     std::string& summary) {
  const SampleConfig sample{c.distribution, c.seed, c.trials};
  const auto rep = block_demo(c.n, sample, c.solver, c.bins, c.demo_density);
  std::string csv = "variant,bin_lo,bin_hi,esd_fraction,density\n";
  for (const auto* v : {&rep.upsilon, &rep.upsilon_tilde}) {
    const std::string name = v->variant == BlockVariant::upsilon ? "upsilon" : "upsilon_tilde";
    for (std::size_t b = 0; b < v->histogram.size(); ++b)
      csv += name + "," + format_real(rep.bin_edges[b]) + "," + format_real(rep.bin_edges[b + 1]) + "," +
             format_real(v->histogram[b]) + "," + (v->density.empty() ? "" : format_real(v->density[b])) + "\n";
  }
  write_file(dir, "demo.csv", csv, result);
  write_file(dir, "montecarlo.csv", render_montecarlo_csv({rep.upsilon.stieltjes, rep.upsilon_tilde.stieltjes}),
             result);
  summary += "block demo, n = " + std::to_string(rep.n) + ", " + std::to_string(c.trials) + " trials\n";
  summary += "m_upsilon(-1) = " + format_scalar(rep.upsilon.deterministic_m) + ", MC gap " +
             format_real(rep.upsilon.stieltjes.gap) + "\n";
  summary += "m_upsilon_tilde(-1) = " + format_scalar(rep.upsilon_tilde.deterministic_m) + ", MC gap " +
             format_real(rep.upsilon_tilde.stieltjes.gap) + "\n";
  summary += "difference " + format_real(rep.m_difference) + "; unit eigenvalues (upsilon_tilde) " +
             std::to_string(rep.upsilon_tilde.min_unit_eigenvalues) + "\n";
}

inline const std::vector<Complex>& default_validate_points() {
  static const std::vector<Complex> z{{-1.0, 0.0}, {-0.5, 0.5}, {0.0, 1.0}, {0.0, 2.0}};
  return z;
}

inline bool run_validate(const RunConfig& c, const ModelSpec& model, const std::filesystem::path& base_dir,
                         const std::filesystem::path& dir, RunResult& result, std::string& summary) {
  std::vector<Check> checks;
  const Eigen::Index n = model.n();
  const auto add = [&checks](std::string name, Eigen::Index nn, double value, double threshold, bool pass) {
    checks.push_back({std::move(name), nn, value, threshold, pass});
  };
  const auto below = [&add](std::string name, Eigen::Index nn, double value, double threshold) {
    add(std::move(name), nn, value, threshold, std::isfinite(value) && value < threshold);
  };

  const std::vector<Complex>& zs = c.z.empty() ? default_validate_points() : c.z;
  const auto sols = solve_path(model, zs, c.solver);
  for (const auto& s : sols) {
    const std::string at = "@" + format_scalar(s.z);
    below("residual" + at, n, s.residual, 10.0 * c.solver.tol);
    const InvariantReport inv = solution_invariants(s);
    add("herglotz" + at, n, inv.max_t_norm_excess, 1e-10 * std::max(1.0, inv.t_norm_bound), inv.holds());
    below("lemma_identity" + at, n, lemma_identity_residual(s, model), 1e-10);
    if (is_mp_model(model))
      below("mp_oracle" + at, n, std::abs(s.m() - mp_reference_stieltjes(model.c(), s.z)), 1e-10);
    if (model.kind() == ModelKind::dx) {
      below("companion" + at, n, companion_identity_residual(s, model), 1e-10);
      below("dx_equation" + at, n, dx_equation_defect(s, model), 1e-10);
    }
  }
  const MomentReport mom = moment_consistency(model, 1e6 * model.scale(), c.solver);
  below("first_moment", n, mom.relative_gap, 1e-4);

  const auto closed = capacity_closed_form(model, c.sigma2, c.solver);
  for (const auto& cf : closed) {
    const auto q = capacity_quadrature(model, cf.sigma2, c.quad_tol, c.solver);
    const double tol = 1e-6 * (1.0 + std::abs(cf.value));
    below("capacity_methods@" + format_real(cf.sigma2), n, std::abs(q.value - cf.value), tol);
  }

  if (!c.n_list.empty()) {
    const SampleConfig sample{c.distribution, c.seed, c.trials};
    const ModelFamily family = [&](Eigen::Index nn) { return build_model_from_config(c, base_dir, nn); };
    const auto reports = mc_stieltjes_gap(family, c.n_list, c.mc_z, sample, c.solver);
    for (const auto& r : reports) below("mc_stieltjes", r.n, r.gap, c.gap_threshold);
    if (reports.size() >= 2)
      below("mc_decreasing", reports.back().n, reports.back().gap - reports.front().gap, 0.0);
    write_file(dir, "montecarlo.csv", render_montecarlo_csv(reports), result);
  }

  write_file(dir, "validate.csv", render_checks(checks), result);
  bool all = true;
  for (const auto& ch : checks) {
    all = all && ch.pass;
    if (!ch.pass) summary += "FAILED " + ch.name + " (n = " + std::to_string(ch.n) + "): " +
                             format_real(ch.value) + " vs " + format_real(ch.threshold) + "\n";
  }
  summary += std::to_string(checks.size()) + " checks, " + (all ? "all passed" : "some failed") + "\n";
  return all;
}

inline int exit_code_for(Errc code) {
  switch (code) {
    case Errc::MaxIterExceeded:
    case Errc::ConvergenceFailure:
    case Errc::SingularSystem:
    case Errc::SingularMatrix:
    case Errc::NotPositiveDefinite:
    case Errc::QuadratureFailure:
      return kExitSolver;
    default:
      return kExitConfig;
  }
}

}  // namespace detail

/// Runs the command. Never throws; failures map to exit codes
/// 2 (solver), 3 (config or IO), 4 (validation thresholds).
inline RunResult run(const RunConfig& c, const std::filesystem::path& base_dir = ".") {
  RunResult result;
  try {
    const std::filesystem::path dir = detail::resolve(base_dir, c.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(Errc::IoError, "cannot create output directory '" + dir.string() + "'");
    std::string summary = "command: " + detail::name_of(detail::command_names(), c.command) + "\n";
    bool passed = true;
    if (c.command == Command::demo) {
      detail::run_demo(c, dir, result, summary);
    } else {
      const ModelSpec model = build_model_from_config(c, base_dir);
      summary += detail::model_line(model);
      switch (c.command) {
        case Command::solve: detail::run_solve(c, model, dir, result, summary); break;
        case Command::density: detail::run_density(c, model, dir, result, summary); break;
        case Command::capacity: detail::run_capacity(c, model, dir, result, summary); break;
        case Command::validate: passed = detail::run_validate(c, model, base_dir, dir, result, summary); break;
        case Command::demo: break;
      }
    }
    detail::write_file(dir, "summary.txt", summary, result);
    if (!passed) {
      result.exit_code = kExitValidation;
      result.message = "validation thresholds failed";
    }
  } catch (const Error& e) {
    result.exit_code = detail::exit_code_for(e.code());
    result.message = e.what();
  } catch (const std::exception& e) {
    result.exit_code = kExitConfig;
    result.message = e.what();
  }
  return result;
}

}  // namespace detequiv
