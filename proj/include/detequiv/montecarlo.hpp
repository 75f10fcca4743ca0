#pragma once

// Sampling of Sigma = Y + A and the empirical counterparts of the
// deterministic quantities. Every trial draws from its own stream, seeded
// from (seed, trial_index), so results do not depend on trial order.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "detequiv/capacity.hpp"
#include "detequiv/error.hpp"
#include "detequiv/matrix_io.hpp"
#include "detequiv/model.hpp"
#include "detequiv/numerics.hpp"
#include "detequiv/solver.hpp"
#include "detequiv/spectral.hpp"

namespace detequiv {

enum class Distribution { gaussian, rademacher, circular_gaussian };

inline std::string_view to_string(Distribution d) {
  switch (d) {
    case Distribution::gaussian: return "gaussian";
    case Distribution::rademacher: return "rademacher";
    case Distribution::circular_gaussian: return "circular_gaussian";
  }
  return "gaussian";
}

inline Distribution default_distribution(ScalarField field) {
  return field == ScalarField::real ? Distribution::gaussian : Distribution::circular_gaussian;
}

struct SampleConfig {
  Distribution distribution = Distribution::gaussian;
  std::uint64_t seed = 0;
  int trials = 20;

  void validate(ScalarField field) const {
    if (trials < 1) throw Error(Errc::InvalidArgument, "trials must be >= 1");
    const bool complex_law = distribution == Distribution::circular_gaussian;
    if (complex_law != (field == ScalarField::complex))
      throw Error(Errc::InvalidArgument, std::string("distribution ") +
                                             std::string(to_string(distribution)) +
                                             " does not match the " +
                                             std::string(to_string(field)) + " field");
  }
};

/// splitmix64 finalizer
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t trial_seed(std::uint64_t seed, std::uint64_t trial_index) {
  return seed ^ mix64(trial_index);
}

/// One draw of Sigma = Y + A, Y_ij = sigma_ij X_ij / sqrt(n). Entries are
/// drawn column by column.
inline CMatrix sample_matrix(const ModelSpec& model, std::uint64_t trial_index,
                             const SampleConfig& config) {
  config.validate(model.field());
  std::mt19937_64 rng(trial_seed(config.seed, trial_index));
  std::normal_distribution<double> normal(0.0, 1.0);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(model.n()));
  const RMatrix& sigma = model.profile().sigma;
  CMatrix out(model.N(), model.n());
  for (Eigen::Index j = 0; j < model.n(); ++j)
    for (Eigen::Index i = 0; i < model.N(); ++i) {
      Complex x;
      switch (config.distribution) {
        case Distribution::gaussian: x = normal(rng); break;
        case Distribution::rademacher: x = (rng() >> 63) ? 1.0 : -1.0; break;
        case Distribution::circular_gaussian: {
          const double re = normal(rng);
          const double im = normal(rng);
          x = Complex(re, im) * std::numbers::sqrt2 * 0.5;
          break;
        }
      }
      out(i, j) = sigma(i, j) * inv_sqrt_n * x;
    }
  return out + model.A();
}

/// Eigenvalues of Sigma Sigma^*, ascending, clamped at 0. Taken from the
/// smaller Gram matrix and padded with zeros.
inline RVector empirical_esd(const CMatrix& sigma) {
  const Eigen::Index N = sigma.rows();
  if (N == 0) return {};
  if (sigma.cols() == 0) return RVector::Zero(N);
  const bool left = N <= sigma.cols();
  const RVector ev = hermitian_eigenvalues(HermitianMatrix::gram(sigma, left));
  RVector out = RVector::Zero(N);
  out.tail(ev.size()) = ev.cwiseMax(0.0);
  return out;
}

inline Complex empirical_stieltjes_from_esd(const RVector& esd, Complex z) {
  check_spectral_point(z);
  Complex acc = 0.0;
  for (Eigen::Index k = 0; k < esd.size(); ++k) acc += 1.0 / (esd(k) - z);
  return acc / static_cast<double>(esd.size());
}

/// (1/N) Tr (Sigma Sigma^* - z I)^-1
inline Complex empirical_stieltjes(const CMatrix& sigma, Complex z) {
  check_spectral_point(z);
  return empirical_stieltjes_from_esd(empirical_esd(sigma), z);
}

struct MonteCarloReport {
  std::string quantity;
  Eigen::Index n = 0;
  int trials = 0;
  std::uint64_t seed = 0;
  Complex mean = 0.0;
  double std_error = 0.0;  // sample std / sqrt(trials); 0 for one trial
  Complex deterministic = 0.0;
  double gap = 0.0;
  bool single_trial = false;
};

namespace detail {

inline void summarize(MonteCarloReport& r, const std::vector<Complex>& xs) {
  const auto t = static_cast<double>(xs.size());
  Complex mean = 0.0;
  for (const Complex x : xs) mean += x;
  mean /= t;
  double ss = 0.0;
  for (const Complex x : xs) ss += std::norm(x - mean);
  r.trials = static_cast<int>(xs.size());
  r.mean = mean;
  r.single_trial = xs.size() == 1;
  r.std_error = r.single_trial ? 0.0 : std::sqrt(ss / (t - 1.0)) / std::sqrt(t);
  r.gap = std::abs(r.mean - r.deterministic);
}

}  // namespace detail

using ModelFamily = std::function<ModelSpec(Eigen::Index)>;

/// Trial mean of (1/N) Tr Q(z) against (1/N) Tr T(z) for each n.
inline std::vector<MonteCarloReport> mc_stieltjes_gap(const ModelFamily& family,
                                                      const std::vector<Eigen::Index>& n_list,
                                                      Complex z, const SampleConfig& sample,
                                                      const SolverConfig& solver = {}) {
  check_spectral_point(z);
  std::vector<MonteCarloReport> out;
  for (const Eigen::Index n : n_list) {
    const ModelSpec model = family(n);
    sample.validate(model.field());
    MonteCarloReport r;
    r.quantity = "stieltjes";
    r.n = n;
    r.seed = sample.seed;
    r.deterministic = equivalent_stieltjes(model, z, solver).m;
    std::vector<Complex> xs;
    xs.reserve(static_cast<std::size_t>(sample.trials));
    for (int t = 0; t < sample.trials; ++t)
      xs.push_back(empirical_stieltjes(sample_matrix(model, static_cast<std::uint64_t>(t), sample), z));
    detail::summarize(r, xs);
    out.push_back(std::move(r));
  }
  return out;
}

/// Trial mean of (1/N) log det(I + Sigma Sigma^* / sigma2) against the closed form.
inline MonteCarloReport mc_capacity_gap(const ModelSpec& model, double sigma2,
                                        const SampleConfig& sample,
                                        const SolverConfig& solver = {}) {
  detail::check_sigma2(sigma2);
  sample.validate(model.field());
  MonteCarloReport r;
  r.quantity = "capacity";
  r.n = model.n();
  r.seed = sample.seed;
  r.deterministic = capacity_closed_form(model, {sigma2}, solver).front().value;
  const bool left = model.N() <= model.n();
  std::vector<Complex> xs;
  for (int t = 0; t < sample.trials; ++t) {
    const CMatrix s = sample_matrix(model, static_cast<std::uint64_t>(t), sample);
    CMatrix g = HermitianMatrix::gram(s, left).matrix() / sigma2;
    g.diagonal().array() += 1.0;
    xs.emplace_back(log_det_hpd(HermitianMatrix(std::move(g))) / static_cast<double>(model.N()));
  }
  detail::summarize(r, xs);
  return r;
}

struct TestFunction {
  std::string name;
  std::vector<double> values;  // samples on the grid
};

namespace detail {

/// Piecewise-linear interpolation on an ascending grid, constant outside.
inline double interpolate(const std::vector<double>& grid, const std::vector<double>& f, double x) {
  if (x <= grid.front()) return f.front();
  if (x >= grid.back()) return f.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), x);
  const auto k = static_cast<std::size_t>(it - grid.begin());
  const double w = (x - grid[k - 1]) / (grid[k] - grid[k - 1]);
  return (1.0 - w) * f[k - 1] + w * f[k];
}

}  // namespace detail

/// (1/N) sum_k f(lambda_k) against the trapezoid integral of f times the
/// smoothed density on the grid. The deterministic side carries the eta bias.
inline std::vector<MonteCarloReport> weak_convergence_gap(
    const ModelSpec& model, const std::vector<double>& grid,
    const std::vector<TestFunction>& functions, const SampleConfig& sample,
    const SolverConfig& solver = {}, std::optional<double> eta = std::nullopt) {
  sample.validate(model.field());
  if (grid.size() < 2) throw Error(Errc::InvalidArgument, "grid needs at least two points");
  for (const auto& f : functions)
    if (f.values.size() != grid.size())
      throw Error(Errc::DimensionMismatch, "test function '" + f.name + "' does not match the grid");
  const DensityEstimate est = density_estimate(model, grid, eta, solver);

  std::vector<RVector> esds;
  for (int t = 0; t < sample.trials; ++t)
    esds.push_back(empirical_esd(sample_matrix(model, static_cast<std::uint64_t>(t), sample)));

  std::vector<MonteCarloReport> out;
  for (const auto& f : functions) {
    MonteCarloReport r;
    r.quantity = "weak:" + f.name;
    r.n = model.n();
    r.seed = sample.seed;
    double integral = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k)
      integral += 0.5 * (grid[k] - grid[k - 1]) *
                  (f.values[k] * est.points[k].density + f.values[k - 1] * est.points[k - 1].density);
    r.deterministic = integral;
    std::vector<Complex> xs;
    for (const auto& esd : esds) {
      double acc = 0.0;
      for (Eigen::Index k = 0; k < esd.size(); ++k) acc += detail::interpolate(grid, f.values, esd(k));
      xs.emplace_back(acc / static_cast<double>(esd.size()));
    }
    detail::summarize(r, xs);
    out.push_back(std::move(r));
  }
  return out;
}

struct BlockVariantReport {
  BlockVariant variant = BlockVariant::upsilon;
  Complex deterministic_m = 0.0;    // (1/N) Tr T(-1)
  MonteCarloReport stieltjes;       // at z = -1
  std::vector<double> histogram;    // pooled ESD fractions per bin
  std::vector<double> density;      // deterministic density at bin centres (optional)
  Eigen::Index min_unit_eigenvalues = 0;  // min over trials of #{|lambda - 1| <= 1e-10}
};

struct BlockDemoReport {
  Eigen::Index n = 0;
  double hist_max = 0.0;
  std::vector<double> bin_edges;
  BlockVariantReport upsilon;
  BlockVariantReport upsilon_tilde;
  double m_difference = 0.0;  // |m_upsilon(-1) - m_upsilon_tilde(-1)|
};

/// Both variants of the 2n x 2n alternating block model at z = -1, with
/// ESD histograms on [0, 4(smax^2 + amax^2)]. with_density adds the
/// deterministic density at the bin centres.
inline BlockDemoReport block_demo(Eigen::Index n, const SampleConfig& sample,
                                  const SolverConfig& solver = {}, int bins = 48,
                                  bool with_density = false) {
  if (bins < 1) throw Error(Errc::InvalidArgument, "histogram needs at least one bin");
  BlockDemoReport rep;
  rep.n = n;
  const Complex z(-1.0, 0.0);
  for (const BlockVariant v : {BlockVariant::upsilon, BlockVariant::upsilon_tilde}) {
    const ModelSpec model = block_example_model(n, v);
    sample.validate(model.field());
    rep.hist_max = 4.0 * (model.sigma_max() * model.sigma_max() + model.a_max() * model.a_max());
    rep.bin_edges.assign(static_cast<std::size_t>(bins) + 1, 0.0);
    for (int b = 0; b <= bins; ++b) rep.bin_edges[static_cast<std::size_t>(b)] = rep.hist_max * b / bins;

    BlockVariantReport vr;
    vr.variant = v;
    vr.deterministic_m = equivalent_stieltjes(model, z, solver).m;
    vr.stieltjes.quantity = v == BlockVariant::upsilon ? "block_upsilon" : "block_upsilon_tilde";
    vr.stieltjes.n = n;
    vr.stieltjes.seed = sample.seed;
    vr.stieltjes.deterministic = vr.deterministic_m;
    vr.histogram.assign(static_cast<std::size_t>(bins), 0.0);
    vr.min_unit_eigenvalues = model.N();
    std::vector<Complex> xs;
    double total = 0.0;
    for (int t = 0; t < sample.trials; ++t) {
      const RVector esd = empirical_esd(sample_matrix(model, static_cast<std::uint64_t>(t), sample));
      xs.push_back(empirical_stieltjes_from_esd(esd, z));
      Eigen::Index units = 0;
      for (Eigen::Index k = 0; k < esd.size(); ++k) {
        if (std::abs(esd(k) - 1.0) <= 1e-10) ++units;
        const double x = esd(k);
        auto b = static_cast<int>(std::floor(x / rep.hist_max * bins));
        b = std::clamp(b, 0, bins - 1);
        vr.histogram[static_cast<std::size_t>(b)] += 1.0;
        total += 1.0;
      }
      vr.min_unit_eigenvalues = std::min(vr.min_unit_eigenvalues, units);
    }
    for (double& h : vr.histogram) h /= total;
    detail::summarize(vr.stieltjes, xs);
    if (with_density) {
      std::vector<double> centres;
      for (int b = 0; b < bins; ++b)
        centres.push_back(0.5 * (rep.bin_edges[static_cast<std::size_t>(b)] +
                                 rep.bin_edges[static_cast<std::size_t>(b) + 1]));
      const auto est = density_estimate(model, centres, std::nullopt, solver);
      for (const auto& p : est.points) vr.density.push_back(p.density);
    }
    (v == BlockVariant::upsilon ? rep.upsilon : rep.upsilon_tilde) = std::move(vr);
  }
  rep.m_difference = std::abs(rep.upsilon.deterministic_m - rep.upsilon_tilde.deterministic_m);
  return rep;
}

inline std::string render_montecarlo_csv(const std::vector<MonteCarloReport>& reports) {
  std::string out = "quantity,n,trials,seed,mean,stderr,deterministic,gap\n";
  for (const auto& r : reports)
    out += r.quantity + "," + std::to_string(r.n) + "," + std::to_string(r.trials) + "," +
           std::to_string(r.seed) + "," + format_scalar(r.mean) + "," + format_real(r.std_error) +
           "," + format_scalar(r.deterministic) + "," + format_real(r.gap) + "\n";
  return out;
}

}  // namespace detequiv
