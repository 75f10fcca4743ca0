#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "detequiv/montecarlo.hpp"
#include "oracles.hpp"

using namespace detequiv;

namespace {

template <typename F>
Errc code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  return Errc::IoError;
}

ModelSpec mp_model(Eigen::Index N, Eigen::Index n) {
  return build_model(RMatrix(RMatrix::Ones(N, n)), RMatrix(RMatrix::Zero(N, n)), ScalarField::real);
}

ModelSpec random_model(std::uint64_t seed, Eigen::Index N, Eigen::Index n) {
  std::mt19937_64 rng(seed);
  return build_model(oracle::random_profile(rng, N, n, 0.2, 1.5), oracle::random_centering(rng, N, n, 1.0),
                     ScalarField::real);
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) g[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (count - 1);
  return g;
}

}  // namespace

TEST(SampleMatrix, DeterministicPerSeedAndTrial) {
  const ModelSpec m = random_model(1, 6, 9);
  const SampleConfig c{Distribution::gaussian, 42, 5};
  EXPECT_EQ(sample_matrix(m, 3, c), sample_matrix(m, 3, c));
  EXPECT_NE(sample_matrix(m, 3, c), sample_matrix(m, 4, c));
  const SampleConfig other{Distribution::gaussian, 43, 5};
  EXPECT_NE(sample_matrix(m, 3, c), sample_matrix(m, 3, other));
}

TEST(SampleMatrix, ZeroModel) {
  const ModelSpec m = build_model(RMatrix(RMatrix::Zero(3, 4)), RMatrix(RMatrix::Zero(3, 4)), ScalarField::real);
  EXPECT_EQ(sample_matrix(m, 0, SampleConfig{}), CMatrix(CMatrix::Zero(3, 4)));
}

TEST(SampleMatrix, GaussianEntriesCentred) {
  const Eigen::Index N = 200, n = 400;
  const ModelSpec m = mp_model(N, n);
  const CMatrix s = sample_matrix(m, 0, SampleConfig{Distribution::gaussian, 5, 1});
  const double mean = (s * std::sqrt(static_cast<double>(n))).real().mean();
  EXPECT_LT(std::abs(mean), 3.0 / std::sqrt(static_cast<double>(N * n)));
  const double var = (s * std::sqrt(static_cast<double>(n))).real().array().square().mean();
  EXPECT_NEAR(var, 1.0, 0.02);
}

TEST(SampleMatrix, RademacherEntries) {
  const ModelSpec m = mp_model(5, 16);
  const CMatrix s = sample_matrix(m, 2, SampleConfig{Distribution::rademacher, 9, 1});
  for (Eigen::Index j = 0; j < s.cols(); ++j)
    for (Eigen::Index i = 0; i < s.rows(); ++i) EXPECT_DOUBLE_EQ(std::abs(s(i, j)), 0.25);
}

TEST(SampleMatrix, CircularGaussianMoments) {
  const Eigen::Index N = 100, n = 300;
  const ModelSpec m = build_model(RMatrix(RMatrix::Ones(N, n)), CMatrix(CMatrix::Zero(N, n)), ScalarField::complex);
  const CMatrix x = sample_matrix(m, 0, SampleConfig{Distribution::circular_gaussian, 1, 1}) *
                    std::sqrt(static_cast<double>(n));
  const Complex second = x.array().square().mean();
  const double abs2 = x.cwiseAbs2().mean();
  EXPECT_LT(std::abs(second), 0.02);
  EXPECT_NEAR(abs2, 1.0, 0.02);
}

TEST(SampleMatrix, AddsCentering) {
  RMatrix a = RMatrix::Zero(2, 2);
  a(0, 1) = 3.0;
  const ModelSpec m = build_model(RMatrix(RMatrix::Zero(2, 2)), a, ScalarField::real);
  EXPECT_EQ(sample_matrix(m, 0, SampleConfig{}), CMatrix(a.cast<Complex>()));
}

TEST(SampleConfig, LawMustMatchField) {
  const ModelSpec real = mp_model(2, 2);
  EXPECT_EQ(code_of([&] { sample_matrix(real, 0, SampleConfig{Distribution::circular_gaussian, 0, 1}); }),
            Errc::InvalidArgument);
  const ModelSpec cplx = build_model(RMatrix(RMatrix::Ones(2, 2)), CMatrix(CMatrix::Zero(2, 2)), ScalarField::complex);
  EXPECT_EQ(code_of([&] { sample_matrix(cplx, 0, SampleConfig{Distribution::gaussian, 0, 1}); }),
            Errc::InvalidArgument);
  EXPECT_EQ(code_of([&] { SampleConfig{Distribution::gaussian, 0, 0}.validate(ScalarField::real); }),
            Errc::InvalidArgument);
}

TEST(EmpiricalStieltjes, Examples) {
  EXPECT_LT(std::abs(empirical_stieltjes(CMatrix::Zero(2, 3), Complex(0.0, 1.0)) - Complex(0.0, 1.0)), 1e-15);
  CMatrix two(1, 1);
  two(0, 0) = 2.0;
  EXPECT_NEAR(std::abs(empirical_stieltjes(two, Complex(-1.0, 0.0)) - 0.2), 0.0, 1e-15);
  for (const double s : {0.3, 1.7}) {
    CMatrix one(1, 1);
    one(0, 0) = s;
    const Complex z(0.4, 0.9);
    EXPECT_LT(std::abs(empirical_stieltjes(one, z) - 1.0 / (s * s - z)), 1e-15);
  }
  EXPECT_EQ(code_of([] { empirical_stieltjes(CMatrix::Zero(1, 1), Complex(1.0, 0.0)); }), Errc::InvalidSpectralPoint);
}

TEST(EmpiricalStieltjes, HerglotzAndRankBridge) {
  const ModelSpec m = random_model(2, 7, 12);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 5; ++t) {
    const CMatrix s = sample_matrix(m, static_cast<std::uint64_t>(t), SampleConfig{Distribution::gaussian, 11, 5});
    const CMatrix st = s.transpose();
    for (int k = 0; k < 4; ++k) {
      const Complex z = oracle::random_upper(rng, -2.0, 5.0, 0.1, 2.0);
      const Complex q = empirical_stieltjes(s, z);
      const Complex qt = empirical_stieltjes(st, z);
      EXPECT_GT(q.imag(), 0.0);
      const double c = 7.0 / 12.0;
      EXPECT_LT(std::abs(qt - (c * q + (1.0 - c) * (-1.0 / z))), 1e-10);
    }
  }
}

TEST(EmpiricalEsd, Examples) {
  EXPECT_EQ(empirical_esd(CMatrix::Zero(3, 2)), RVector(RVector::Zero(3)));
  const RVector id = empirical_esd(CMatrix::Identity(2, 2));
  EXPECT_NEAR(id(0), 1.0, 1e-15);
  EXPECT_NEAR(id(1), 1.0, 1e-15);
  CMatrix d = CMatrix::Zero(2, 2);
  d(0, 0) = 1.0;
  d(1, 1) = 2.0;
  const RVector e = empirical_esd(d);
  EXPECT_NEAR(e(0), 1.0, 1e-15);
  EXPECT_NEAR(e(1), 4.0, 1e-14);
}

TEST(EmpiricalEsd, FirstMomentInExpectation) {
  const ModelSpec m = random_model(4, 20, 30);
  const SampleConfig c{Distribution::rademacher, 8, 40};
  std::vector<double> xs;
  for (int t = 0; t < c.trials; ++t) xs.push_back(empirical_esd(sample_matrix(m, static_cast<std::uint64_t>(t), c)).mean());
  double mean = 0.0;
  for (const double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (const double x : xs) ss += (x - mean) * (x - mean);
  const double se = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  EXPECT_LT(std::abs(mean - first_moment(m)), 3.0 * se);
}

TEST(McStieltjesGap, ZeroVarianceFamily) {
  const ModelFamily fam = [](Eigen::Index n) {
    RMatrix a = RMatrix::Zero(n, n);
    a.diagonal().setConstant(0.7);
    return build_model(RMatrix(RMatrix::Zero(n, n)), a, ScalarField::real);
  };
  for (const auto& r : mc_stieltjes_gap(fam, {4, 16}, Complex(-1.0, 0.0), SampleConfig{Distribution::gaussian, 1, 3}))
    EXPECT_LT(r.gap, 1e-12);
}

TEST(McStieltjesGap, SingleTrialFlagged) {
  const ModelFamily fam = [](Eigen::Index n) { return mp_model(n, n); };
  const auto r = mc_stieltjes_gap(fam, {10}, Complex(-1.0, 0.0), SampleConfig{Distribution::gaussian, 1, 1}).front();
  EXPECT_TRUE(r.single_trial);
  EXPECT_EQ(r.std_error, 0.0);
  EXPECT_EQ(r.trials, 1);
}

TEST(McStieltjesGap, MarchenkoPasturFamilyShrinks) {
  const ModelFamily fam = [](Eigen::Index n) { return mp_model(n, n); };
  const auto r = mc_stieltjes_gap(fam, {100, 400}, Complex(-1.0, 0.0), SampleConfig{Distribution::gaussian, 2024, 20});
  ASSERT_EQ(r.size(), 2u);
  EXPECT_LT(r[1].gap, r[0].gap);
  EXPECT_LT(r[1].gap, 0.02);
  EXPECT_EQ(r[1].quantity, "stieltjes");
  EXPECT_GT(r[1].std_error, 0.0);
}

TEST(McStieltjesGap, ReproducibleAndOrderFree) {
  const ModelFamily fam = [](Eigen::Index n) { return mp_model(n / 2, n); };
  const SampleConfig c{Distribution::rademacher, 77, 6};
  const auto a = mc_stieltjes_gap(fam, {20, 40}, Complex(0.5, 0.5), c);
  const auto b = mc_stieltjes_gap(fam, {40}, Complex(0.5, 0.5), c);
  EXPECT_EQ(render_montecarlo_csv({a[1]}), render_montecarlo_csv(b));
}

TEST(McCapacityGap, NoiselessModelExact) {
  std::mt19937_64 rng(5);
  const RMatrix a = oracle::random_centering(rng, 6, 9, 1.0);
  const ModelSpec m = build_model(RMatrix(RMatrix::Zero(6, 9)), a, ScalarField::real);
  EXPECT_LT(mc_capacity_gap(m, 0.8, SampleConfig{Distribution::gaussian, 3, 4}).gap, 1e-10);
}

TEST(McCapacityGap, MarchenkoPasturDeskScale) {
  const auto r = mc_capacity_gap(mp_model(400, 400), 1.0, SampleConfig{Distribution::gaussian, 99, 20});
  EXPECT_LT(r.gap, 0.02);
  EXPECT_EQ(r.quantity, "capacity");
  EXPECT_EQ(code_of([] { mc_capacity_gap(mp_model(4, 4), 0.0, SampleConfig{}); }), Errc::InvalidArgument);
}

TEST(WeakConvergence, MassCheck) {
  const ModelSpec m = mp_model(100, 200);
  const auto grid = linspace(0.0, 4.0, 2001);
  const TestFunction one{"one", std::vector<double>(grid.size(), 1.0)};
  const auto r = weak_convergence_gap(m, grid, {one}, SampleConfig{Distribution::gaussian, 4, 3}, {}, 2e-3).front();
  EXPECT_NEAR(r.deterministic.real(), 1.0, 5e-3);
  EXPECT_NEAR(r.mean.real(), 1.0, 1e-12);
}

TEST(WeakConvergence, LinearFunctionOnZeroModel) {
  const ModelSpec m = build_model(RMatrix(RMatrix::Zero(5, 8)), RMatrix(RMatrix::Zero(5, 8)), ScalarField::real);
  const auto grid = linspace(0.0, 1.0, 101);
  const TestFunction lin{"lambda", grid};
  const auto r = weak_convergence_gap(m, grid, {lin}, SampleConfig{Distribution::gaussian, 4, 2}, {}, 1e-3).front();
  EXPECT_EQ(r.mean, Complex(0.0, 0.0));
  // point mass at 0 smeared by a Lorentzian, integrated by trapezoid on the same grid
  double expect = 0.0;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    auto g = [](double x) { return x * 1e-3 / (std::numbers::pi * (x * x + 1e-6)); };
    expect += 0.5 * (grid[k] - grid[k - 1]) * (g(grid[k]) + g(grid[k - 1]));
  }
  EXPECT_NEAR(r.deterministic.real(), expect, 1e-12);
}

TEST(WeakConvergence, ResolventFunctionOnMarchenkoPastur) {
  const ModelSpec m = mp_model(400, 400);
  // smoothed density leaks below the hard edge at 0, so f vanishes there
  const auto grid = linspace(0.0, 4.5, 901);
  std::vector<double> f;
  for (const double x : grid) f.push_back(x / (1.0 + x));
  const auto r = weak_convergence_gap(m, grid, {{"x_over_1px", f}}, SampleConfig{Distribution::gaussian, 6, 20}).front();
  EXPECT_LT(r.gap, 0.02);
  EXPECT_EQ(r.quantity, "weak:x_over_1px");
}

TEST(WeakConvergence, RejectsMismatchedSamples) {
  const ModelSpec m = mp_model(3, 3);
  EXPECT_EQ(code_of([&] {
              weak_convergence_gap(m, {0.0, 1.0}, {{"f", {1.0}}}, SampleConfig{});
            }),
            Errc::DimensionMismatch);
}

TEST(BlockDemo, SingleBlockStructure) {
  // n = 1: one random eigenvalue and one exact zero for upsilon
  const ModelSpec m = block_example_model(1, BlockVariant::upsilon);
  for (std::uint64_t t = 0; t < 5; ++t) {
    const RVector esd = empirical_esd(sample_matrix(m, t, SampleConfig{Distribution::gaussian, 2, 5}));
    EXPECT_EQ(esd(0), 0.0);
    EXPECT_GT(esd(1), 0.0);
  }
}

TEST(BlockDemo, SmallReport) {
  const auto rep = block_demo(16, SampleConfig{Distribution::rademacher, 3, 2}, {}, 12, true);
  EXPECT_EQ(rep.upsilon_tilde.min_unit_eigenvalues, 16);
  EXPECT_EQ(rep.bin_edges.size(), 13u);
  EXPECT_EQ(rep.upsilon.histogram.size(), 12u);
  EXPECT_EQ(rep.upsilon.density.size(), 12u);
  double total = 0.0;
  for (const double h : rep.upsilon.histogram) total += h;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_GT(rep.m_difference, 0.05);
}

TEST(MonteCarloCsv, Layout) {
  MonteCarloReport r;
  r.quantity = "stieltjes";
  r.n = 100;
  r.trials = 20;
  r.seed = 7;
  r.mean = Complex(0.5, 0.0);
  r.std_error = 0.25;
  r.deterministic = Complex(0.75, 0.0);
  r.gap = 0.25;
  EXPECT_EQ(render_montecarlo_csv({r}),
            "quantity,n,trials,seed,mean,stderr,deterministic,gap\nstieltjes,100,20,7,0.5,0.25,0.75,0.25\n");
}
