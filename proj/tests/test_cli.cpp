#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "detequiv/config.hpp"
#include "detequiv/runner.hpp"

using namespace detequiv;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("detequiv_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

std::string schema_message(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::SchemaError);
    return e.what();
  }
  ADD_FAILURE() << "no SchemaError for:\n" << text;
  return {};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DETEQUIV_CLI) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kMinimal =
    "model.type = explicit\n"
    "model.N = 4\n"
    "model.n = 6\n"
    "model.profile = 1\n"
    "command = solve\n"
    "command.z = -1\n";

}  // namespace

TEST(ParseConfig, MinimalSolveFillsDefaults) {
  const RunConfig c = parse_config(kMinimal);
  EXPECT_EQ(c.solver.tol, 1e-12);
  EXPECT_EQ(c.solver.max_iter, 10000);
  EXPECT_EQ(c.solver.damping, 0.0);
  EXPECT_EQ(c.model_type, ModelKind::explicit_);
  EXPECT_EQ(c.command, Command::solve);
  ASSERT_EQ(c.z.size(), 1u);
  EXPECT_EQ(c.z.front(), Complex(-1.0, 0.0));
  EXPECT_EQ(c.a, "0");
  EXPECT_EQ(c.out_dir, ".");
}

TEST(ParseConfig, UnknownKeyNamed) {
  const std::string msg = schema_message(std::string(kMinimal) + "tolrance = 1e-9\n");
  EXPECT_NE(msg.find("tolrance"), std::string::npos);
  EXPECT_NE(msg.find("line 7"), std::string::npos);
  EXPECT_NE(schema_message(std::string(kMinimal) + "solver.tolrance = 1e-9\n").find("solver.tolrance"),
            std::string::npos);
}

TEST(ParseConfig, ComplexListWithTypographicMinus) {
  const RunConfig c = parse_config(
      "model.type = explicit\nmodel.N = 2\nmodel.n = 2\nmodel.profile = 1\ncommand = solve\n"
      "command.z = \"\xE2\x88\x92" "1, i, 2i, -0.5+0.5i\"  # quoted\n");
  ASSERT_EQ(c.z.size(), 4u);
  EXPECT_EQ(c.z[0], Complex(-1.0, 0.0));
  EXPECT_EQ(c.z[1], Complex(0.0, 1.0));
  EXPECT_EQ(c.z[2], Complex(0.0, 2.0));
  EXPECT_EQ(c.z[3], Complex(-0.5, 0.5));
}

TEST(ParseConfig, RejectsMalformedInput) {
  const std::string base = kMinimal;
  EXPECT_NE(schema_message(base + "command.z = 1\n").find("duplicate"), std::string::npos);
  EXPECT_NE(schema_message(base + "model.taps = 0 0 1\n").find("does not apply"), std::string::npos);
  EXPECT_NE(schema_message(base + "command.grid = 0:1:5\n").find("does not apply"), std::string::npos);
  EXPECT_NE(schema_message(base + "solver.tol = abc\n").find("solver.tol"), std::string::npos);
  EXPECT_NE(schema_message(base + "solver.damping = 1\n").find("solver"), std::string::npos);
  EXPECT_NE(schema_message(base + "just some words\n").find("line 7"), std::string::npos);
  schema_message("model.type = explicit\nmodel.N = 2\nmodel.n = 2\nmodel.profile = 1\ncommand = solve\ncommand.z = 2\n");
  schema_message("model.type = nonsense\ncommand = solve\n");
  schema_message("model.type = explicit\nmodel.profile = 1\ncommand = solve\ncommand.z = -1\n");  // no dims
  schema_message("model.type = explicit\nmodel.N = 2\nmodel.n = 2\nmodel.profile = 1\ncommand = demo\n");
  schema_message("model.type = explicit\nmodel.N = 2\nmodel.n = 2\nmodel.profile = 1\ncommand = validate\n"
                 "command.distribution = circular_gaussian\n");
}

TEST(ParseConfig, NegativeNoiseVarianceRejected) {
  const std::string msg = schema_message(
      "model.type = explicit\nmodel.N = 2\nmodel.n = 2\nmodel.profile = 1\ncommand = capacity\ncommand.sigma2 = -1\n");
  EXPECT_NE(msg.find("command.sigma2"), std::string::npos);
}

TEST(ParseConfig, RoundTripsThroughRender) {
  const std::vector<std::string> configs{
      kMinimal,
      "model.type = separable\nmodel.field = complex\nmodel.d = 1, 2, 3\nmodel.d_tilde = 0.5\nmodel.n = 4\n"
      "command = capacity\ncommand.sigma2 = 0.5, 1, 2\ncommand.method = both\ncommand.quad_tol = 1e-9\n"
      "solver.damping = 0.25\nsolver.continuation_start_height = 40\noutput.dir = out\n",
      "model.type = gaussian_field\nmodel.N = 8\nmodel.n = 12\nmodel.taps = 0 0 1; 1 -1 0.5-0.25i\n"
      "command = density\ncommand.grid = 0:4:81\ncommand.intervals = 0:1; 1:2.5\n",
      "model.type = gaussian_field\nmodel.N = 8\nmodel.n = 12\nmodel.taps = 0 0 1\n"
      "command = density\ncommand.grid = 0:4:81\ncommand.eta = 0.01\n",
      "model.type = block_example\nmodel.n = 32\ncommand = demo\ncommand.trials = 3\ncommand.seed = 18446744073709551615\n"
      "command.distribution = rademacher\ncommand.bins = 20\ncommand.density = true\n",
      "model.type = dx\nmodel.N = 16\nmodel.n = 32\nmodel.lambdas = 1.5\ncommand = validate\n"
      "command.z = -1, i\ncommand.n_list = 50, 100\ncommand.mc_z = -2+0.5i\ncommand.gap_threshold = 0.03\n",
      "model.type = explicit\nmodel.N = 50\nmodel.n = 100\nmodel.profile = sine_bump\nmodel.A = tiled_identity\n"
      "command = validate\nsolver.tol = 1e-11\nsolver.max_iter = 500\nsolver.anderson_depth = 0\n",
  };
  for (const auto& text : configs) {
    const RunConfig c = parse_config(text);
    const std::string canonical = render_config(c);
    EXPECT_EQ(parse_config(canonical), c) << canonical;
    EXPECT_EQ(render_config(parse_config(canonical)), canonical);
  }
}

TEST(BuildFromConfig, GeneratedProfilesAndCentering) {
  const RunConfig c = parse_config(
      "model.type = explicit\nmodel.N = 50\nmodel.n = 100\nmodel.profile = sine_bump\nmodel.A = tiled_identity\n"
      "command = solve\ncommand.z = -1\n");
  const ModelSpec m = build_model_from_config(c, ".");
  EXPECT_EQ(m.N(), 50);
  EXPECT_NEAR(m.A().rowwise().norm().maxCoeff(), 1.0, 1e-14);
  EXPECT_NEAR(m.A().rowwise().norm().minCoeff(), 1.0, 1e-14);
  EXPECT_LE(m.A().colwise().norm().maxCoeff(), 1.0 + 1e-14);
  EXPECT_NEAR(m.profile().sigma(0, 0),
              1.0 + 0.5 * std::sin(2.0 * std::numbers::pi / 50.0) * std::sin(2.0 * std::numbers::pi / 100.0), 1e-15);
  const ModelSpec big = build_model_from_config(c, ".", 400);
  EXPECT_EQ(big.N(), 200);
  EXPECT_EQ(big.n(), 400);
}

TEST(BuildFromConfig, ReadsMatrixFiles) {
  const fs::path dir = scratch("files");
  spit(dir / "profile.csv", "1,0.5\n0.25,2\n");
  spit(dir / "a.csv", "0,1\n1,0\n");
  const RunConfig c = parse_config(
      "model.type = explicit\nmodel.profile = profile.csv\nmodel.A = a.csv\ncommand = solve\ncommand.z = -1\n");
  const ModelSpec m = build_model_from_config(c, dir);
  EXPECT_EQ(m.N(), 2);
  EXPECT_EQ(m.profile().sigma(1, 1), 2.0);
  EXPECT_EQ(m.A()(0, 1), Complex(1.0, 0.0));
  EXPECT_THROW(build_model_from_config(c, dir, 4), Error);
  EXPECT_EQ(run(c, dir / "missing").exit_code, kExitConfig);
}

TEST(Run, SolveOnZeroModel) {
  const fs::path dir = scratch("zero");
  RunConfig c = parse_config(
      "model.type = explicit\nmodel.N = 3\nmodel.n = 5\nmodel.profile = 0\ncommand = solve\ncommand.z = -1\n");
  c.out_dir = dir.string();
  const RunResult r = run(c);
  EXPECT_EQ(r.exit_code, kExitOk) << r.message;
  EXPECT_EQ(slurp(dir / "solve.csv"),
            "z_re,z_im,m_re,m_im,m_tilde_re,m_tilde_im,iterations,residual\n-1,0,1,0,1,0,1,0\n");
  EXPECT_TRUE(fs::exists(dir / "summary.txt"));
}

TEST(Run, DensityAppliesDefaultEta) {
  const fs::path dir = scratch("density");
  RunConfig c = parse_config(
      "model.type = explicit\nmodel.N = 20\nmodel.n = 40\nmodel.profile = 1\ncommand = density\n"
      "command.grid = 0:3:31\ncommand.intervals = 0:4\n");
  EXPECT_FALSE(c.eta.has_value());
  c.out_dir = dir.string();
  ASSERT_EQ(run(c).exit_code, kExitOk);
  const ModelSpec m = build_model_from_config(c, ".");
  const double eta = default_eta(m, c.grid->points());
  EXPECT_NE(slurp(dir / "summary.txt").find("eta = " + format_real(eta)), std::string::npos);
  const std::string csv = slurp(dir / "density.csv");
  EXPECT_EQ(csv.rfind("lambda,density\n", 0), 0u);
  EXPECT_NE(csv.find("interval,0,4,"), std::string::npos);
}

TEST(Run, CapacityWritesBothMethods) {
  const fs::path dir = scratch("capacity");
  RunConfig c = parse_config(
      "model.type = separable\nmodel.N = 6\nmodel.n = 8\nmodel.d = 1\nmodel.d_tilde = 0.5\ncommand = capacity\n"
      "command.sigma2 = 0.5, 2\ncommand.method = both\n");
  c.out_dir = dir.string();
  ASSERT_EQ(run(c).exit_code, kExitOk);
  const std::string csv = slurp(dir / "capacity.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 5);
  EXPECT_NE(csv.find(",quadrature\n"), std::string::npos);
}

TEST(Run, CapacityWithNegativeNoiseExitsThree) {
  RunConfig c = parse_config(
      "model.type = explicit\nmodel.N = 2\nmodel.n = 2\nmodel.profile = 1\ncommand = capacity\ncommand.sigma2 = 1\n");
  c.sigma2 = {-1.0};
  c.out_dir = scratch("neg").string();
  EXPECT_EQ(run(c).exit_code, kExitConfig);
}

TEST(Run, NonConvergenceExitsTwo) {
  RunConfig c = parse_config(
      "model.type = explicit\nmodel.N = 10\nmodel.n = 10\nmodel.profile = 1\ncommand = solve\n"
      "command.z = 1+0.001i\nsolver.max_iter = 2\n");
  c.out_dir = scratch("noconv").string();
  EXPECT_EQ(run(c).exit_code, kExitSolver);
}

TEST(Run, ValidateOnMarchenkoPasturFamily) {
  const fs::path dir = scratch("validate_mp");
  RunConfig c = parse_config(
      "model.type = explicit\nmodel.N = 64\nmodel.n = 64\nmodel.profile = 1\ncommand = validate\n"
      "command.n_list = 100, 400\ncommand.seed = 1\n");
  c.out_dir = dir.string();
  const RunResult r = run(c);
  EXPECT_EQ(r.exit_code, kExitOk) << slurp(dir / "summary.txt");
  const std::string csv = slurp(dir / "validate.csv");
  EXPECT_EQ(csv.rfind("check,n,value,threshold,pass\n", 0), 0u);
  EXPECT_NE(csv.find("mp_oracle@-1,"), std::string::npos);
  EXPECT_NE(csv.find("mc_decreasing,400,"), std::string::npos);
  EXPECT_EQ(csv.find(",false"), std::string::npos);
}

TEST(Run, ValidateFailureExitsFour) {
  RunConfig c = parse_config(
      "model.type = explicit\nmodel.N = 20\nmodel.n = 20\nmodel.profile = 1\ncommand = validate\n"
      "command.n_list = 20\ncommand.trials = 2\ncommand.gap_threshold = 1e-12\n");
  c.out_dir = scratch("validate_fail").string();
  EXPECT_EQ(run(c).exit_code, kExitValidation);
}

TEST(Run, ValidateIsByteIdenticalAcrossRuns) {
  const std::string text =
      "model.type = dx\nmodel.N = 12\nmodel.n = 24\nmodel.lambdas = 1.25\ncommand = validate\n"
      "command.n_list = 24\ncommand.trials = 4\ncommand.seed = 5\ncommand.gap_threshold = 0.5\n";
  RunConfig c = parse_config(text);
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  c.out_dir = a.string();
  ASSERT_EQ(run(c).exit_code, kExitOk);
  c.out_dir = b.string();
  ASSERT_EQ(run(c).exit_code, kExitOk);
  for (const char* f : {"validate.csv", "montecarlo.csv", "summary.txt"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  EXPECT_NE(slurp(a / "validate.csv").find("companion@-1,"), std::string::npos);
}

TEST(Cli, ExitCodesAndOverrides) {
  const fs::path dir = scratch("binary");
  spit(dir / "solve.cfg", std::string(kMinimal) + "output.dir = out\n");
  EXPECT_EQ(run_cli((dir / "solve.cfg").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "out" / "solve.csv"));  // relative to the config file

  EXPECT_EQ(run_cli((dir / "solve.cfg").string() + " --tol 1e-10 --out " + (dir / "other").string()), 0);
  EXPECT_TRUE(fs::exists(dir / "other" / "solve.csv"));
  EXPECT_EQ(run_cli((dir / "solve.cfg").string() + " --tol -1"), 3);
  EXPECT_EQ(run_cli((dir / "solve.cfg").string() + " --seed 4"), 3);  // no seed for solve
  EXPECT_EQ(run_cli((dir / "missing.cfg").string()), 3);
  EXPECT_EQ(run_cli(""), 3);

  spit(dir / "neg.cfg",
       "model.type = explicit\nmodel.N = 2\nmodel.n = 2\nmodel.profile = 1\ncommand = capacity\ncommand.sigma2 = -1\n");
  EXPECT_EQ(run_cli((dir / "neg.cfg").string()), 3);
}

TEST(Cli, SampleConfigsParse) {
  for (const auto& entry : fs::directory_iterator(DETEQUIV_CONFIGS)) {
    if (entry.path().extension() != ".cfg") continue;
    const RunConfig c = parse_config(slurp(entry.path()));
    EXPECT_EQ(parse_config(render_config(c)), c) << entry.path();
    if (c.command != Command::demo) EXPECT_NO_THROW(build_model_from_config(c, entry.path().parent_path()));
  }
}
