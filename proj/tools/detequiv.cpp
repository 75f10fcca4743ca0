// detequiv <config> [--seed N] [--trials N] [--tol X] [--out DIR]

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "detequiv/detequiv.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Deterministic equivalents for information-plus-noise matrices"};
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::optional<double> tol;
  std::optional<std::string> out;
  app.add_option("config", config_path, "run configuration file")->required();
  app.add_option("--seed", seed, "override command.seed");
  app.add_option("--trials", trials, "override command.trials");
  app.add_option("--tol", tol, "override solver.tol");
  app.add_option("--out", out, "override output.dir");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : detequiv::kExitConfig;
  }

  detequiv::RunConfig config;
  std::filesystem::path base;
  try {
    std::ifstream in(config_path);
    if (!in) throw detequiv::Error(detequiv::Errc::IoError, "cannot open '" + config_path + "'");
    std::ostringstream text;
    text << in.rdbuf();
    config = detequiv::parse_config(text.str());
    base = std::filesystem::absolute(config_path).parent_path();
    // flags override config keys
    if (seed || trials) {
      if (config.command != detequiv::Command::validate && config.command != detequiv::Command::demo)
        throw detequiv::Error(detequiv::Errc::SchemaError, "--seed/--trials apply to validate and demo only");
      if (seed) config.seed = *seed;
      if (trials) {
        if (*trials < 1) throw detequiv::Error(detequiv::Errc::SchemaError, "--trials must be >= 1");
        config.trials = *trials;
      }
    }
    if (tol) {
      config.solver.tol = *tol;
      config.solver.validate();
    }
    if (out) {
      config.out_dir = std::filesystem::absolute(*out).string();
    }
  } catch (const std::exception& e) {
    std::cerr << "detequiv: " << e.what() << '\n';
    return detequiv::kExitConfig;
  }

  const detequiv::RunResult result = detequiv::run(config, base);
  if (result.exit_code != 0) std::cerr << "detequiv: " << result.message << '\n';
  for (const auto& f : result.files) std::cout << f << '\n';
  return result.exit_code;
}
