// Command-line driver for the DPG elasticity convergence studies.
//
//   dpg-elast run --config study.cfg --method 2 --out results.csv
//   dpg-elast mesh --benchmark lshape --refine 2

#include "dpg/config.hpp"
#include "dpg/study.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kExitSolverFailure = 2;
constexpr int kExitConfigError = 3;

struct RunOptions {
  std::string config_path;
  std::optional<int> method;
  std::optional<std::string> benchmark;
  std::optional<std::string> mode;
  std::optional<int> steps;
  std::optional<int> p;
  std::optional<int> delta_p;
  std::optional<double> lambda;
  std::optional<double> mu;
  std::optional<std::string> out;
};

dpg::StudyConfig resolve_config(const RunOptions& opt) {
  dpg::StudyConfig config;
  if (!opt.config_path.empty()) config = dpg::load_config(opt.config_path);
  if (opt.method) config.method = *opt.method;
  if (opt.benchmark) config.benchmark = dpg::parse_benchmark(*opt.benchmark);
  if (opt.mode) config.mode = dpg::parse_mode(*opt.mode);
  if (opt.steps) config.steps = *opt.steps;
  if (opt.p) config.p = *opt.p;
  if (opt.delta_p) config.delta_p = *opt.delta_p;
  if (opt.lambda) config.lambda = *opt.lambda;
  if (opt.mu) config.mu = *opt.mu;
  if (opt.out) config.output = *opt.out;
  try {
    dpg::validate(config);
    dpg::study_material(config);
  } catch (const std::invalid_argument& e) {
    throw dpg::ConfigError(e.what());
  }
  return config;
}

int run_study(const RunOptions& opt) {
  dpg::StudyConfig config;
  try {
    config = resolve_config(opt);
  } catch (const dpg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }

  const dpg::StudyResult result = dpg::run_convergence_study(config);
  if (config.output.empty() || config.output == "-") {
    dpg::write_csv(std::cout, result);
  } else {
    std::ofstream out(config.output);
    if (!out) {
      std::cerr << "config error: cannot write '" << config.output << "'\n";
      return kExitConfigError;
    }
    dpg::write_csv(out, result);
  }
  if (result.failure) {
    std::cerr << "solver failure at " << *result.failure << '\n';
    return kExitSolverFailure;
  }
  return 0;
}

int dump_mesh(const std::string& benchmark, int n0, int refinements, int p) {
  dpg::StudyConfig config;
  try {
    config.benchmark = dpg::parse_benchmark(benchmark);
  } catch (const dpg::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
  config.n0 = n0;
  dpg::Mesh mesh = dpg::study_initial_mesh(config);
  for (int i = 0; i < refinements; ++i) mesh = dpg::refine_uniform(mesh);
  const dpg::DegreeMap degrees = dpg::DegreeMap::uniform(mesh, p);
  mesh.dump(std::cout, degrees.element);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DPG solver for 2D linear elasticity"};
  app.require_subcommand(1);

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a convergence study and write a CSV report");
  run_cmd->add_option("--config", run.config_path, "Key = value configuration file");
  run_cmd->add_option("--method", run.method, "DPG method (1 or 2)");
  run_cmd->add_option("--benchmark", run.benchmark, "smooth or lshape");
  run_cmd->add_option("--mode", run.mode, "uniform_h, uniform_p, adaptive_h or adaptive_hp");
  run_cmd->add_option("--steps", run.steps, "Number of solves");
  run_cmd->add_option("--p", run.p, "Initial polynomial degree");
  run_cmd->add_option("--delta-p", run.delta_p, "Test space enrichment");
  run_cmd->add_option("--lambda", run.lambda, "First Lame parameter");
  run_cmd->add_option("--mu", run.mu, "Shear modulus");
  run_cmd->add_option("--out", run.out, "CSV output path (- for stdout)");

  std::string mesh_benchmark = "smooth";
  int mesh_n0 = 0;
  int mesh_refine = 0;
  int mesh_p = 1;
  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Print a benchmark mesh");
  mesh_cmd->add_option("--benchmark", mesh_benchmark, "smooth or lshape");
  mesh_cmd->add_option("--n0", mesh_n0, "Initial cells per side (0 for the default)");
  mesh_cmd->add_option("--refine", mesh_refine, "Uniform refinements");
  mesh_cmd->add_option("--p", mesh_p, "Element degree written to the dump");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  try {
    if (run_cmd->parsed()) return run_study(run);
    return dump_mesh(mesh_benchmark, mesh_n0, mesh_refine, mesh_p);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
}
