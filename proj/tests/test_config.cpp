#include "dpg/config.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace dpg;

namespace {

// Runs the CLI with the given arguments and returns its exit status.
int run_cli(const std::string& args) {
  const std::string command = std::string(DPG_ELAST_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(command.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("dpg_elast_test_" + name);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("parse_config: every key") {
  std::istringstream in(R"(# L-shape study
benchmark = lshape
method = 2
mode = adaptive_hp   # trailing comment
p = 2
delta_p = 3
steps = 7
lambda = 1.5
mu = 0.25
fraction = 0.4
output = out.csv
n0 = 3
condense = false
solver = cg
best_approximation = no
timing = off
)");
  const StudyConfig c = parse_config(in);
  CHECK(c.benchmark == Benchmark::lshape);
  CHECK(c.method == 2);
  CHECK(c.mode == StudyMode::adaptive_hp);
  CHECK(c.p == 2);
  CHECK(c.delta_p == 3);
  CHECK(c.steps == 7);
  CHECK(c.lambda == 1.5);
  CHECK(c.mu == 0.25);
  CHECK(c.fraction == 0.4);
  CHECK(c.output == "out.csv");
  CHECK(c.n0 == 3);
  CHECK_FALSE(c.condense);
  CHECK(c.solver == SolverKind::conjugate_gradient);
  CHECK_FALSE(c.best_approximation);
  CHECK_FALSE(c.timing);
}

TEST_CASE("parse_config: defaults are kept for missing keys") {
  std::istringstream in("\n   \n# nothing\n");
  const StudyConfig c = parse_config(in);
  CHECK(c.benchmark == Benchmark::smooth);
  CHECK(c.p == 1);
  CHECK(c.delta_p == 2);
  CHECK(c.fraction == 0.5);
  CHECK_FALSE(c.lambda.has_value());
}

TEST_CASE("parse_config: errors name the line") {
  auto message = [](const std::string& text) {
    std::istringstream in(text);
    try {
      parse_config(in);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string();
  };
  CHECK(message("p = 1\ncolour = red\n").find("line 2") != std::string::npos);
  CHECK(message("p = one\n").find("line 1") != std::string::npos);
  CHECK(message("p = 1.5\n").find("invalid value") != std::string::npos);
  CHECK(message("steps\n").find("expected key = value") != std::string::npos);
  CHECK(message("benchmark = cube\n").find("unknown benchmark") != std::string::npos);
  CHECK(message("mode = random\n").find("unknown mode") != std::string::npos);
  CHECK(message("condense = maybe\n").find("invalid boolean") != std::string::npos);
  CHECK(message("solver = lu\n").find("unknown solver") != std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/dpg.cfg"), ConfigError);
}

TEST_CASE("names round trip") {
  for (Benchmark b : {Benchmark::smooth, Benchmark::lshape}) CHECK(parse_benchmark(to_string(b)) == b);
  for (StudyMode m : {StudyMode::uniform_h, StudyMode::uniform_p, StudyMode::adaptive_h, StudyMode::adaptive_hp})
    CHECK(parse_mode(to_string(m)) == m);
  CHECK(parse_benchmark("l_shape") == Benchmark::lshape);
}

TEST_CASE("CLI: successful run writes the CSV") {
  const auto cfg = temp_file("ok.cfg");
  const auto csv = temp_file("ok.csv");
  std::ofstream(cfg) << "steps = 2\ntiming = false\n";
  CHECK(run_cli("run --config " + cfg.string() + " --p 2 --out " + csv.string()) == 0);
  const std::string s = read_file(csv);
  CHECK(s.rfind("step,dofs,", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 3);
  CHECK(s.find("\n1,") != std::string::npos);

  // Command-line flags override the file.
  CHECK(run_cli("run --config " + cfg.string() + " --steps 1 --method 2 --out " + csv.string()) == 0);
  const std::string one = read_file(csv);
  CHECK(std::count(one.begin(), one.end(), '\n') == 2);
  std::filesystem::remove(cfg);
  std::filesystem::remove(csv);
}

TEST_CASE("CLI: configuration errors exit with 3") {
  const auto cfg = temp_file("bad.cfg");
  std::ofstream(cfg) << "steps = 0\n";
  CHECK(run_cli("run --config " + cfg.string()) == 3);
  std::ofstream(cfg) << "unknown_key = 1\n";
  CHECK(run_cli("run --config " + cfg.string()) == 3);
  std::filesystem::remove(cfg);
  CHECK(run_cli("run --config /nonexistent/dpg.cfg") == 3);
  CHECK(run_cli("run --benchmark cube") == 3);
  CHECK(run_cli("run --method 5") == 3);
  CHECK(run_cli("run --p notanumber") == 3);
  CHECK(run_cli("run --mu 1e-320") == 3);
  CHECK(run_cli("") == 3);
}

TEST_CASE("CLI: solver failure exits with 2 and keeps a diagnostic row") {
  const auto csv = temp_file("fail.csv");
  CHECK(run_cli("run --steps 1 --lambda 1e300 --out " + csv.string()) == 2);
  CHECK(read_file(csv).find("# solver failure at step 0") != std::string::npos);
  std::filesystem::remove(csv);
}

TEST_CASE("CLI: mesh dump") {
  CHECK(run_cli("mesh --benchmark lshape --refine 1") == 0);
  CHECK(run_cli("mesh --benchmark cube") == 3);
}
