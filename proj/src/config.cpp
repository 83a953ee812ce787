#include "dpg/config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <string>

namespace dpg {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size())
    throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) + "'");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw ConfigError("invalid boolean '" + std::string(value) + "' for key '" + std::string(key) + "'");
}

}  // namespace

Benchmark parse_benchmark(std::string_view name) {
  if (name == "smooth") return Benchmark::smooth;
  if (name == "lshape" || name == "l_shape") return Benchmark::lshape;
  throw ConfigError("unknown benchmark '" + std::string(name) + "'");
}

StudyMode parse_mode(std::string_view name) {
  if (name == "uniform_h") return StudyMode::uniform_h;
  if (name == "uniform_p") return StudyMode::uniform_p;
  if (name == "adaptive_h") return StudyMode::adaptive_h;
  if (name == "adaptive_hp") return StudyMode::adaptive_hp;
  throw ConfigError("unknown mode '" + std::string(name) + "'");
}

std::string to_string(Benchmark benchmark) { return benchmark == Benchmark::lshape ? "lshape" : "smooth"; }

std::string to_string(StudyMode mode) {
  switch (mode) {
    case StudyMode::uniform_h: return "uniform_h";
    case StudyMode::uniform_p: return "uniform_p";
    case StudyMode::adaptive_h: return "adaptive_h";
    case StudyMode::adaptive_hp: return "adaptive_hp";
  }
  return "uniform_h";
}

void set_config_value(StudyConfig& config, std::string_view key, std::string_view value) {
  if (key == "benchmark") {
    config.benchmark = parse_benchmark(value);
  } else if (key == "method") {
    config.method = parse_number<int>(key, value);
  } else if (key == "mode") {
    config.mode = parse_mode(value);
  } else if (key == "p") {
    config.p = parse_number<int>(key, value);
  } else if (key == "delta_p") {
    config.delta_p = parse_number<int>(key, value);
  } else if (key == "steps") {
    config.steps = parse_number<int>(key, value);
  } else if (key == "lambda") {
    config.lambda = parse_number<double>(key, value);
  } else if (key == "mu") {
    config.mu = parse_number<double>(key, value);
  } else if (key == "fraction") {
    config.fraction = parse_number<double>(key, value);
  } else if (key == "output") {
    config.output = std::string(value);
  } else if (key == "n0") {
    config.n0 = parse_number<int>(key, value);
  } else if (key == "condense") {
    config.condense = parse_bool(key, value);
  } else if (key == "solver") {
    if (value == "cholesky")
      config.solver = SolverKind::cholesky;
    else if (value == "cg")
      config.solver = SolverKind::conjugate_gradient;
    else
      throw ConfigError("unknown solver '" + std::string(value) + "'");
  } else if (key == "best_approximation") {
    config.best_approximation = parse_bool(key, value);
  } else if (key == "timing") {
    config.timing = parse_bool(key, value);
  } else {
    throw ConfigError("unknown key '" + std::string(key) + "'");
  }
}

StudyConfig parse_config(std::istream& in, StudyConfig base) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    const std::string_view key = trim(view.substr(0, eq));
    const std::string_view value = trim(view.substr(eq + 1));
    try {
      set_config_value(base, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return base;
}

StudyConfig load_config(const std::string& path, StudyConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace dpg
