#pragma once

#include "dpg/assembly.hpp"
#include "dpg/exact.hpp"
#include "dpg/material.hpp"
#include "dpg/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace dpg {

enum class Benchmark { smooth, lshape };
enum class StudyMode { uniform_h, uniform_p, adaptive_h, adaptive_hp };

struct StudyConfig {
  Benchmark benchmark = Benchmark::smooth;
  int method = 1;
  StudyMode mode = StudyMode::uniform_h;
  int p = 1;
  int delta_p = 2;
  int steps = 4;
  /// Lame parameters; unset means the benchmark default.
  std::optional<double> lambda;
  std::optional<double> mu;
  double fraction = 0.5;
  std::string output;
  /// Initial mesh cells per side; 0 means the benchmark default.
  int n0 = 0;
  /// Eliminate element interiors before the global solve.
  bool condense = true;
  SolverKind solver = SolverKind::cholesky;
  bool best_approximation = true;
  /// Record wall times; off gives bit-identical CSV files across runs.
  bool timing = true;
};

/// Throws std::invalid_argument when a field is out of range.
void validate(const StudyConfig& config);

/// Material of a run: plane strain with (1, 1) for the smooth benchmark,
/// plane-stress steel scaled to unit shear modulus (123/79.3, 1) for the
/// L-shape, unless overridden.
Material study_material(const StudyConfig& config);
ExactSolution study_benchmark(const StudyConfig& config, const Material& material);
Mesh study_initial_mesh(const StudyConfig& config);

struct ReportRow {
  int step = 0;
  long long dofs = 0;
  double h_min = 0.0;
  int p_max = 0;
  double err_sigma = 0.0;
  double err_u = 0.0;
  double err_combined = 0.0;  // relative
  double eta = 0.0;
  double best_combined = 0.0;  // relative; 0 when not computed
  double wall_time = 0.0;
};

/// Discrete solution on one mesh: free and pinned coefficients.
struct Solution {
  const DofLayout* layout = nullptr;
  Eigen::VectorXd x_free;
  Eigen::VectorXd pinned;
};

struct ErrorPair {
  double sigma = 0.0;
  double u = 0.0;
};

/// Quadrature used for error integrals. Elements touching the singular
/// point are integrated on a geometrically graded subdivision.
struct ErrorQuadrature {
  /// Gauss points per direction; 0 means test degree + 2.
  int points = 0;
  int corner_levels = 10;
};

ErrorPair l2_errors(const Mesh& mesh, const DegreeMap& degrees, const Solution& solution, const ExactSolution& exact,
                    const ErrorQuadrature& quadrature = {});
ErrorPair best_approximation_errors(const Mesh& mesh, const DegreeMap& degrees, const ExactSolution& exact,
                                    const ErrorQuadrature& quadrature = {});
/// L2 norms of the exact sigma and u.
ErrorPair exact_norms(const Mesh& mesh, const DegreeMap& degrees, const ExactSolution& exact,
                      const ErrorQuadrature& quadrature = {});

/// Elements with eta_K >= fraction * max eta over active elements. Returns
/// element ids; empty if every indicator is zero.
std::vector<int> greedy_mark(const Mesh& mesh, const std::vector<double>& indicators, double fraction = 0.5);

struct HpSplit {
  std::vector<int> h_set;
  std::vector<int> p_set;
};

/// Marked elements with the singular point among their vertices go to h,
/// the rest to p.
HpSplit hp_decide(const std::vector<int>& marked, const Mesh& mesh, const std::optional<Point>& singular_point);

/// Least-squares slope of log(y) against log(x) over the last `last` points.
double observed_rate(const std::vector<double>& x, const std::vector<double>& y, int last = 3);

/// One solved discretization with everything a study step reports.
struct StepResult {
  ReportRow row;
  std::vector<double> indicators;  // by element id
};

/// Solves one mesh with the given configuration.
StepResult solve_step(const Mesh& mesh, const DegreeMap& degrees, const StudyConfig& config,
                      const Material& material, const ExactSolution& exact);

struct StudyResult {
  std::vector<ReportRow> rows;
  /// Set when a solve failed; rows hold the steps completed before it.
  std::optional<std::string> failure;
};

/// Called after every successful solve with the mesh and degrees it used.
using StepObserver = std::function<void(const Mesh&, const DegreeMap&, const StepResult&)>;

StudyResult run_convergence_study(const StudyConfig& config, const StepObserver& observer = {});

/// Header plus one line per row, 12 significant digits.
void write_csv(std::ostream& out, const StudyResult& result);

}  // namespace dpg
