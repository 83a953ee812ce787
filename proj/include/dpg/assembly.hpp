#pragma once

#include "dpg/dpg_core.hpp"
#include "dpg/material.hpp"
#include "dpg/mesh.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <functional>
#include <memory>
#include <vector>

namespace dpg {

enum class DofKind : unsigned char { stress, displacement, trace, flux };

/// One term of a local-to-global expansion: local value += coef * x[index].
struct DofTerm {
  int index = 0;
  double coef = 0.0;
};

/// Maps an element's local trial vector onto global unknowns:
///   x_local = C_free x_free + C_pinned x_pinned.
/// Interior (sigma, u) local dofs map one-to-one onto a contiguous range.
struct ElementDofMap {
  int element = -1;
  TrialLayout trial;
  int interior_offset = 0;
  std::vector<std::vector<DofTerm>> skeleton_free;    // indexed by local - n_interior
  std::vector<std::vector<DofTerm>> skeleton_pinned;  // indexed by local - n_interior
};

/// Boundary trace edge whose trace dofs are pinned to Dirichlet data.
struct PinnedEdge {
  int edge = -1;
  int degree = 0;
  Point a, b;                         // vertex 0 and vertex 1
  std::array<int, 2> vertex_dofs{};   // pinned index of component 0 at a, b
  int bubble_offset = -1;             // pinned index of first bubble, component 0
};

/// Global numbering. Free dofs: element interiors first (element-major), then
/// trace vertex dofs, then per edge its trace bubbles and flux dofs. Boundary
/// trace dofs are pinned (never free); flux dofs are never pinned.
struct DofLayout {
  int num_free = 0;
  int num_interior = 0;
  int num_pinned = 0;
  std::vector<ElementDofMap> elements;  // active elements in mesh order
  std::vector<DofKind> kinds;           // per free dof
  std::vector<PinnedEdge> pinned_edges;
  std::vector<Point> pinned_vertices;   // location per pinned vertex pair
  std::vector<int> pinned_vertex_dof;   // pinned index of component 0

  int count(DofKind kind) const;

  /// Local trial coefficients of element entry `i` (index into `elements`).
  Eigen::VectorXd local_coefficients(std::size_t i, const Eigen::VectorXd& x_free,
                                     const Eigen::VectorXd& pinned_values) const;
};

DofLayout build_dof_layout(const Mesh& mesh, const DegreeMap& degrees);

struct AssemblyOptions {
  /// Eliminate interior (sigma, u) blocks element by element.
  bool condense = false;
};

/// Interior block of one element kept for back-substitution.
struct InteriorBlock {
  int offset = 0;
  int size = 0;
  Eigen::LLT<Eigen::MatrixXd> factor;  // K_II
  Eigen::MatrixXd coupling;            // K_IS in global skeleton columns
  std::vector<int> skeleton;           // global free skeleton indices
};

/// The global DPG system E x = g on free dofs.
struct GlobalSystem {
  int size = 0;
  int num_interior = 0;
  bool condensed = false;
  /// Full E (size x size), or the skeleton Schur complement when condensed
  /// (indices shifted by num_interior).
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd load;                  // B^T G^-1 l scattered onto free dofs
  Eigen::SparseMatrix<double> coupling;  // free x pinned block of E
  Eigen::VectorXd pinned_values;
  Eigen::VectorXd rhs;                   // load - coupling * pinned_values
  std::vector<InteriorBlock> blocks;     // condensed only
};

GlobalSystem assemble(const Mesh& mesh, const DegreeMap& degrees, const Material& material, const LoadFunction& load,
                      const DofLayout& layout, const AssemblyOptions& options = {});

using BoundaryData = std::function<Eigen::Vector2d(const Point&)>;

/// Pins boundary trace dofs: vertex values interpolate the data, edge bubbles
/// hold the L2 projection of the remainder. Moves pinned columns to the rhs.
void apply_dirichlet(GlobalSystem& system, const DofLayout& layout, const BoundaryData& data);

/// Pinned trace values for the given data (same rule as apply_dirichlet).
Eigen::VectorXd dirichlet_values(const DofLayout& layout, const BoundaryData& data);

enum class SolverKind { cholesky, conjugate_gradient };

/// Factorization of a GlobalSystem; solves E x = v for full free-size v.
class SpdSolver {
 public:
  explicit SpdSolver(const GlobalSystem& system, SolverKind kind = SolverKind::cholesky);
  ~SpdSolver();
  SpdSolver(SpdSolver&&) noexcept;
  SpdSolver& operator=(SpdSolver&&) noexcept;

  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Throws FactorizationError if the system is not SPD.
Eigen::VectorXd solve_spd(const GlobalSystem& system, SolverKind kind = SolverKind::cholesky);

/// Per-element energy error indicators eta_K for a solved system.
std::vector<double> error_indicators(const Mesh& mesh, const DegreeMap& degrees, const Material& material,
                                     const LoadFunction& load, const DofLayout& layout, const Eigen::VectorXd& x_free,
                                     const Eigen::VectorXd& pinned_values);

}  // namespace dpg
