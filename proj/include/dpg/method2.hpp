#pragma once

#include "dpg/assembly.hpp"
#include "dpg/material.hpp"
#include "dpg/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>

namespace dpg {

/// Raised when the bordered system's Schur scalar d - c' E~^-1 c vanishes.
class BorderedSolveError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// ell_j = Q0^-1 (A sigma_j, I) over free dofs; zero off the stress block.
Eigen::VectorXd ell_vector(const Mesh& mesh, const DegreeMap& degrees, const Material& material,
                           const DofLayout& layout);

/// Couplings of the multiplier alpha with the other unknowns, computed from
/// the optimal test function of alpha (element-local Gram solves).
struct BorderTerms {
  Eigen::VectorXd c;         // free dofs
  Eigen::VectorXd c_pinned;  // pinned trace dofs
  double d = 0.0;
};

BorderTerms border_terms(const Mesh& mesh, const DegreeMap& degrees, const Material& material,
                         const DofLayout& layout);

/// [E + ell ell', c; c', d] [x; alpha] = [g; border_rhs].
struct BorderedSystem {
  const GlobalSystem* base = nullptr;  // E and g (its rhs)
  Eigen::VectorXd ell;
  Eigen::VectorXd c;
  double d = 0.0;
  /// Contribution of pinned trace values to the alpha row, -c_pinned' x_p.
  double border_rhs = 0.0;
};

BorderedSystem make_bordered_system(const Mesh& mesh, const DegreeMap& degrees, const Material& material,
                                    const DofLayout& layout, const GlobalSystem& base);

using LinearSolve = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

/// Applies (E + ell ell')^-1 from a solver for E. The constructor spends
/// one E-solve on E^-1 ell; each solve() spends one more.
class ShermanMorrison {
 public:
  ShermanMorrison(LinearSolve solve_e, Eigen::VectorXd ell);
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;

 private:
  LinearSolve solve_e_;
  Eigen::VectorXd ell_;
  Eigen::VectorXd e_inv_ell_;
  double a_ = 1.0;
};

struct SecondMethodSolution {
  Eigen::VectorXd x;
  double alpha = 0.0;
};

/// Bordered solve with one factorization of E and three E-solves in total.
/// Throws BorderedSolveError if d - c' E~^-1 c = 0.
SecondMethodSolution solve_bordered(const LinearSolve& solve_e, const Eigen::VectorXd& g, const Eigen::VectorXd& ell,
                                    const Eigen::VectorXd& c, double d, double border_rhs = 0.0);

SecondMethodSolution solve_second_method(const BorderedSystem& bordered, SolverKind kind = SolverKind::cholesky);

}  // namespace dpg
