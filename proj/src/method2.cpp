#include "dpg/method2.hpp"

#include "dpg/dpg_core.hpp"

#include <cmath>

namespace dpg {

namespace {

// Q0^-1 tr(A tau) = (Q / Q0) tr(tau) for a homogeneous isotropic material.
double trace_scale(const Material& material) { return material.Q / material.Q0; }

}  // namespace

Eigen::VectorXd ell_vector(const Mesh& mesh, const DegreeMap& /*degrees*/, const Material& material,
                           const DofLayout& layout) {
  Eigen::VectorXd ell = Eigen::VectorXd::Zero(layout.num_free);
  const double scale = trace_scale(material);
  for (const ElementDofMap& map : layout.elements) {
    const Eigen::VectorXd integrals = integrate_basis(mesh, map.element, map.trial.degree);
    const int n = map.trial.n_scalar;
    ell.segment(map.interior_offset + map.trial.sigma_offset(0), n) = scale * integrals;
    ell.segment(map.interior_offset + map.trial.sigma_offset(2), n) = scale * integrals;
  }
  return ell;
}

BorderTerms border_terms(const Mesh& mesh, const DegreeMap& degrees, const Material& material,
                         const DofLayout& layout) {
  BorderTerms out;
  out.c = Eigen::VectorXd::Zero(layout.num_free);
  out.c_pinned = Eigen::VectorXd::Zero(layout.num_pinned);
  const double scale = trace_scale(material);
  for (const ElementDofMap& map : layout.elements) {
    const LocalSystem local = build_local_system(mesh, degrees, map.element, material, {});
    const LocalTestSpace test(map.element, local.test_degree);
    const Eigen::VectorXd integrals = integrate_basis(mesh, map.element, local.test_degree);

    // Right-hand side Q0^-1 (alpha I, A dtau) with alpha = 1. The beta block
    // has a zero right-hand side, so the beta part of the test function is 0.
    Eigen::VectorXd r = Eigen::VectorXd::Zero(test.size());
    r.segment(test.tau_offset(0), test.n_scalar) = scale * integrals;
    r.segment(test.tau_offset(2), test.n_scalar) = scale * integrals;
    const Eigen::LLT<Eigen::MatrixXd> llt(local.gram);
    if (llt.info() != Eigen::Success) throw FactorizationError("border_terms: Gram matrix is not positive definite");
    const Eigen::VectorXd t = llt.solve(r);

    out.d += r.dot(t);
    const Eigen::VectorXd c_local = local.bmat.transpose() * t;
    const int n_int = map.trial.n_interior();
    out.c.segment(map.interior_offset, n_int) += c_local.head(n_int);
    for (std::size_t k = 0; k < map.skeleton_free.size(); ++k) {
      const double v = c_local[n_int + static_cast<int>(k)];
      for (const DofTerm& term : map.skeleton_free[k]) out.c[term.index] += term.coef * v;
      for (const DofTerm& term : map.skeleton_pinned[k]) out.c_pinned[term.index] += term.coef * v;
    }
  }
  return out;
}

BorderedSystem make_bordered_system(const Mesh& mesh, const DegreeMap& degrees, const Material& material,
                                    const DofLayout& layout, const GlobalSystem& base) {
  BorderedSystem b;
  b.base = &base;
  b.ell = ell_vector(mesh, degrees, material, layout);
  BorderTerms border = border_terms(mesh, degrees, material, layout);
  b.c = std::move(border.c);
  b.d = border.d;
  b.border_rhs = base.pinned_values.size() == border.c_pinned.size() ? -border.c_pinned.dot(base.pinned_values) : 0.0;
  return b;
}

ShermanMorrison::ShermanMorrison(LinearSolve solve_e, Eigen::VectorXd ell)
    : solve_e_(std::move(solve_e)), ell_(std::move(ell)) {
  e_inv_ell_ = solve_e_(ell_);
  a_ = 1.0 / (1.0 + ell_.dot(e_inv_ell_));
}

Eigen::VectorXd ShermanMorrison::solve(const Eigen::VectorXd& v) const {
  Eigen::VectorXd y = solve_e_(v);
  y -= a_ * ell_.dot(y) * e_inv_ell_;
  return y;
}

SecondMethodSolution solve_bordered(const LinearSolve& solve_e, const Eigen::VectorXd& g, const Eigen::VectorXd& ell,
                                    const Eigen::VectorXd& c, double d, double border_rhs) {
  const ShermanMorrison sm(solve_e, ell);
  const Eigen::VectorXd x_c = sm.solve(c);
  const Eigen::VectorXd x_g = sm.solve(g);
  const double schur = d - c.dot(x_c);
  if (schur == 0.0 || !std::isfinite(schur))
    throw BorderedSolveError("bordered system: d - c' E~^-1 c vanishes");
  SecondMethodSolution s;
  s.alpha = (border_rhs - c.dot(x_g)) / schur;
  s.x = x_g - s.alpha * x_c;
  return s;
}

SecondMethodSolution solve_second_method(const BorderedSystem& bordered, SolverKind kind) {
  if (bordered.base == nullptr) throw std::invalid_argument("solve_second_method: no base system");
  const GlobalSystem& base = *bordered.base;
  const SpdSolver solver(base, kind);
  return solve_bordered([&](const Eigen::VectorXd& v) { return solver.solve(v); }, base.rhs, bordered.ell,
                        bordered.c, bordered.d, bordered.border_rhs);
}

}  // namespace dpg
