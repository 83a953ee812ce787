#include "dpg/dpg_core.hpp"

#include <cmath>

namespace dpg {

namespace {

/// Basis values with physical gradients and weights w |J| at a 2D rule.
struct ElementTable {
  Eigen::MatrixXd values;  // n_basis x n_points
  Eigen::MatrixXd dx;
  Eigen::MatrixXd dy;
  Eigen::VectorXd weights;
  std::vector<Point> points;
};

ElementTable tabulate(const Mesh& mesh, int element, int degree, const QuadratureRule2D& rule) {
  const ShapeTable ref = tabulate_quad_basis(degree, rule);
  const int nq = static_cast<int>(rule.size());
  ElementTable t;
  t.values = ref.values;
  t.dx.resize(ref.values.rows(), nq);
  t.dy.resize(ref.values.rows(), nq);
  t.weights.resize(nq);
  t.points.resize(nq);
  for (int q = 0; q < nq; ++q) {
    const auto [x, J] = mesh.reference_map(element, Point(rule.points[q][0], rule.points[q][1]));
    const double det = J.determinant();
    if (!(det > 0.0)) throw std::runtime_error("degenerate element Jacobian");
    const Eigen::Matrix2d Jit = J.inverse().transpose();
    t.dx.col(q) = Jit(0, 0) * ref.d_xi.col(q) + Jit(0, 1) * ref.d_eta.col(q);
    t.dy.col(q) = Jit(1, 0) * ref.d_xi.col(q) + Jit(1, 1) * ref.d_eta.col(q);
    t.weights[q] = rule.weights[q] * det;
    t.points[q] = x;
  }
  return t;
}

Eigen::MatrixXd weighted_product(const Eigen::MatrixXd& a, const Eigen::VectorXd& w, const Eigen::MatrixXd& b) {
  return a * w.asDiagonal() * b.transpose();
}

int element_rule_points(int test_degree) { return test_degree + 2; }

}  // namespace

Eigen::VectorXd integrate_basis(const Mesh& mesh, int element, int degree) {
  const ElementTable t = tabulate(mesh, element, degree, tensor_gauss_rule(degree + 2));
  return t.values * t.weights;
}

Point side_reference_point(int side, double s) {
  switch (side) {
    case 0: return Point(s, -1.0);
    case 1: return Point(1.0, s);
    case 2: return Point(-s, 1.0);
    default: return Point(-1.0, -s);
  }
}

TrialLayout make_trial_layout(const Mesh& mesh, const DegreeMap& degrees, int element) {
  if (!mesh.is_active(element)) throw std::invalid_argument("make_trial_layout: inactive element");
  TrialLayout t;
  t.element = element;
  t.degree = degrees.element.at(element);
  t.n_scalar = quad_dim(t.degree);
  int offset = t.n_interior();
  for (int side = 0; side < 4; ++side)
    for (const SideSegment& seg : mesh.side_segments(element, side)) {
      TrialSegment ts;
      ts.side = side;
      ts.segment = seg;
      ts.trace_degree = degrees.trace_degree(mesh, seg.edge);
      ts.flux_degree = degrees.flux_degree(seg.edge);
      ts.flux_sign = mesh.normal_sign(element, seg.edge);
      ts.trace_offset = offset;
      offset += 2 * (ts.trace_degree + 1);
      ts.flux_offset = offset;
      offset += 2 * (ts.flux_degree + 1);
      t.segments.push_back(ts);
    }
  t.size = offset;
  return t;
}

Eigen::MatrixXd local_gram(const Mesh& mesh, int element, int test_degree) {
  const LocalTestSpace test(element, test_degree);
  const QuadratureRule2D rule = tensor_gauss_rule(element_rule_points(test_degree));
  const ElementTable t = tabulate(mesh, element, test_degree, rule);
  const Eigen::MatrixXd M = weighted_product(t.values, t.weights, t.values);
  const Eigen::MatrixXd Kxx = weighted_product(t.dx, t.weights, t.dx);
  const Eigen::MatrixXd Kyy = weighted_product(t.dy, t.weights, t.dy);
  const Eigen::MatrixXd Kxy = weighted_product(t.dx, t.weights, t.dy);

  const int n = test.n_scalar;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(test.size(), test.size());
  auto block = [&](int i, int j) { return G.block(i * n, j * n, n, n); };
  // (tau, tau') with tau_12 counted twice, plus (div tau, div tau') where
  // div of the 11, 12, 22 components is (dx, 0), (dy, dx), (0, dy).
  block(0, 0) = M + Kxx;
  block(1, 1) = 2.0 * M + Kxx + Kyy;
  block(2, 2) = M + Kyy;
  block(0, 1) = Kxy;
  block(1, 0) = Kxy.transpose();
  block(1, 2) = Kxy;
  block(2, 1) = Kxy.transpose();
  const Eigen::MatrixXd H1 = M + Kxx + Kyy;
  block(3, 3) = H1;
  block(4, 4) = H1;
  return G;
}

CouplingTerms local_bmat(const Mesh& mesh, int element, const TrialLayout& trial, int test_degree,
                         const Material& material, const LoadFunction& load) {
  const LocalTestSpace test(element, test_degree);
  const int nt = test.n_scalar;
  const int ns = trial.n_scalar;
  const QuadratureRule2D rule = tensor_gauss_rule(element_rule_points(test_degree));
  const ElementTable te = tabulate(mesh, element, test_degree, rule);
  const ShapeTable tr = tabulate_quad_basis(trial.degree, rule);

  CouplingTerms out;
  out.bmat = Eigen::MatrixXd::Zero(test.size(), trial.size);
  out.load = Eigen::VectorXd::Zero(test.size());
  Eigen::MatrixXd& B = out.bmat;

  const Eigen::MatrixXd Mx = weighted_product(te.values, te.weights, tr.values);
  const Eigen::MatrixXd Dx = weighted_product(te.dx, te.weights, tr.values);
  const Eigen::MatrixXd Dy = weighted_product(te.dy, te.weights, tr.values);

  // (A sigma, tau) = P sigma:tau + (Q - P)/2 tr(sigma) tr(tau)
  const double P = material.P, Q = material.Q;
  const double diag = P + 0.5 * (Q - P), cross = 0.5 * (Q - P);
  B.block(test.tau_offset(0), trial.sigma_offset(0), nt, ns) = diag * Mx;
  B.block(test.tau_offset(0), trial.sigma_offset(2), nt, ns) = cross * Mx;
  B.block(test.tau_offset(2), trial.sigma_offset(0), nt, ns) = cross * Mx;
  B.block(test.tau_offset(2), trial.sigma_offset(2), nt, ns) = diag * Mx;
  B.block(test.tau_offset(1), trial.sigma_offset(1), nt, ns) = 2.0 * P * Mx;

  // (u, div tau)
  B.block(test.tau_offset(0), trial.u_offset(0), nt, ns) = Dx;
  B.block(test.tau_offset(1), trial.u_offset(0), nt, ns) = Dy;
  B.block(test.tau_offset(1), trial.u_offset(1), nt, ns) = Dx;
  B.block(test.tau_offset(2), trial.u_offset(1), nt, ns) = Dy;

  // -(sigma, grad v); sign chosen so that (f, v) is the load for div sigma = f.
  B.block(test.v_offset(0), trial.sigma_offset(0), nt, ns) = -Dx;
  B.block(test.v_offset(0), trial.sigma_offset(1), nt, ns) = -Dy;
  B.block(test.v_offset(1), trial.sigma_offset(1), nt, ns) = -Dx;
  B.block(test.v_offset(1), trial.sigma_offset(2), nt, ns) = -Dy;

  if (load) {
    for (std::size_t q = 0; q < te.points.size(); ++q) {
      const Eigen::Vector2d f = load(te.points[q]);
      out.load.segment(test.v_offset(0), nt) += te.weights[q] * f.x() * te.values.col(q);
      out.load.segment(test.v_offset(1), nt) += te.weights[q] * f.y() * te.values.col(q);
    }
  }

  // Skeleton terms: -<u_hat, tau n> and +<v, sigma_hat_n>.
  for (const TrialSegment& seg : trial.segments) {
    const auto [normal, side_length] = mesh.side_normal(element, seg.side);
    const int nq = test_degree + std::max(seg.trace_degree, seg.flux_degree) / 2 + 2;
    const QuadratureRule line = gauss_rule(nq);
    const double jac = 0.5 * side_length * 0.5 * std::abs(seg.segment.s_plus - seg.segment.s_minus);
    const int nu_hat = seg.trace_degree + 1;
    const int nflux = seg.flux_degree + 1;
    Eigen::VectorXd chi(nu_hat), xi(nflux);
    for (int q = 0; q < nq; ++q) {
      const double t = line.points[q];
      const double s = seg.segment.s_minus + 0.5 * (seg.segment.s_plus - seg.segment.s_minus) * (t + 1.0);
      const Point ref = side_reference_point(seg.side, s);
      const Eigen::VectorXd psi = q_basis_eval(test_degree, ref.x(), ref.y()).values;
      line_basis(seg.trace_degree, t, chi.data(), nullptr);
      line_basis(seg.flux_degree, t, xi.data(), nullptr);
      const double w = line.weights[q] * jac;
      const Eigen::MatrixXd psi_chi = w * psi * chi.transpose();
      const int u0 = seg.trace_offset, u1 = seg.trace_offset + nu_hat;
      B.block(test.tau_offset(0), u0, nt, nu_hat) -= normal.x() * psi_chi;
      B.block(test.tau_offset(1), u0, nt, nu_hat) -= normal.y() * psi_chi;
      B.block(test.tau_offset(1), u1, nt, nu_hat) -= normal.x() * psi_chi;
      B.block(test.tau_offset(2), u1, nt, nu_hat) -= normal.y() * psi_chi;
      const Eigen::MatrixXd psi_xi = (w * seg.flux_sign) * psi * xi.transpose();
      B.block(test.v_offset(0), seg.flux_offset, nt, nflux) += psi_xi;
      B.block(test.v_offset(1), seg.flux_offset + nflux, nt, nflux) += psi_xi;
    }
  }
  return out;
}

LocalStiffness local_stiffness(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& bmat, const Eigen::VectorXd& load) {
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw FactorizationError("local Gram matrix is not positive definite");
  const Eigen::MatrixXd W = llt.matrixL().solve(bmat);
  const Eigen::VectorXd w = llt.matrixL().solve(load);
  LocalStiffness out;
  const Eigen::Index n = bmat.cols();
  out.matrix = Eigen::MatrixXd::Zero(n, n);
  out.matrix.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
  out.matrix.triangularView<Eigen::StrictlyUpper>() = out.matrix.transpose();
  out.rhs = W.transpose() * w;
  return out;
}

ErrorRepresentation error_representation(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& bmat,
                                         const Eigen::VectorXd& load, const Eigen::VectorXd& x_local) {
  const Eigen::LLT<Eigen::MatrixXd> llt(gram);
  if (llt.info() != Eigen::Success) throw FactorizationError("local Gram matrix is not positive definite");
  const Eigen::VectorXd residual = load - bmat * x_local;
  ErrorRepresentation out;
  out.coefficients = llt.solve(residual);
  out.eta = std::sqrt(std::max(0.0, residual.dot(out.coefficients)));
  return out;
}

LocalSystem build_local_system(const Mesh& mesh, const DegreeMap& degrees, int element, const Material& material,
                               const LoadFunction& load) {
  LocalSystem sys;
  sys.trial = make_trial_layout(mesh, degrees, element);
  sys.test_degree = degrees.test_degree(element);
  sys.gram = local_gram(mesh, element, sys.test_degree);
  CouplingTerms c = local_bmat(mesh, element, sys.trial, sys.test_degree, material, load);
  sys.bmat = std::move(c.bmat);
  sys.load = std::move(c.load);
  return sys;
}

Eigen::VectorXd identity_stress_trial(const Mesh& mesh, const TrialLayout& trial) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(trial.size);
  const Eigen::VectorXd one = quad_coefficients_of_one(trial.degree);
  x.segment(trial.sigma_offset(0), trial.n_scalar) = one;
  x.segment(trial.sigma_offset(2), trial.n_scalar) = one;
  for (const TrialSegment& seg : trial.segments) {
    // Flux unknowns hold sigma n in the global normal of the edge.
    const Point n = seg.flux_sign * mesh.side_normal(trial.element, seg.side).first;
    const Eigen::VectorXd c = line_coefficients_of_one(seg.flux_degree);
    const int nf = seg.flux_degree + 1;
    x.segment(seg.flux_offset, nf) = n.x() * c;
    x.segment(seg.flux_offset + nf, nf) = n.y() * c;
  }
  return x;
}

}  // namespace dpg
