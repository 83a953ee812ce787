#include "dpg/basis.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dpg {

QuadratureRule gauss_rule(int n) {
  if (n < 1) throw std::invalid_argument("gauss_rule: n must be >= 1");
  QuadratureRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Chebyshev-type initial guess, then Newton on P_n.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
      const double dx = pn / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      const double pn = n == 1 ? x : p1;
      const double pnm1 = n == 1 ? 1.0 : p0;
      dp = n * (x * pn - pnm1) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

QuadratureRule2D tensor_gauss_rule(int n) {
  const QuadratureRule line = gauss_rule(n);
  QuadratureRule2D rule;
  rule.points.reserve(n * n);
  rule.weights.reserve(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      rule.points.push_back({line.points[i], line.points[j]});
      rule.weights.push_back(line.weights[i] * line.weights[j]);
    }
  return rule;
}

void legendre(int n, double t, double* values) {
  values[0] = 1.0;
  if (n >= 1) values[1] = t;
  for (int k = 2; k <= n; ++k)
    values[k] = ((2.0 * k - 1.0) * t * values[k - 1] - (k - 1.0) * values[k - 2]) / k;
}

void line_basis(int p, double t, double* values, double* derivs) {
  if (p == 0) {
    values[0] = 1.0;
    if (derivs) derivs[0] = 0.0;
    return;
  }
  double leg[32];
  double* P = leg;
  std::vector<double> heap;
  if (p + 1 > 32) {
    heap.resize(p + 1);
    P = heap.data();
  }
  legendre(p, t, P);
  values[0] = 0.5 * (1.0 - t);
  values[1] = 0.5 * (1.0 + t);
  if (derivs) {
    derivs[0] = -0.5;
    derivs[1] = 0.5;
  }
  for (int k = 2; k <= p; ++k) {
    const double scale = 1.0 / std::sqrt(2.0 * (2.0 * k - 1.0));
    values[k] = (P[k] - P[k - 2]) * scale;
    if (derivs) derivs[k] = std::sqrt((2.0 * k - 1.0) / 2.0) * P[k - 1];
  }
}

Eigen::VectorXd edge_basis_eval(int p, double t) {
  Eigen::VectorXd v(p + 1);
  line_basis(p, t, v.data(), nullptr);
  return v;
}

QuadBasisValues q_basis_eval(int p, double xi, double eta) {
  const int n = p + 1;
  Eigen::VectorXd fx(n), dfx(n), fy(n), dfy(n);
  line_basis(p, xi, fx.data(), dfx.data());
  line_basis(p, eta, fy.data(), dfy.data());
  QuadBasisValues out{Eigen::VectorXd(n * n), Eigen::VectorXd(n * n), Eigen::VectorXd(n * n)};
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int k = i + n * j;
      out.values[k] = fx[i] * fy[j];
      out.d_xi[k] = dfx[i] * fy[j];
      out.d_eta[k] = fx[i] * dfy[j];
    }
  return out;
}

Eigen::VectorXd line_coefficients_of_one(int p) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(p + 1);
  c[0] = 1.0;
  if (p >= 1) c[1] = 1.0;
  return c;
}

Eigen::VectorXd quad_coefficients_of_one(int p) {
  const Eigen::VectorXd c = line_coefficients_of_one(p);
  const int n = p + 1;
  Eigen::VectorXd out(n * n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) out[i + n * j] = c[i] * c[j];
  return out;
}

ShapeTable tabulate_quad_basis(int p, const QuadratureRule2D& rule) {
  const int nq = static_cast<int>(rule.size());
  ShapeTable table;
  table.degree = p;
  table.values.resize(quad_dim(p), nq);
  table.d_xi.resize(quad_dim(p), nq);
  table.d_eta.resize(quad_dim(p), nq);
  for (int q = 0; q < nq; ++q) {
    const QuadBasisValues b = q_basis_eval(p, rule.points[q][0], rule.points[q][1]);
    table.values.col(q) = b.values;
    table.d_xi.col(q) = b.d_xi;
    table.d_eta.col(q) = b.d_eta;
  }
  return table;
}

Eigen::MatrixXd line_mass_matrix(int p) {
  const QuadratureRule rule = gauss_rule(p + 1);
  Eigen::MatrixXd mass = Eigen::MatrixXd::Zero(p + 1, p + 1);
  Eigen::VectorXd v(p + 1);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    line_basis(p, rule.points[q], v.data(), nullptr);
    mass.noalias() += rule.weights[q] * v * v.transpose();
  }
  return mass;
}

Eigen::MatrixXd restriction_matrix(int q, double a, double b) {
  const QuadratureRule rule = gauss_rule(q + 1);
  const Eigen::MatrixXd mass = line_mass_matrix(q);
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(q + 1, q + 1);
  Eigen::VectorXd child(q + 1), parent(q + 1);
  for (std::size_t k = 0; k < rule.size(); ++k) {
    const double t = rule.points[k];
    line_basis(q, t, child.data(), nullptr);
    line_basis(q, a + 0.5 * (b - a) * (t + 1.0), parent.data(), nullptr);
    rhs.noalias() += rule.weights[k] * child * parent.transpose();
  }
  return mass.llt().solve(rhs);
}

}  // namespace dpg
