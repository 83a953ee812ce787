#pragma once

#include <Eigen/Dense>

#include <array>
#include <vector>

namespace dpg {

/// Gauss-Legendre rule on [-1,1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

/// Tensor-product rule on [-1,1]^2; point k is (points[k][0], points[k][1]).
struct QuadratureRule2D {
  std::vector<std::array<double, 2>> points;
  std::vector<double> weights;
  std::size_t size() const { return points.size(); }
};

/// n-point Gauss-Legendre rule, exact for polynomials of degree 2n-1.
QuadratureRule gauss_rule(int n);

QuadratureRule2D tensor_gauss_rule(int n);

/// Number of functions in the 1D hierarchical basis of degree p.
constexpr int line_dim(int p) { return p + 1; }

/// Number of functions in the tensor basis of Q_{p,p}.
constexpr int quad_dim(int p) { return (p + 1) * (p + 1); }

/// Legendre polynomials P_0..P_n at t.
void legendre(int n, double t, double* values);

/// 1D hierarchical basis of degree p at t in [-1,1].
///
/// p = 0 is the constant 1. For p >= 1 the functions are
///   phi_0 = (1 - t)/2,  phi_1 = (1 + t)/2,
///   phi_k = (P_k - P_{k-2}) / sqrt(2(2k-1)),  k = 2..p,
/// so phi_0 and phi_1 are the only ones that do not vanish at t = -1, 1.
/// `derivs` may be null.
void line_basis(int p, double t, double* values, double* derivs);

/// Values of the p+1 edge functions at t (same family as line_basis).
Eigen::VectorXd edge_basis_eval(int p, double t);

/// Values and reference gradients of the tensor basis of Q_{p,p}.
/// Function (i, j) has index i + (p+1) j and equals phi_i(xi) phi_j(eta).
struct QuadBasisValues {
  Eigen::VectorXd values;
  Eigen::VectorXd d_xi;
  Eigen::VectorXd d_eta;
};

QuadBasisValues q_basis_eval(int p, double xi, double eta);

/// Coefficients of the constant function 1 in the degree-p line basis.
Eigen::VectorXd line_coefficients_of_one(int p);

/// Coefficients of 1 in the Q_{p,p} basis.
Eigen::VectorXd quad_coefficients_of_one(int p);

/// Tabulated Q_{p,p} basis at the points of a 2D rule, one column per point.
struct ShapeTable {
  int degree = 0;
  Eigen::MatrixXd values;
  Eigen::MatrixXd d_xi;
  Eigen::MatrixXd d_eta;
};

ShapeTable tabulate_quad_basis(int p, const QuadratureRule2D& rule);

/// 1D mass matrix of the degree-p line basis.
Eigen::MatrixXd line_mass_matrix(int p);

/// Expansion of restricted degree-q line functions in the same basis.
///
/// The child interval [-1,1] is mapped affinely onto the parent parameter
/// range with t = -1 -> a and t = 1 -> b. Column k holds the coefficients of
/// phi_k(parent) restricted to the child, in the child basis.
Eigen::MatrixXd restriction_matrix(int q, double a, double b);

}  // namespace dpg
