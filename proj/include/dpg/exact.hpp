#pragma once

#include "dpg/material.hpp"
#include "dpg/mesh.hpp"

#include <functional>
#include <optional>

namespace dpg {

/// Pointwise values of an exact solution; f is the load with div sigma = f.
struct FieldValues {
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
  Eigen::Vector2d f = Eigen::Vector2d::Zero();
};

/// u_x = u_y = sin(pi x) sin(pi y) on the unit square.
FieldValues smooth_solution(const Material& material, const Point& x);

/// Corner singular solution around the reentrant corner of the L-shape.
/// Angles are measured from the bisector of the 3pi/2 sector, so the clamped
/// sides sit at theta = +-3pi/4.
struct LShapeParams {
  double a = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  double C3 = 1.0;
  double C4 = 0.0;
  double nu = 0.0;
  double mu = 0.0;
};

/// Left-hand side of the exponent equation (zero at the sought exponent).
double lshape_equation(double a, double nu);
double lshape_c1(double a, double nu);

/// Smallest root of the exponent equation in (0.01, 0.999). Throws
/// std::runtime_error if none is found.
double lshape_exponent(const Material& material);

LShapeParams make_lshape_params(const Material& material);

/// Throws std::domain_error at the origin.
FieldValues lshape_solution(const Material& material, const LShapeParams& params, const Point& x);

/// A benchmark problem: exact fields plus the data the solver needs.
struct ExactSolution {
  std::function<FieldValues(const Point&)> fields;
  /// Boundary displacement; defined everywhere on the closed domain.
  std::function<Eigen::Vector2d(const Point&)> displacement;
  std::optional<Point> singular_point;
  bool homogeneous_boundary = false;
  Domain domain = Domain::unit_square;
};

ExactSolution smooth_benchmark(const Material& material);
ExactSolution lshape_benchmark(const Material& material);

}  // namespace dpg
