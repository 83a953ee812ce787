#include "dpg/exact.hpp"

#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dpg {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double corner = 0.75 * pi;

double kappa(double nu) { return 1.0 - nu / (1.0 + nu); }

}  // namespace

FieldValues smooth_solution(const Material& material, const Point& x) {
  const double sx = std::sin(pi * x.x()), cx = std::cos(pi * x.x());
  const double sy = std::sin(pi * x.y()), cy = std::cos(pi * x.y());
  const double s = sx * sy;
  const double a = pi * cx * sy;  // d/dx of each component
  const double b = pi * sx * cy;  // d/dy of each component
  const double c = pi * pi * cx * cy;

  FieldValues out;
  out.u = Eigen::Vector2d(s, s);
  Eigen::Matrix2d grad;
  grad << a, b, a, b;
  const Eigen::Matrix2d eps = 0.5 * (grad + grad.transpose());
  out.sigma = apply_stiffness(material, eps);

  // sigma = 2 mu eps + lambda_eff tr(eps) I
  const double mu = material.mu;
  const double lam = 0.5 / material.Q - mu;
  const double ax = -pi * pi * s, ay = c, bx = c, by = -pi * pi * s;
  out.f.x() = 2.0 * mu * ax + lam * (ax + bx) + mu * (ay + by);
  out.f.y() = mu * (ax + bx) + 2.0 * mu * by + lam * (ay + by);
  return out;
}

double lshape_c1(double a, double nu) {
  return (4.0 * kappa(nu) - (a + 1.0)) * std::sin((a - 1.0) * corner) / ((a + 1.0) * std::sin((a + 1.0) * corner));
}

double lshape_equation(double a, double nu) {
  const double k = kappa(nu);
  return lshape_c1(a, nu) * std::cos(corner * (a + 1.0)) * (a + 1.0) + std::cos(corner * (a - 1.0)) * (a - 1.0) +
         4.0 * k * std::cos(corner * (a - 1.0));
}

double lshape_exponent(const Material& material) {
  const double nu = material.nu;
  if (!(nu > 0.0 && nu < 0.5)) throw std::invalid_argument("lshape_exponent: Poisson ratio must lie in (0, 0.5)");
  auto f = [nu](double a) { return lshape_equation(a, nu); };
  // The equation has a pole where sin((a+1) 3pi/4) = 0; a sign change there
  // is rejected by the residual check.
  constexpr int intervals = 400;
  const double lo = 0.01, hi = 0.999;
  double x0 = lo, f0 = f(lo);
  for (int i = 1; i <= intervals; ++i) {
    const double x1 = lo + (hi - lo) * i / intervals;
    const double f1 = f(x1);
    if (std::isfinite(f0) && std::isfinite(f1) && f0 * f1 <= 0.0) {
      boost::uintmax_t iters = 200;
      const auto [a0, a1] =
          boost::math::tools::toms748_solve(f, x0, x1, f0, f1, boost::math::tools::eps_tolerance<double>(53), iters);
      const double root = std::abs(f(a0)) <= std::abs(f(a1)) ? a0 : a1;
      if (std::abs(f(root)) <= 1e-12) return root;
    }
    x0 = x1;
    f0 = f1;
  }
  throw std::runtime_error("lshape_exponent: no root of the exponent equation in (0.01, 0.999)");
}

LShapeParams make_lshape_params(const Material& material) {
  LShapeParams p;
  p.a = lshape_exponent(material);
  p.C1 = lshape_c1(p.a, material.nu);
  p.nu = material.nu;
  p.mu = material.mu;
  return p;
}

FieldValues lshape_solution(const Material& material, const LShapeParams& params, const Point& x) {
  (void)material;
  const double r = x.norm();
  if (r == 0.0) throw std::domain_error("lshape_solution: the origin is singular");
  double polar = std::atan2(x.y(), x.x());
  if (polar < -0.5 * pi + 1e-14) polar += 2.0 * pi;
  const double t = polar - corner;

  const double a = params.a;
  const double ap = a + 1.0, am = a - 1.0;
  const double F = params.C1 * std::sin(ap * t) + params.C2 * std::cos(ap * t) + params.C3 * std::sin(am * t) +
                   params.C4 * std::cos(am * t);
  const double dF = params.C1 * ap * std::cos(ap * t) - params.C2 * ap * std::sin(ap * t) +
                    params.C3 * am * std::cos(am * t) - params.C4 * am * std::sin(am * t);
  const double ddF = -ap * ap * (params.C1 * std::sin(ap * t) + params.C2 * std::cos(ap * t)) -
                     am * am * (params.C3 * std::sin(am * t) + params.C4 * std::cos(am * t));
  const double G = 4.0 / am * (-params.C3 * std::cos(am * t) + params.C4 * std::sin(am * t));
  const double dG = 4.0 * (params.C3 * std::sin(am * t) + params.C4 * std::cos(am * t));

  const double k = kappa(params.nu);
  const double ra1 = std::pow(r, a - 1.0);
  const double s_rr = ra1 * (ddF + ap * F);
  const double s_tt = a * ap * ra1 * F;
  const double s_rt = -a * ra1 * dF;
  const double ra = std::pow(r, a);
  const double u_r = ra * (-ap * F + k * dG) / (2.0 * params.mu);
  const double u_t = ra * (-dF + k * am * G) / (2.0 * params.mu);

  const double c = std::cos(polar), s = std::sin(polar);
  Eigen::Matrix2d R;
  R << c, -s, s, c;
  Eigen::Matrix2d S;
  S << s_rr, s_rt, s_rt, s_tt;

  FieldValues out;
  out.u = R * Eigen::Vector2d(u_r, u_t);
  out.sigma = R * S * R.transpose();
  out.sigma(1, 0) = out.sigma(0, 1);
  return out;
}

ExactSolution smooth_benchmark(const Material& material) {
  ExactSolution ex;
  ex.fields = [material](const Point& x) { return smooth_solution(material, x); };
  ex.displacement = [material](const Point& x) { return smooth_solution(material, x).u; };
  ex.homogeneous_boundary = true;
  ex.domain = Domain::unit_square;
  return ex;
}

ExactSolution lshape_benchmark(const Material& material) {
  const LShapeParams params = make_lshape_params(material);
  ExactSolution ex;
  ex.fields = [material, params](const Point& x) { return lshape_solution(material, params, x); };
  ex.displacement = [material, params](const Point& x) -> Eigen::Vector2d {
    if (x.norm() < 1e-300) return Eigen::Vector2d::Zero();
    return lshape_solution(material, params, x).u;
  };
  ex.singular_point = Point::Zero();
  ex.homogeneous_boundary = false;
  ex.domain = Domain::l_shape;
  return ex;
}

}  // namespace dpg
