#include "dpg/material.hpp"

#include <cmath>
#include <stdexcept>

namespace dpg {

Material make_isotropic(double lambda, double mu, PlaneModel model) {
  if (!(mu > 0.0)) throw std::invalid_argument("make_isotropic: mu must be positive");
  if (!(lambda >= 0.0)) throw std::invalid_argument("make_isotropic: lambda must be nonnegative");
  Material m;
  m.lambda = lambda;
  m.mu = mu;
  m.model = model;
  m.nu = lambda / (2.0 * (lambda + mu));
  m.P = 1.0 / (2.0 * mu);
  // A I = Q I. Plane strain: A tau = (tau - lambda/(2mu + 2lambda) tr(tau) I)/(2mu);
  // plane stress: A tau = (tau - nu/(1+nu) tr(tau) I)/(2mu).
  if (model == PlaneModel::plane_strain)
    m.Q = 1.0 / (2.0 * (lambda + mu));
  else
    m.Q = (1.0 - m.nu) / (2.0 * mu * (1.0 + m.nu));
  m.Q0 = m.Q;
  m.Bconst = m.Q / m.Q0;
  m.P0 = m.P;
  if (!(std::isfinite(m.P) && std::isfinite(m.Q) && m.Q > 0.0))
    throw std::invalid_argument("make_isotropic: compliance is not finite and positive for these parameters");
  return m;
}

double lambda_from_poisson(double nu, double mu) {
  if (!(nu >= 0.0 && nu < 0.5)) throw std::invalid_argument("Poisson ratio must lie in [0, 0.5)");
  return 2.0 * nu * mu / (1.0 - 2.0 * nu);
}

Eigen::Matrix2d apply_compliance(const Material& m, const Eigen::Matrix2d& tau) {
  const double tr = tau.trace() / m.N;
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  return m.P * (tau - tr * I) + m.Q * tr * I;
}

Eigen::Matrix2d apply_stiffness(const Material& m, const Eigen::Matrix2d& eps) {
  const double tr = eps.trace() / m.N;
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  return (eps - tr * I) / m.P + tr / m.Q * I;
}

}  // namespace dpg
