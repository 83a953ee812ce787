#pragma once

#include <Eigen/Dense>

namespace dpg {

/// Which 2D reduction of the isotropic compliance is used.
enum class PlaneModel { plane_strain, plane_stress };

/// Homogeneous isotropic compliance A tau = P tau_D + Q tr(tau)/N I, valid on
/// all 2x2 matrices (skew parts are scaled by P).
struct Material {
  double lambda = 0.0;
  double mu = 1.0;
  PlaneModel model = PlaneModel::plane_strain;
  int N = 2;
  double P = 0.0;
  double Q = 0.0;
  /// ess inf of Q; the normalization of the trace constraint, A I = Q0 I.
  double Q0 = 0.0;
  /// Q0^-1 ||Q||_inf; 1 for homogeneous material.
  double Bconst = 0.0;
  /// ess inf of P.
  double P0 = 0.0;
  /// Poisson ratio lambda / (2 (lambda + mu)).
  double nu = 0.0;
};

/// Throws std::invalid_argument unless lambda >= 0 and mu > 0.
Material make_isotropic(double lambda, double mu, PlaneModel model = PlaneModel::plane_strain);

/// lambda giving Poisson ratio nu at shear modulus mu.
double lambda_from_poisson(double nu, double mu);

Eigen::Matrix2d apply_compliance(const Material& m, const Eigen::Matrix2d& tau);

/// Inverse of the compliance on symmetric matrices: sigma = A^-1 eps.
Eigen::Matrix2d apply_stiffness(const Material& m, const Eigen::Matrix2d& eps);

}  // namespace dpg
