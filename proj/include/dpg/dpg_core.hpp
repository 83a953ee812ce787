#pragma once

#include "dpg/basis.hpp"
#include "dpg/material.hpp"
#include "dpg/mesh.hpp"

#include <Eigen/Dense>

#include <functional>
#include <stdexcept>
#include <vector>

namespace dpg {

using LoadFunction = std::function<Eigen::Vector2d(const Point&)>;

/// Raised when a matrix that must be SPD fails to factor.
class FactorizationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Skeleton unknowns that live on one leaf segment of an element side.
/// Trace component c occupies [trace_offset + c (trace_degree+1), ...) and
/// flux component c occupies [flux_offset + c (flux_degree+1), ...).
struct TrialSegment {
  int side = 0;
  SideSegment segment;
  int trace_degree = 0;
  int flux_degree = 0;
  double flux_sign = 1.0;
  int trace_offset = 0;
  int flux_offset = 0;
};

/// Local trial ordering: sigma (3 symmetric components: 11, 12, 22), u (2
/// components), then per segment the trace and flux blocks.
struct TrialLayout {
  int element = -1;
  int degree = 1;
  int n_scalar = 0;
  std::vector<TrialSegment> segments;
  int size = 0;

  int sigma_offset(int comp) const { return comp * n_scalar; }
  int u_offset(int comp) const { return (3 + comp) * n_scalar; }
  int n_interior() const { return 5 * n_scalar; }
};

TrialLayout make_trial_layout(const Mesh& mesh, const DegreeMap& degrees, int element);

/// Enriched test space on one element: tau (3 symmetric components) and v
/// (2 components), each in Q_{p+dp, p+dp}.
struct LocalTestSpace {
  int element = -1;
  int degree = 0;
  int n_scalar = 0;

  LocalTestSpace(int element_id, int test_degree)
      : element(element_id), degree(test_degree), n_scalar(quad_dim(test_degree)) {}
  int size() const { return 5 * n_scalar; }
  int tau_offset(int comp) const { return comp * n_scalar; }
  int v_offset(int comp) const { return (3 + comp) * n_scalar; }
};

/// Gram matrix of the broken H(div) x H1 test inner product.
Eigen::MatrixXd local_gram(const Mesh& mesh, int element, int test_degree);

struct CouplingTerms {
  Eigen::MatrixXd bmat;  // n_test x n_trial
  Eigen::VectorXd load;  // n_test
};

/// Element restriction of the ultraweak form against every test basis
/// function. `load` may be empty (zero body force).
CouplingTerms local_bmat(const Mesh& mesh, int element, const TrialLayout& trial, int test_degree,
                         const Material& material, const LoadFunction& load);

struct LocalStiffness {
  Eigen::MatrixXd matrix;  // B^T G^-1 B
  Eigen::VectorXd rhs;     // B^T G^-1 l
};

/// Throws FactorizationError if G is not SPD.
LocalStiffness local_stiffness(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& bmat, const Eigen::VectorXd& load);

struct ErrorRepresentation {
  Eigen::VectorXd coefficients;
  double eta = 0.0;
};

/// Riesz representative of the residual l - B x in the test norm.
ErrorRepresentation error_representation(const Eigen::MatrixXd& gram, const Eigen::MatrixXd& bmat,
                                         const Eigen::VectorXd& load, const Eigen::VectorXd& x_local);

struct LocalSystem {
  TrialLayout trial;
  int test_degree = 0;
  Eigen::MatrixXd gram;
  Eigen::MatrixXd bmat;
  Eigen::VectorXd load;
};

LocalSystem build_local_system(const Mesh& mesh, const DegreeMap& degrees, int element, const Material& material,
                               const LoadFunction& load);

/// Integrals over an element of the scalar Q_degree basis functions.
Eigen::VectorXd integrate_basis(const Mesh& mesh, int element, int degree);

/// Point of the reference square on side `side` at side parameter s.
Point side_reference_point(int side, double s);

/// Trial vector of the constant stress sigma = I with matching flux I n and
/// zero displacement/trace.
Eigen::VectorXd identity_stress_trial(const Mesh& mesh, const TrialLayout& trial);

}  // namespace dpg
