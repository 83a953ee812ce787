#include "dpg/dpg_core.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <random>

using namespace dpg;

namespace {

Mesh unit_element() { return build_initial_mesh(Domain::unit_square, 1); }

Mesh sheared_element() {
  const std::array<std::array<int, 4>, 1> quads{{{0, 1, 2, 3}}};
  return Mesh::from_quads({Point(0.0, 0.0), Point(2.0, 0.0), Point(3.0, 1.0), Point(1.0, 1.0)}, quads);
}

// Test coefficients of the constant tensor field c I (tau part only).
Eigen::VectorXd identity_test(const LocalTestSpace& test, double c) {
  Eigen::VectorXd t = Eigen::VectorXd::Zero(test.size());
  const Eigen::VectorXd one = quad_coefficients_of_one(test.degree);
  t.segment(test.tau_offset(0), test.n_scalar) = c * one;
  t.segment(test.tau_offset(2), test.n_scalar) = c * one;
  return t;
}

Eigen::VectorXd random_vector(std::mt19937& gen, Eigen::Index n) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = d(gen);
  return v;
}

}  // namespace

TEST_CASE("local_gram: constant identity field on the unit element") {
  const Mesh m = unit_element();
  const LocalTestSpace test(0, 3);
  const Eigen::MatrixXd G = local_gram(m, 0, test.degree);
  REQUIRE(G.rows() == test.size());
  const Eigen::VectorXd t = identity_test(test, 1.0);
  // |I|^2 times the area, divergence zero.
  CHECK(std::abs(t.dot(G * t) - 2.0) < 1e-13);
}

TEST_CASE("local_gram: symmetric and positive definite on a sheared element") {
  const Mesh m = sheared_element();
  CHECK(std::abs(m.area(0) - 2.0) < 1e-14);
  for (int pt = 1; pt <= 4; ++pt) {
    const Eigen::MatrixXd G = local_gram(m, 0, pt);
    CHECK((G - G.transpose()).cwiseAbs().maxCoeff() <= 1e-13 * G.cwiseAbs().maxCoeff());
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("local_gram: Cholesky succeeds up to test degree 8") {
  const Mesh m = build_initial_mesh(Domain::l_shape, 2);
  for (int pt = 1; pt <= 8; ++pt) {
    const Eigen::MatrixXd G = local_gram(m, m.active_elements()[1], pt);
    CHECK(Eigen::LLT<Eigen::MatrixXd>(G).info() == Eigen::Success);
  }
}

TEST_CASE("local_bmat: compliance term against the identity") {
  const Mesh m = unit_element();
  const Material mat = make_isotropic(0.0, 0.5);
  const DegreeMap deg = DegreeMap::uniform(m, 1);
  const LocalSystem sys = build_local_system(m, deg, 0, mat, {});
  const LocalTestSpace test(0, sys.test_degree);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(sys.trial.size);
  const Eigen::VectorXd one = quad_coefficients_of_one(sys.trial.degree);
  s.segment(sys.trial.sigma_offset(0), sys.trial.n_scalar) = one;
  s.segment(sys.trial.sigma_offset(2), sys.trial.n_scalar) = one;
  // (A I, I) = N Q |K| = 2 for lambda = 0, mu = 1/2.
  CHECK(std::abs(identity_test(test, 1.0).dot(sys.bmat * s) - 2.0) < 1e-13);
}

TEST_CASE("local_bmat: constant trace is orthogonal to the identity test") {
  // With tau = I the trace term is the integral of u-hat . n over the
  // boundary, which vanishes for a constant u-hat.
  const Mesh m = build_initial_mesh(Domain::unit_square, 3);
  const Material mat = make_isotropic(1.0, 1.0);
  const DegreeMap deg = DegreeMap::uniform(m, 2);
  const int k = m.active_elements()[4];
  const LocalSystem sys = build_local_system(m, deg, k, mat, {});
  const LocalTestSpace test(k, sys.test_degree);
  for (int c = 0; c < 2; ++c) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(sys.trial.size);
    for (const TrialSegment& seg : sys.trial.segments)
      x.segment(seg.trace_offset + c * (seg.trace_degree + 1), seg.trace_degree + 1) =
          line_coefficients_of_one(seg.trace_degree);
    CHECK(std::abs(identity_test(test, 1.0).dot(sys.bmat * x)) < 1e-13);
  }
}

TEST_CASE("local_bmat: zero body force gives a zero load") {
  const Mesh m = unit_element();
  const DegreeMap deg = DegreeMap::uniform(m, 2);
  const Material mat = make_isotropic(1.0, 1.0);
  const LoadFunction zero = [](const Point&) { return Eigen::Vector2d::Zero().eval(); };
  CHECK(build_local_system(m, deg, 0, mat, zero).load.norm() == 0.0);
  CHECK(build_local_system(m, deg, 0, mat, {}).load.norm() == 0.0);
}

TEST_CASE("identity stress trial maps to Q0 I") {
  // The optimal test function of sigma = I, sigma-hat n = I n is (Q0 I, 0).
  for (int p = 1; p <= 3; ++p) {
    const Mesh m = refine_marked(build_initial_mesh(Domain::l_shape, 1), std::vector<int>{0});
    const Material mat = make_isotropic(123.0 / 79.3, 1.0, PlaneModel::plane_stress);
    const DegreeMap deg = DegreeMap::uniform(m, p);
    for (int k : m.active_elements()) {
      const LocalSystem sys = build_local_system(m, deg, k, mat, {});
      const Eigen::VectorXd x = identity_stress_trial(m, sys.trial);
      const Eigen::VectorXd t = sys.gram.llt().solve(sys.bmat * x);
      const Eigen::VectorXd expected = identity_test(LocalTestSpace(k, sys.test_degree), mat.Q0);
      CHECK((t - expected).cwiseAbs().maxCoeff() <= 1e-11);
    }
  }
}

TEST_CASE("local_stiffness: zero coupling and explicit formula") {
  const Mesh m = sheared_element();
  const DegreeMap deg = DegreeMap::uniform(m, 2);
  const Material mat = make_isotropic(2.0, 0.7);
  const LoadFunction f = [](const Point& x) { return Eigen::Vector2d(x.x() * x.y(), 1.0 - x.x()); };
  const LocalSystem sys = build_local_system(m, deg, 0, mat, f);

  const LocalStiffness zero = local_stiffness(sys.gram, Eigen::MatrixXd::Zero(sys.bmat.rows(), sys.bmat.cols()),
                                              Eigen::VectorXd::Zero(sys.load.size()));
  CHECK(zero.matrix.norm() == 0.0);
  CHECK(zero.rhs.norm() == 0.0);

  const LocalStiffness ks = local_stiffness(sys.gram, sys.bmat, sys.load);
  const Eigen::MatrixXd Ginv = sys.gram.inverse();
  const Eigen::MatrixXd K = sys.bmat.transpose() * Ginv * sys.bmat;
  const Eigen::VectorXd r = sys.bmat.transpose() * Ginv * sys.load;
  CHECK((ks.matrix - K).norm() <= 1e-9 * K.norm());
  CHECK((ks.rhs - r).norm() <= 1e-9 * r.norm());
  CHECK((ks.matrix - ks.matrix.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * ks.matrix.cwiseAbs().maxCoeff());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(ks.matrix);
  CHECK(es.eigenvalues().minCoeff() > -1e-10 * es.eigenvalues().maxCoeff());
}

TEST_CASE("local_stiffness: invariant under an orthogonal change of test basis") {
  std::mt19937 gen(21);
  const Mesh m = unit_element();
  const DegreeMap deg = DegreeMap::uniform(m, 1);
  const Material mat = make_isotropic(1.0, 1.0);
  const LoadFunction f = [](const Point& x) { return Eigen::Vector2d(std::sin(x.x()), x.y()); };
  const LocalSystem sys = build_local_system(m, deg, 0, mat, f);
  const auto n = sys.gram.rows();
  Eigen::MatrixXd R(n, n);
  for (Eigen::Index j = 0; j < n; ++j) R.col(j) = random_vector(gen, n);
  const Eigen::MatrixXd Q = R.householderQr().householderQ();
  const LocalStiffness a = local_stiffness(sys.gram, sys.bmat, sys.load);
  const LocalStiffness b = local_stiffness(Q.transpose() * sys.gram * Q, Q.transpose() * sys.bmat, Q.transpose() * sys.load);
  CHECK((a.matrix - b.matrix).norm() <= 1e-10 * a.matrix.norm());
  CHECK((a.rhs - b.rhs).norm() <= 1e-10 * a.rhs.norm());
}

TEST_CASE("local_stiffness: non SPD Gram throws") {
  const Eigen::MatrixXd G = -Eigen::MatrixXd::Identity(3, 3);
  CHECK_THROWS_AS(local_stiffness(G, Eigen::MatrixXd::Identity(3, 2), Eigen::VectorXd::Zero(3)), FactorizationError);
}

TEST_CASE("error_representation: zero cases and the Rayleigh quotient") {
  std::mt19937 gen(8);
  const Mesh m = unit_element();
  const DegreeMap deg = DegreeMap::uniform(m, 1, 1);
  const Material mat = make_isotropic(1.0, 1.0);
  const LoadFunction f = [](const Point& x) { return Eigen::Vector2d(1.0 + x.x(), -x.y()); };
  const LocalSystem sys = build_local_system(m, deg, 0, mat, f);
  REQUIRE(sys.test_degree == 2);

  const Eigen::VectorXd zero_x = Eigen::VectorXd::Zero(sys.trial.size);
  CHECK(error_representation(sys.gram, sys.bmat, Eigen::VectorXd::Zero(sys.load.size()), zero_x).eta == 0.0);

  for (int s = 0; s < 4; ++s) {
    const Eigen::VectorXd x = random_vector(gen, sys.trial.size);
    const Eigen::VectorXd r = sys.load - sys.bmat * x;
    const double eta = error_representation(sys.gram, sys.bmat, sys.load, x).eta;
    CHECK(std::abs(eta * eta - oracle::rayleigh_max(sys.gram, r)) <= 1e-10 * eta * eta);
  }
}

TEST_CASE("enriched test degree: K changes little between dp = 2 and dp = 3") {
  // Compared in conforming element dofs. The raw local trial layout also
  // contains traces that jump at element corners, whose energy grows without
  // bound as the test space is enriched.
  for (Domain d : {Domain::unit_square, Domain::l_shape}) {
    const Mesh m = build_initial_mesh(d, 3);
    const Material mat = d == Domain::l_shape ? make_isotropic(123.0 / 79.3, 1.0, PlaneModel::plane_stress)
                                              : make_isotropic(1.0, 1.0);
    for (int p = 1; p <= 3; ++p) {
      const DegreeMap d2 = DegreeMap::uniform(m, p, 2);
      const DegreeMap d3 = DegreeMap::uniform(m, p, 3);
      const DofLayout layout = build_dof_layout(m, d2);
      for (std::size_t i = 0; i < layout.elements.size(); ++i) {
        const int k = layout.elements[i].element;
        const Eigen::MatrixXd C = oracle::local_map(layout, i);
        const LocalSystem s2 = build_local_system(m, d2, k, mat, {});
        const LocalSystem s3 = build_local_system(m, d3, k, mat, {});
        const Eigen::MatrixXd K2 = C.transpose() * local_stiffness(s2.gram, s2.bmat, s2.load).matrix * C;
        const Eigen::MatrixXd K3 = C.transpose() * local_stiffness(s3.gram, s3.bmat, s3.load).matrix * C;
        CHECK((K3 - K2).norm() <= 0.05 * K2.norm());
      }
    }
  }
}

TEST_CASE("integrate_basis: coefficients of one integrate to the area") {
  const Mesh m = sheared_element();
  for (int p = 0; p <= 4; ++p)
    CHECK(std::abs(integrate_basis(m, 0, p).dot(quad_coefficients_of_one(p)) - 2.0) < 1e-13);
}
