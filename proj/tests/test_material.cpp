#include "dpg/material.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

using namespace dpg;

namespace {

// Plane-strain compliance written out directly.
Eigen::Matrix2d plane_strain(double lambda, double mu, const Eigen::Matrix2d& t) {
  return (t - lambda / (2.0 * mu + 2.0 * lambda) * t.trace() * Eigen::Matrix2d::Identity()) / (2.0 * mu);
}

Eigen::Matrix2d random_matrix(std::mt19937& gen) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  Eigen::Matrix2d m;
  m << d(gen), d(gen), d(gen), d(gen);
  return m;
}

double frob(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) { return (a.array() * b.array()).sum(); }

}  // namespace

TEST_CASE("make_isotropic: lambda = 0, mu = 0.5") {
  const Material m = make_isotropic(0.0, 0.5);
  CHECK(m.P == doctest::Approx(1.0));
  CHECK(m.Q == doctest::Approx(1.0));
  // Q0 is the infimum of Q (see the decisions ledger): A I = Q0 I.
  CHECK(m.Q0 == doctest::Approx(1.0));
  CHECK(m.Bconst == 1.0);
  CHECK(m.N == 2);
}

TEST_CASE("make_isotropic: steel Poisson ratio") {
  const Material m = make_isotropic(123.0, 79.3);
  CHECK(std::abs(m.nu - 0.30400) < 5e-6);
  CHECK(m.Bconst == 1.0);
  CHECK(m.P > 0.0);
  CHECK(m.Q > 0.0);
  CHECK(m.Q0 > 0.0);
}

TEST_CASE("make_isotropic: rejects invalid parameters") {
  CHECK_THROWS_AS(make_isotropic(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_isotropic(1.0, -1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_isotropic(-1.0, 1.0), std::invalid_argument);
  // Denormal shear modulus: the compliance overflows.
  CHECK_THROWS_AS(make_isotropic(0.0, 1e-320), std::invalid_argument);
}

TEST_CASE("apply_compliance: identity, skew and hand example") {
  const Material m = make_isotropic(2.0, 0.7);
  const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
  CHECK((apply_compliance(m, I) - m.Q * I).norm() < 1e-15);
  CHECK(std::abs(apply_compliance(m, I).trace() - m.N * m.Q0) < 1e-15);
  Eigen::Matrix2d skew;
  skew << 0, 1, -1, 0;
  CHECK((apply_compliance(m, skew) - m.P * skew).norm() < 1e-15);

  const Material m0 = make_isotropic(0.0, 0.5);
  Eigen::Matrix2d t;
  t << 1, 0, 0, 0;
  CHECK((apply_compliance(m0, t) - t).norm() < 1e-15);
}

TEST_CASE("apply_compliance matches the plane-strain formula") {
  std::mt19937 gen(1);
  for (double lambda : {0.0, 1.0, 123.0}) {
    const Material m = make_isotropic(lambda, 79.3);
    for (int k = 0; k < 5; ++k) {
      Eigen::Matrix2d t = random_matrix(gen);
      t = 0.5 * (t + t.transpose()).eval();
      CHECK((apply_compliance(m, t) - plane_strain(lambda, 79.3, t)).norm() < 1e-15);
    }
  }
}

TEST_CASE("plane stress reduction") {
  const Material m = make_isotropic(123.0, 79.3, PlaneModel::plane_stress);
  std::mt19937 gen(5);
  Eigen::Matrix2d t = random_matrix(gen);
  t = 0.5 * (t + t.transpose()).eval();
  const Eigen::Matrix2d expected =
      (t - m.nu / (1.0 + m.nu) * t.trace() * Eigen::Matrix2d::Identity()) / (2.0 * 79.3);
  CHECK((apply_compliance(m, t) - expected).norm() < 1e-16);
}

TEST_CASE("apply_compliance is self-adjoint, positive and inverted by apply_stiffness") {
  std::mt19937 gen(9);
  const Material m = make_isotropic(3.0, 0.8);
  for (int k = 0; k < 20; ++k) {
    const Eigen::Matrix2d s = random_matrix(gen);
    const Eigen::Matrix2d t = random_matrix(gen);
    CHECK(std::abs(frob(apply_compliance(m, s), t) - frob(s, apply_compliance(m, t))) < 1e-13);
    CHECK(frob(apply_compliance(m, t), t) >= std::min(m.P, m.Q) * t.squaredNorm() - 1e-15);
    const Eigen::Matrix2d sym = 0.5 * (s + s.transpose());
    CHECK((apply_stiffness(m, apply_compliance(m, sym)) - sym).norm() < 1e-13);
  }
}

TEST_CASE("near incompressibility: Q and Q0 decrease, nu increases to 0.5") {
  double last_q = 1e300, last_nu = 0.0;
  for (double lambda : {1e2, 1e4, 1e6}) {
    const Material m = make_isotropic(lambda, 1.0);
    CHECK(m.Q < last_q);
    CHECK(m.Q0 <= m.Q);
    CHECK(m.nu > last_nu);
    CHECK(m.nu < 0.5);
    last_q = m.Q;
    last_nu = m.nu;
  }
  CHECK(last_q < 1e-6);
  CHECK(std::abs(lambda_from_poisson(0.3, 0.5) - 0.75) < 1e-14);
}
