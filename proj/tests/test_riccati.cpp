#include "catch_amalgamated.hpp"

#include <cmath>
#include <complex>
#include <random>

#include <Eigen/Eigenvalues>

#include "specobs/riccati.hpp"

using namespace specobs;
using cplx = std::complex<double>;
using Eigen::Index;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

double max_real_eig(const Eigen::MatrixXcd& M) {
  return Eigen::ComplexEigenSolver<Eigen::MatrixXcd>(M, false).eigenvalues().real().maxCoeff();
}

}  // namespace

TEST_CASE("scalar filter Riccati equation") {
  for (double a : {0.5, 2.0, 7.0}) {
    for (double q0 : {1.0, 25.0, 49.0}) {
      Eigen::MatrixXcd A(1, 1), C(1, 1), Q(1, 1);
      A << a;
      C << 1.0;
      Q << q0;
      const Eigen::MatrixXcd P = solve_filter_are(A, C, Q, 1.0);
      const double expect = a + std::sqrt(a * a + q0);
      CHECK_THAT(P(0, 0).real(), WithinRel(expect, 1e-10));
      CHECK(std::abs(P(0, 0).imag()) < 1e-12);
      CHECK_THAT((A - P * C.adjoint() * C)(0, 0).real(), WithinRel(-std::sqrt(a * a + q0), 1e-10));
    }
  }
}

TEST_CASE("complex filter Riccati on random observable pairs") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 10; ++trial) {
    const Index q = 1 + trial % 6;
    Eigen::MatrixXcd A(q, q), C(1, q);
    for (Index i = 0; i < q; ++i) {
      C(0, i) = cplx(nd(rng), nd(rng));
      for (Index j = 0; j < q; ++j) A(i, j) = cplx(nd(rng), nd(rng));
    }
    A += 2.0 * Eigen::MatrixXcd::Identity(q, q);  // mostly unstable
    const Eigen::MatrixXcd Q = 25.0 * Eigen::MatrixXcd::Identity(q, q);
    const Eigen::MatrixXcd P = solve_filter_are(A, C, Q, 1.0);
    // random single-output pairs can be weakly observable (cond(P) up to ~1e6),
    // so measure the residual against the size of the individual terms
    const Eigen::MatrixXcd res = A * P + P * A.adjoint() - P * C.adjoint() * C * P + Q;
    const double scale = Q.norm() + 2 * A.norm() * P.norm() + (P * C.adjoint() * C * P).norm();
    CHECK(res.norm() <= 1e-10 * scale);
    CHECK((P - P.adjoint()).norm() <= 1e-12 * P.norm());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(P);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(max_real_eig(A - P * C.adjoint() * C) < 0.0);
  }
}

TEST_CASE("cheap state weight gives a small gain on a stable system") {
  Eigen::MatrixXcd A(2, 2), C(1, 2);
  A << cplx(-1, 2), 0.3, 0, cplx(-2, -1);
  C << 1.0, cplx(0.5, 0.5);
  double prev = 1e300;
  for (double eps : {1e-2, 1e-4, 1e-6}) {
    const Eigen::MatrixXcd Q = eps * Eigen::MatrixXcd::Identity(2, 2);
    const Eigen::MatrixXcd K = solve_filter_are(A, C, Q, 1.0) * C.adjoint();
    CHECK(K.norm() < prev);
    prev = K.norm();
  }
  CHECK(prev < 1e-5);
}

TEST_CASE("real CARE against a known solution") {
  // double integrator with unit weights: X = [[sqrt3, 1], [1, sqrt3]]
  Eigen::MatrixXd A(2, 2), B(2, 1), Q = Eigen::MatrixXd::Identity(2, 2), R(1, 1);
  A << 0, 1, 0, 0;
  B << 0, 1;
  R << 1;
  const Eigen::MatrixXd X = solve_care(A, B, Q, R);
  CHECK_THAT(X(0, 0), WithinAbs(std::sqrt(3.0), 1e-10));
  CHECK_THAT(X(0, 1), WithinAbs(1.0, 1e-10));
  CHECK_THAT(X(1, 1), WithinAbs(std::sqrt(3.0), 1e-10));
  CHECK_THROWS_AS(solve_care(A, B, Q, Eigen::MatrixXd::Zero(1, 1)), std::runtime_error);
}

TEST_CASE("Lyapunov solver") {
  Eigen::MatrixXcd A(2, 2);
  A << cplx(-1, 1), 0.5, 0.2, cplx(-3, 0);
  const Eigen::MatrixXcd Q = Eigen::MatrixXcd::Identity(2, 2);
  const Eigen::MatrixXcd X = solve_lyapunov(A, Q);
  CHECK((A * X + X * A.adjoint() + Q).norm() <= 1e-13);
}

TEST_CASE("realification is a ring homomorphism") {
  Eigen::MatrixXcd X(2, 2), Y(2, 2);
  X << cplx(1, 2), cplx(0, -1), 3, cplx(-1, 1);
  Y << cplx(0, 1), 2, cplx(1, 1), cplx(4, 0);
  CHECK((realify(X * Y) - realify(X) * realify(Y)).norm() <= 1e-14);
  CHECK((realify(X.adjoint()) - realify(X).transpose()).norm() == 0.0);
}

TEST_CASE("Riccati input validation") {
  const Eigen::MatrixXcd A = Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(solve_filter_are(A, Eigen::MatrixXcd::Ones(1, 3), A, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(solve_filter_are(A, Eigen::MatrixXcd::Ones(1, 2), A, 0.0), std::invalid_argument);
}
