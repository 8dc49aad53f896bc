#include "catch_amalgamated.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "specobs/model.hpp"

using namespace specobs;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("ExchangerParams validates its constants") {
  CHECK_NOTHROW(ExchangerParams(1, 1, 1, 1));
  CHECK_NOTHROW(ExchangerParams(1, 1, 0, 0));  // uncoupled transport limit
  CHECK_THROWS_AS(ExchangerParams(0, 1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(ExchangerParams(1, -1, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(ExchangerParams(1, 1, -1, 1), std::invalid_argument);
  CHECK_THROWS_AS(ExchangerParams(1, 1, 1, std::nan("")), std::invalid_argument);
  CHECK(ExchangerParams(1, 1, 1, 1).coupled());
  CHECK_FALSE(ExchangerParams(1, 1, 0, 1).coupled());
}

TEST_CASE("system matrices for the reference parameters") {
  const auto m = system_matrices(ExchangerParams(1, 1, 1, 1));
  Eigen::Matrix2d U, M;
  U << -1, 0, 0, 1;
  M << -1, 1, 1, -1;
  CHECK(m.U == U);
  CHECK(m.M == M);

  const auto m2 = system_matrices(ExchangerParams(2, 3, 0.5, 0.25));
  U << -2, 0, 0, 3;
  M << -0.5, 0.5, 0.25, -0.25;
  CHECK(m2.U == U);
  CHECK(m2.M == M);
}

TEST_CASE("coupling matrix rows sum to zero and the call is pure") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  for (int k = 0; k < 50; ++k) {
    const ExchangerParams p(pos(rng), pos(rng), pos(rng), pos(rng));
    const auto a = system_matrices(p);
    const auto b = system_matrices(p);
    CHECK(a.M.rowwise().sum().cwiseAbs().maxCoeff() == 0.0);
    CHECK(a.U(0, 0) < 0.0);
    CHECK(a.U(1, 1) > 0.0);
    CHECK(a.M(0, 1) > 0.0);
    CHECK(a.M(1, 0) > 0.0);
    CHECK(a.M == b.M);
    CHECK(a.U == b.U);

    const double s = spectral_norm_M(p);
    CHECK(s <= std::sqrt(2.0) * std::hypot(p.c1(), p.c2()) + 1e-12);
    CHECK(s >= std::max(p.c1(), p.c2()) - 1e-12);
  }
}

TEST_CASE("spectral norm of M") {
  CHECK_THAT(spectral_norm_M(ExchangerParams(1, 1, 1, 1)), WithinAbs(2.0, 1e-14));
  CHECK(spectral_norm_M(ExchangerParams(1, 1, 0, 0)) == 0.0);
}

TEST_CASE("grid nodes and trapezoidal weights") {
  for (Index n : {3, 4, 25, 200}) {
    const SpatialGrid g(n);
    CHECK(g.x()[0] == 0.0);
    CHECK(g.x()[n - 1] == 1.0);
    for (Index i = 0; i + 1 < n; ++i) {
      CHECK(g.x()[i + 1] > g.x()[i]);
      CHECK(std::abs(g.x()[i + 1] - g.x()[i] - g.dx()) <= 1e-14);
    }
    CHECK_THAT(g.weights().sum(), WithinAbs(1.0, 1e-14));
    CHECK(g.size() == 2 * n);
    CHECK(g.cold(0) == n);
  }
  CHECK_THROWS_AS(SpatialGrid(2), std::invalid_argument);
}

TEST_CASE("inner product conventions") {
  const SpatialGrid g(50);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  const auto rnd = [&] {
    Eigen::VectorXcd v(g.size());
    for (Index i = 0; i < v.size(); ++i) v[i] = cplx(nd(rng), nd(rng));
    return v;
  };
  const Eigen::VectorXcd a = rnd(), b = rnd(), c = rnd();
  const cplx s(0.3, -1.7);

  SECTION("linear in the first argument") {
    const cplx lhs = inner(Eigen::VectorXcd(s * a + c), b, g);
    const cplx rhs = s * inner(a, b, g) + inner(c, b, g);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(rhs));
  }
  SECTION("conjugate linear in the second") {
    const cplx lhs = inner(a, Eigen::VectorXcd(s * b), g);
    CHECK(std::abs(lhs - std::conj(s) * inner(a, b, g)) <= 1e-12 * std::abs(lhs));
  }
  SECTION("Hermitian symmetry and norm") {
    CHECK(std::abs(inner(a, b, g) - std::conj(inner(b, a, g))) <= 1e-12);
    CHECK_THAT(inner(a, a, g).real(), WithinRel(std::pow(l2_norm(a, g), 2), 1e-13));
  }
}

TEST_CASE("quadrature of the reference initial error") {
  const SpatialGrid g(200);
  const Field f = Field::sample(
      g, [](double x) { return cplx(8.0 * std::sin(std::numbers::pi * x)); },
      [](double x) { return cplx(6.0 * std::sin(std::numbers::pi * (1.0 - x))); });
  CHECK(f.h()[0] == 0.0);
  CHECK(std::abs(f.c()[199]) < 1e-14);
  CHECK_THAT(l2_norm(f, g), WithinRel(std::sqrt(50.0), 1e-4));
}

TEST_CASE("Field arithmetic and grid checks") {
  const SpatialGrid g(10);
  Field a(10);
  a.h()[3] = cplx(1, 2);
  const Field b = cplx(2, 0) * a;
  CHECK(b.h()[3] == cplx(2, 4));
  CHECK((b - a).h()[3] == cplx(1, 2));
  CHECK(a.real_part().h()[3] == cplx(1, 0));
  CHECK_NOTHROW(require_on_grid(a, g, "a"));
  CHECK_THROWS_AS(require_on_grid(Field(11), g, "b"), std::invalid_argument);
}

TEST_CASE("boundary input defaults to homogeneous data") {
  const auto b = BoundaryInput::homogeneous();
  CHECK(b.gh(0.0) == 0.0);
  CHECK(b.gc(123.0) == 0.0);
}
