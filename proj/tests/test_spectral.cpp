#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>

#include "specobs/spectral.hpp"

using namespace specobs;
using Catch::Matchers::WithinAbs;

namespace {

const ExchangerParams kReference(1, 1, 1, 1);

std::size_t count_unstable(const Spectrum& s, double guard = 1e-9) {
  std::size_t q = 0;
  for (const Mode& m : s.modes)
    if (m.lambda.real() >= -guard) ++q;
  return q;
}

// Nearest eigenvalue of `s` to z.
cplx nearest(const Spectrum& s, cplx z) {
  cplx best = s.modes.front().lambda;
  for (const Mode& m : s.modes)
    if (std::abs(m.lambda - z) < std::abs(best - z)) best = m.lambda;
  return best;
}

}  // namespace

TEST_CASE("Vieta relations hold for random spectral parameters") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-20, 20), pos(0.2, 4);
  for (int k = 0; k < 200; ++k) {
    const ExchangerParams p(pos(rng), pos(rng), pos(rng), pos(rng));
    const cplx lambda(u(rng), u(rng));
    const auto c = characteristic_coefficients(lambda, p, 2.5);
    const double scale1 = 1.0 + std::abs(c.theta1);
    const double scale2 = 1.0 + std::abs(c.theta2);
    CHECK(std::abs(c.mu1 + c.mu2 + c.theta1) <= 1e-12 * scale1);
    CHECK(std::abs(c.mu1 * c.mu2 - c.theta2) <= 1e-12 * scale2);
  }
}

TEST_CASE("characteristic coefficients at lambda = lambda_o") {
  const ExchangerParams p(2, 1, 0.5, 3);
  const auto c = characteristic_coefficients(4.0, p, 4.0);
  CHECK(c.theta2 == cplx(0.0));
  const bool zero_and_minus_theta1 =
      (std::abs(c.mu1) < 1e-15 && std::abs(c.mu2 + c.theta1) < 1e-14) ||
      (std::abs(c.mu2) < 1e-15 && std::abs(c.mu1 + c.theta1) < 1e-14);
  CHECK(zero_and_minus_theta1);

  const auto d = characteristic_coefficients(3.0, kReference, 3.0);
  CHECK(d.theta1 == cplx(0.0));
  CHECK(d.theta2 == cplx(0.0));
  CHECK(is_double_root(d));
}

TEST_CASE("double root gives f = 0 and a null eigenfunction") {
  const SpatialGrid g(50);
  CHECK(characteristic_f(3.0, kReference, 3.0) == cplx(0.0));
  CHECK(eigenfunction(3.0, kReference, 3.0, g).stacked().norm() == 0.0);
  // the reduced form is not degenerate there
  CHECK(reduced_eigenfunction(3.0, kReference, 3.0, g).stacked().norm() > 0.0);
  CHECK(std::abs(reduced_characteristic(3.0, kReference, 3.0)) > 0.1);
}

TEST_CASE("f grows along the positive real axis") {
  double prev = 0.0;
  for (double r : {10.0, 20.0, 40.0}) {
    const double v = std::abs(characteristic_f(r + 3.0, kReference, 3.0));
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev > 1e6);
}

TEST_CASE("eigenfunctions vanish at the hot inlet") {
  const SpatialGrid g(64);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 20; ++k) {
    const cplx lambda(u(rng), u(rng));
    CHECK(eigenfunction(lambda, kReference, 5.0, g).h()[0] == cplx(0.0));
    CHECK(reduced_eigenfunction(lambda, kReference, 5.0, g).h()[0] == cplx(0.0));
  }
}

TEST_CASE("unstable counts at the reference parameters") {
  const SpatialGrid g(200);
  const auto s3 = discrete_spectrum(assemble_generator(kReference, g, 3.0));
  const auto s5 = discrete_spectrum(assemble_generator(kReference, g, 5.0));
  CHECK(count_unstable(s3) == 1);
  CHECK(count_unstable(s5) == 9);
  CHECK(s3.modes.size() == static_cast<std::size_t>(g.size() - 2));

  const auto g3 = assemble_generator(kReference, g, 3.0);
  CHECK(unstable_modes(s3, g3, kReference, 3.0).modes.size() == 1);
  const auto g5 = assemble_generator(kReference, g, 5.0);
  CHECK(unstable_modes(s5, g5, kReference, 5.0).modes.size() == 9);
  const auto gs = assemble_generator(kReference, g, 0.001);
  CHECK(unstable_modes(discrete_spectrum(gs), gs, kReference, 0.001).modes.empty());
}

TEST_CASE("unshifted spectrum lies in the closed left half-plane") {
  const SpatialGrid g(200);
  const auto s = discrete_spectrum(assemble_generator(kReference, g, 0.0));
  for (const Mode& m : s.modes) CHECK(m.lambda.real() <= 1e-9);

  Eigen::VectorXcd ev(static_cast<Index>(s.modes.size()));
  for (std::size_t k = 0; k < s.modes.size(); ++k) ev[static_cast<Index>(k)] = s.modes[k].lambda;
  CHECK(conjugate_asymmetry(ev) <= 1e-8);
}

TEST_CASE("discrete modes are normalized eigenpairs") {
  const SpatialGrid g(100);
  const auto gen = assemble_generator(kReference, g, 5.0);
  const auto s = discrete_spectrum(gen);
  for (std::size_t k = 0; k < 10; ++k) {
    const Mode& m = s.modes[k];
    CHECK_THAT(l2_norm(m.eigenfunction, g), WithinAbs(1.0, 1e-12));
    CHECK(m.residual <= 1e-10);
    CHECK(m.eigenfunction.h()[0] == cplx(0.0));
    CHECK(m.eigenfunction.c()[g.n() - 1] == cplx(0.0));
    CHECK(std::abs(mode_residual(gen, m.lambda, m.eigenfunction) - m.residual) <= 1e-12);
  }
  // sorted by decreasing real part
  for (std::size_t k = 1; k < s.modes.size(); ++k) CHECK(s.modes[k].lambda.real() <= s.modes[k - 1].lambda.real());
}

TEST_CASE("discrete_spectrum rejects an injected generator") {
  const SpatialGrid g(10);
  Field kappa(g.n());
  kappa.h()[3] = 1.0;
  CHECK_THROWS_AS(discrete_spectrum(assemble_generator(kReference, g, 0.0, kappa)), std::invalid_argument);
}

TEST_CASE("polished roots satisfy the cold outlet condition") {
  const SpatialGrid g(200);
  const auto gen = assemble_generator(kReference, g, 5.0);
  const auto sel = unstable_modes(discrete_spectrum(gen), gen, kReference, 5.0);
  REQUIRE(sel.modes.size() == 9);
  for (const Mode& m : sel.modes) {
    REQUIRE(m.polished_lambda.has_value());
    const cplx root = *m.polished_lambda;
    CHECK(std::abs(reduced_characteristic(root, kReference, 5.0)) <= 1e-9);
    const Field v = reduced_eigenfunction(root, kReference, 5.0, g);
    CHECK(std::abs(v.c()[g.n() - 1]) <= 1e-8 * v.c().cwiseAbs().maxCoeff());
    // the analytic mode is a first-order approximation of the discrete one
    const Mode a = analytic_mode(root, gen, kReference, 5.0);
    const double r = 1.0 + std::abs(root);
    CHECK(a.residual <= r * r * g.dx());
  }
}

TEST_CASE("|f| at the discrete eigenvalues shrinks under refinement") {
  // track the n = 200 unstable set on the coarser and finer grids
  const SpatialGrid g200(200);
  const auto s200 = discrete_spectrum(assemble_generator(kReference, g200, 5.0));
  std::vector<cplx> tracked;
  for (const Mode& m : s200.modes)
    if (m.lambda.real() >= -1e-9) tracked.push_back(m.lambda);
  REQUIRE(tracked.size() == 9);

  const auto s100 = discrete_spectrum(assemble_generator(kReference, SpatialGrid(100), 5.0));
  const auto s400 = discrete_spectrum(assemble_generator(kReference, SpatialGrid(400), 5.0));
  for (cplx z : tracked) {
    const double f100 = std::abs(characteristic_f(nearest(s100, z), kReference, 5.0));
    const double f200 = std::abs(characteristic_f(z, kReference, 5.0));
    const double f400 = std::abs(characteristic_f(nearest(s400, z), kReference, 5.0));
    if (f100 < 1e-9) continue;  // exact discrete eigenvalue, roundoff only
    CHECK(f200 < f100);
    CHECK(f400 < f200);
  }
}

TEST_CASE("verbatim exponents do not vanish on the spectrum") {
  const SpatialGrid g(200);
  const auto gen = assemble_generator(kReference, g, 5.0);
  const auto sel = unstable_modes(discrete_spectrum(gen), gen, kReference, 5.0);
  double worst = 0.0;
  for (const Mode& m : sel.modes)
    if (m.polished_lambda && std::abs(m.polished_lambda->imag()) > 1.0)
      worst = std::max(worst, std::abs(characteristic_f(*m.polished_lambda, kReference, 5.0, ExponentMode::verbatim)));
  CHECK(worst > 1e-3);
}

TEST_CASE("uncoupled parameters skip the analytic machinery") {
  const ExchangerParams p(1, 1, 0, 0);
  CHECK_THROWS_AS(characteristic_f(1.0, p, 1.0), std::invalid_argument);
  const SpatialGrid g(60);
  const auto gen = assemble_generator(p, g, 50.0);
  const auto sel = unstable_modes(discrete_spectrum(gen), gen, p, 50.0);
  for (const Mode& m : sel.modes) CHECK_FALSE(m.polished_lambda.has_value());
}

TEST_CASE("greedy multiset matching") {
  Eigen::VectorXcd a(3), b(3);
  a << cplx(1, 1), cplx(1, -1), cplx(-2, 0);
  b << cplx(-2, 1e-7), cplx(1, -1), cplx(1, 1 + 2e-7);
  CHECK_THAT(match_multisets(a, b), WithinAbs(2e-7, 1e-15));
  CHECK_THROWS(match_multisets(a, Eigen::VectorXcd(2)));
  CHECK(conjugate_asymmetry(a) == 0.0);
}
