#include "catch_amalgamated.hpp"

#include "specobs/validate.hpp"

using namespace specobs;

namespace {

bool all_passed(const std::vector<CheckResult>& checks) {
  for (const auto& c : checks) {
    INFO(c.name << ": " << c.detail);
    CHECK(c.passed);
    if (!c.passed) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("reference configuration passes every check") {
  const auto checks = run_validation(ExperimentConfig{});
  CHECK(checks.size() > 10);
  CHECK(all_passed(checks));
}

TEST_CASE("coarse grid passes with the loosened oracle tolerance") {
  ExperimentConfig c;
  c.n = 25;
  CHECK(all_passed(run_validation(c)));
}

TEST_CASE("dissipativity sampling without a gain") {
  const SpatialGrid g(100);
  const auto rep = dissipativity_sample(ExchangerParams(1, 1, 1, 1), g, Field(g.n()), 42);
  CHECK(rep.samples == 100);
  CHECK(rep.violations == 0);
  CHECK(rep.bound == Catch::Approx(2.0 + 10 * g.dx()));
}

TEST_CASE("oracle tolerance shrinks with the mesh") {
  const cplx z(-0.3, 4.1);
  CHECK(oracle_tolerance(z, SpatialGrid(400)) < oracle_tolerance(z, SpatialGrid(200)));
  CHECK(oracle_tolerance(z, SpatialGrid(200)) < oracle_tolerance(z, SpatialGrid(100)));
}
