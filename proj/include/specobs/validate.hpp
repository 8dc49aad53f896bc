#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specobs/design.hpp"
#include "specobs/experiment.hpp"

namespace specobs {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct DissipativityReport {
  int samples = 0;
  int violations = 0;
  double worst_ratio = -1e300;  // max Re<z, (A - kappa C) z> / ||z||^2
  double bound = 0.0;           // |M|_2 + ||kappa||^2 / u2 + 10 dx
};

/// Re<z, (A - kappa C) z> on `samples` seeded random fields with
/// z^h(0) = z^c(1) = 0, compared against the coercivity bound.
DissipativityReport dissipativity_sample(const ExchangerParams& params, const SpatialGrid& grid,
                                         const Field& kappa, std::uint64_t seed, int samples = 100);

/// Eigenvalues of the discrete unshifted closed loop A - kappa C (free nodes).
Eigen::VectorXcd closed_loop_spectrum(const ExchangerParams& params, const SpatialGrid& grid,
                                      const Field& kappa);

/// Allowed gap between a discrete eigenvalue and its analytic root:
/// (1 + |lambda_s|)^2 dx, with lambda_s in the shifted frame.
double oracle_tolerance(cplx lambda_shifted, const SpatialGrid& grid);

/// Runs every invariant check for each configured rate.
std::vector<CheckResult> run_validation(const ExperimentConfig& config);

}  // namespace specobs
