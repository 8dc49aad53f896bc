#include "specobs/validate.hpp"

#include <cmath>
#include <random>
#include <sstream>

namespace specobs {

namespace {

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(4);
  s << v;
  return s.str();
}

}  // namespace

DissipativityReport dissipativity_sample(const ExchangerParams& params, const SpatialGrid& grid,
                                         const Field& kappa, std::uint64_t seed, int samples) {
  require_on_grid(kappa, grid, "dissipativity_sample");
  const DiscreteGenerator gen = assemble_generator(params, grid, 0.0, kappa);
  const double kn = l2_norm(kappa, grid);

  DissipativityReport rep;
  rep.samples = samples;
  rep.bound = spectral_norm_M(params) + kn * kn / params.u2() + 10.0 * grid.dx();

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (int s = 0; s < samples; ++s) {
    Eigen::VectorXcd z(grid.size());
    for (Index i = 0; i < z.size(); ++i) z[i] = cplx(normal(rng), normal(rng));
    z[gen.hot_inlet()] = 0.0;
    z[gen.cold_inlet()] = 0.0;
    const double energy = std::pow(l2_norm(z, grid), 2);
    const double ratio = inner(Eigen::VectorXcd(gen.mat * z), z, grid).real() / energy;
    rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    if (ratio > rep.bound) ++rep.violations;
  }
  return rep;
}

Eigen::VectorXcd closed_loop_spectrum(const ExchangerParams& params, const SpatialGrid& grid,
                                      const Field& kappa) {
  return generator_eigenvalues(assemble_generator(params, grid, 0.0, kappa));
}

double oracle_tolerance(cplx lambda_shifted, const SpatialGrid& grid) {
  const double r = 1.0 + std::abs(lambda_shifted);
  return r * r * grid.dx();
}

std::vector<CheckResult> run_validation(const ExperimentConfig& config) {
  config.validate();
  const SpatialGrid grid(config.n);
  const ExchangerParams& params = config.params;
  std::vector<CheckResult> out;
  const auto add = [&](std::string name, bool ok, std::string detail) {
    out.push_back({std::move(name), ok, std::move(detail)});
  };

  {
    const Field init = config.initial_error(grid);
    const double exact = std::sqrt(config.init_h.squared_l2() + config.init_c.squared_l2());
    const double got = l2_norm(init, grid);
    const double rel = exact > 0.0 ? std::abs(got - exact) / exact : got;
    // trapezoid error for these profiles is O(dx^2)
    const double tol = std::max(1e-4, 10.0 * grid.dx() * grid.dx());
    add("initial norm quadrature", rel <= tol, "rel err " + fmt(rel) + " (tol " + fmt(tol) + ")");
  }

  for (double lo : config.lambda_o_list) {
    const std::string tag = "[lambda_o=" + fmt(lo) + "] ";
    ObserverDesign d;
    try {
      d = design_observer(params, grid, lo);
    } catch (const ObservabilityError& e) {
      add(tag + "hautus", false, e.what());
      continue;
    } catch (const std::exception& e) {
      add(tag + "design", false, e.what());
      continue;
    }
    add(tag + "unstable modes", true, "q = " + std::to_string(d.q()));

    const double gram = gram_deviation(d.basis);
    add(tag + "orthonormality", gram <= 1e-8, "max |G - I| = " + fmt(gram));
    if (d.q() > 0) {
      const double span = span_residual(d.basis);
      add(tag + "basis spans modes", span <= 1e-8, "max ||(I-P)v||/||v|| = " + fmt(span));
      add(tag + "projected eigenvalues", d.eig_match_distance <= 1e-6,
          "match distance " + fmt(d.eig_match_distance));
      add(tag + "hautus", d.observability.observable,
          "min sigma = " + fmt(d.observability.min_margin));
      add(tag + "riccati residual", d.system.riccati_residual <= 1e-8, fmt(d.system.riccati_residual));
      const double cl = d.projected_closed_loop.real().maxCoeff();
      add(tag + "projected closed loop", cl < 0.0, "max Re = " + fmt(cl));
    }

    const Eigen::VectorXcd full = closed_loop_spectrum(params, grid, d.gain.kappa);
    const double alpha = full.real().maxCoeff();
    add(tag + "closed-loop spectrum", alpha <= -lo + 0.5,
        "max Re = " + fmt(alpha) + " (limit " + fmt(-lo + 0.5) + ")");

    const auto diss = dissipativity_sample(params, grid, d.gain.kappa, config.seed);
    add(tag + "dissipativity sampling", diss.violations == 0,
        std::to_string(diss.violations) + "/" + std::to_string(diss.samples) + " violations, worst " +
            fmt(diss.worst_ratio) + " vs bound " + fmt(diss.bound));

    if (params.coupled() && d.q() > 0) {
      double worst = 0.0;
      int missing = 0;
      for (const Mode& m : d.selection.modes) {
        if (!m.polished_lambda) {
          ++missing;
          continue;
        }
        worst = std::max(worst, std::abs(*m.polished_lambda - m.lambda) / oracle_tolerance(m.lambda, grid));
      }
      add(tag + "oracle cross-validation", missing == 0 && worst <= 1.0,
          "max gap / tol(n) = " + fmt(worst) +
              (missing ? ", " + std::to_string(missing) + " modes without analytic root" : ""));
    }
  }
  return out;
}

}  // namespace specobs
