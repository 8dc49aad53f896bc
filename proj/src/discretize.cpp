#include "specobs/discretize.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace specobs {

std::vector<Index> DiscreteGenerator::free_indices() const {
  std::vector<Index> idx;
  idx.reserve(static_cast<std::size_t>(grid.size() - 2));
  for (Index i = 0; i < grid.size(); ++i)
    if (i != hot_inlet() && i != cold_inlet()) idx.push_back(i);
  return idx;
}

Eigen::MatrixXcd DiscreteGenerator::free_block() const {
  const auto idx = free_indices();
  return mat(idx, idx);
}

DiscreteGenerator assemble_generator(const ExchangerParams& params, const SpatialGrid& grid,
                                     double shift, const std::optional<Field>& kappa) {
  if (kappa) require_on_grid(*kappa, grid, "assemble_generator(kappa)");

  const Index n = grid.n();
  const double inv_dx = 1.0 / grid.dx();
  const double u1 = params.u1(), u2 = params.u2(), c1 = params.c1(), c2 = params.c2();

  DiscreteGenerator gen{Eigen::MatrixXcd::Zero(2 * n, 2 * n), shift, kappa.has_value(), grid,
                        params};
  auto& L = gen.mat;

  // hot: backward difference, nodes 1..n-1
  for (Index i = 1; i < n; ++i) {
    const Index r = grid.hot(i);
    L(r, grid.hot(i)) += -u1 * inv_dx - c1 + shift;
    L(r, grid.hot(i - 1)) += u1 * inv_dx;
    L(r, grid.cold(i)) += c1;
  }
  // cold: forward difference, nodes 0..n-2
  for (Index i = 0; i + 1 < n; ++i) {
    const Index r = grid.cold(i);
    L(r, grid.cold(i)) += -u2 * inv_dx - c2 + shift;
    L(r, grid.cold(i + 1)) += u2 * inv_dx;
    L(r, grid.hot(i)) += c2;
  }

  if (kappa) {
    L.col(gen.measured()) -= kappa->stacked();
    L.row(gen.hot_inlet()).setZero();
    L.row(gen.cold_inlet()).setZero();
  }
  return gen;
}

ImplicitEulerStepper::ImplicitEulerStepper(const DiscreteGenerator& gen, double dt)
    : gen_(&gen), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be > 0");
  const Index N = gen.mat.rows();
  Eigen::MatrixXcd system = Eigen::MatrixXcd::Identity(N, N) - dt * gen.mat;
  lu_.compute(system);
  const double rcond = lu_.rcond();
  if (!(rcond > 64.0 * std::numeric_limits<double>::epsilon()))
    throw std::runtime_error("implicit Euler system is singular (rcond = " +
                             std::to_string(rcond) + ", dt = " + std::to_string(dt) + ")");
}

Field ImplicitEulerStepper::step(const Field& state) const {
  return step(state, 0.0, 0.0);
}

Field ImplicitEulerStepper::step(const Field& state, double gh_next, double gc_next,
                                 const Eigen::VectorXcd* source) const {
  require_on_grid(state, gen_->grid, "implicit Euler step");
  Eigen::VectorXcd rhs = state.stacked();
  if (source) rhs += dt_ * (*source);
  rhs[gen_->hot_inlet()] = gh_next;
  rhs[gen_->cold_inlet()] = gc_next;
  Field next(lu_.solve(rhs));
  // identity rows: pin exactly, the LU solve can leave roundoff there
  next.stacked()[gen_->hot_inlet()] = gh_next;
  next.stacked()[gen_->cold_inlet()] = gc_next;
  return next;
}

Field step_implicit_euler(const Field& state, const DiscreteGenerator& gen, double dt,
                          const ImplicitEulerStepper* stepper) {
  if (stepper) {
    if (stepper->dt() != dt || &stepper->generator() != &gen)
      throw std::invalid_argument("cached stepper was built for a different (generator, dt)");
    return stepper->step(state);
  }
  return ImplicitEulerStepper(gen, dt).step(state);
}

Index step_count(double t_final, double dt) {
  if (!(t_final > 0.0) || !(dt > 0.0))
    throw std::invalid_argument("t_final and dt must be > 0");
  // tolerate representation error in t_final/dt (5.0/0.0025 is not exact)
  return static_cast<Index>(std::ceil(t_final / dt - 1e-9));
}

SimulationOutput simulate(const DiscreteGenerator& gen, const Field& init, double dt,
                          double t_final, Index snapshot_every, const StepObserver& on_step) {
  require_on_grid(init, gen.grid, "simulate");
  if (snapshot_every < 1) throw std::invalid_argument("snapshot stride must be >= 1");
  const Index steps = step_count(t_final, dt);
  const ImplicitEulerStepper stepper(gen, dt);

  SimulationOutput out;
  out.norms.times.reserve(static_cast<std::size_t>(steps + 1));
  out.norms.values.reserve(static_cast<std::size_t>(steps + 1));

  Field z = init;
  for (Index k = 0;; ++k) {
    const double t = static_cast<double>(k) * dt;
    out.norms.push(t, l2_norm(z, gen.grid));
    if (k % snapshot_every == 0) out.snapshots.push(t, z);
    if (on_step) on_step(k, t, z);
    if (k == steps) break;
    z = stepper.step(z);
  }
  return out;
}

}  // namespace specobs
