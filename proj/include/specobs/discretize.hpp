#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/LU>

#include "specobs/model.hpp"

namespace specobs {

/// Upwind finite-difference stand-in for A + shift*I - kappa*C acting on the
/// stacked vector [zh; zc].
///
/// Rows of the two Dirichlet entries (zh node 0, zc node n-1) are identically
/// zero: those entries have no dynamics and stay at their boundary value.
struct DiscreteGenerator {
  Eigen::MatrixXcd mat;
  double shift = 0.0;
  bool has_injection = false;
  SpatialGrid grid;
  ExchangerParams params;

  Index hot_inlet() const { return grid.hot(0); }
  Index cold_inlet() const { return grid.cold(grid.n() - 1); }
  /// Index of the measured node zc(0).
  Index measured() const { return grid.cold(0); }

  /// Indices of all entries except the two Dirichlet ones, ascending.
  std::vector<Index> free_indices() const;
  /// mat restricted to the free entries.
  Eigen::MatrixXcd free_block() const;
};

DiscreteGenerator assemble_generator(const ExchangerParams& params, const SpatialGrid& grid,
                                     double shift,
                                     const std::optional<Field>& kappa = std::nullopt);

template <typename T>
struct TimeSeries {
  std::vector<double> times;
  std::vector<T> values;

  void push(double t, T v) {
    times.push_back(t);
    values.push_back(std::move(v));
  }
  std::size_t size() const { return times.size(); }
  bool empty() const { return times.empty(); }
};

/// Cached LU of (I - dt*mat) for repeated implicit Euler steps.
class ImplicitEulerStepper {
 public:
  ImplicitEulerStepper(const DiscreteGenerator& gen, double dt);

  /// Homogeneous step: Dirichlet entries of the result are exactly zero.
  Field step(const Field& state) const;

  /// Step with inhomogeneous Dirichlet data imposed at the new time level,
  /// plus an optional additive source dt*source on the right-hand side.
  Field step(const Field& state, double gh_next, double gc_next,
             const Eigen::VectorXcd* source = nullptr) const;

  double dt() const { return dt_; }
  const DiscreteGenerator& generator() const { return *gen_; }

 private:
  const DiscreteGenerator* gen_;
  double dt_;
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu_;
};

/// One implicit Euler step. Pass `stepper` to reuse a factorization built for
/// the same (gen, dt); otherwise one is built on the fly.
Field step_implicit_euler(const Field& state, const DiscreteGenerator& gen, double dt,
                          const ImplicitEulerStepper* stepper = nullptr);

/// Number of steps needed to reach t_final with step dt.
Index step_count(double t_final, double dt);

struct SimulationOutput {
  TimeSeries<double> norms;      // L2 norm at every step, including t = 0
  TimeSeries<Field> snapshots;   // every `snapshot_every` steps
};

using StepObserver = std::function<void(Index step, double t, const Field& state)>;

SimulationOutput simulate(const DiscreteGenerator& gen, const Field& init, double dt,
                          double t_final, Index snapshot_every,
                          const StepObserver& on_step = {});

}  // namespace specobs
