#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specobs/design.hpp"
#include "specobs/discretize.hpp"
#include "specobs/model.hpp"

namespace specobs {

/// Named analytic initial profile.
///   "sin_pi_x"           amplitude * sin(pi x)
///   "sin_pi_one_minus_x" amplitude * sin(pi (1 - x))
///   "zero"
struct InitProfile {
  std::string kind = "zero";
  double amplitude = 0.0;

  double operator()(double x) const;
  /// Closed-form int_0^1 profile(x)^2 dx.
  double squared_l2() const;
};

struct ExperimentConfig {
  ExchangerParams params{1.0, 1.0, 1.0, 1.0};
  Index n = 200;
  double dt = 2.5e-3;
  double t_final = 5.0;
  std::vector<double> lambda_o_list{3.0, 5.0};
  InitProfile init_h{"sin_pi_x", 8.0};
  InitProfile init_c{"sin_pi_one_minus_x", 6.0};
  Index snapshot_stride = 20;
  std::uint64_t seed = 20240601;

  /// Throws std::invalid_argument on n < 3, dt <= 0, t_final <= 0 or a
  /// non-positive rate.
  void validate() const;
  Field initial_error(const SpatialGrid& grid) const;
};

struct DecayFit {
  bool valid = false;
  double rate = 0.0;
  double M = 0.0;       // exp(intercept) / norm(0)
  double t_begin = 0.0;
  double t_end = 0.0;
  std::vector<std::string> warnings;
};

/// Least-squares line through log(norm) on [t_begin, t_end]; rate = -slope.
/// Samples below 1e-14 * norm(0) end the window early (with a warning).
DecayFit fit_decay_rate(const TimeSeries<double>& norms, double t_begin, double t_end);

/// Window where norm / norm(0) has first dropped below `hi` and not yet
/// fallen under `lo`. Returns nullopt if the series never reaches `hi`.
std::optional<std::pair<double, double>> level_window(const TimeSeries<double>& norms,
                                                      double hi = 1e-2, double lo = 1e-6);

/// Fit on the default scaled-level window [1e-6, 1e-2].
DecayFit fit_tail(const TimeSeries<double>& norms);

/// First sample time where norm / norm(0) <= level.
std::optional<double> first_time_below(const TimeSeries<double>& norms, double level);

/// Linear interpolation of the series at time t.
double sample_at(const TimeSeries<double>& norms, double t);

struct SimResult {
  std::string tag;
  TimeSeries<double> norm_complex;
  TimeSeries<double> norm_real;
  TimeSeries<Field> snapshots;
  DecayFit fit;  // on norm_real
  TimeSeries<double> xi_norms;               // ||(I - P) z||
  TimeSeries<cplx> T_series;                 // -[(I - P) z]^c(0)
  TimeSeries<double> T_l2_cumulative;        // int_0^t |T|^2
  std::vector<std::string> warnings;

  double initial_norm_real() const { return norm_real.values.empty() ? 0.0 : norm_real.values.front(); }
};

/// Simulates the error system with A - kappa C (kappa = 0 without a gain).
SimResult run_error_experiment(const ExperimentConfig& config, const ObserverGain* gain = nullptr);

/// Co-simulates the real plant and the complex observer with inlet data
/// g^h, g^c. norm_complex is ||T - T_hat||, norm_real is ||T - Re T_hat||.
SimResult run_plant_observer_demo(const ExperimentConfig& config, const ObserverGain& gain,
                                  const BoundaryInput& boundary, const Field& plant_init,
                                  const Field& observer_init);

struct DiagnosticsReport {
  TimeSeries<double> xi_norms;
  DecayFit xi_fit;
  TimeSeries<cplx> T_series;
  TimeSeries<double> T_l2_cumulative;
  double T_l2_total = 0.0;
  double tail_increment = 0.0;  // growth of int |T|^2 over the last 20% of the horizon
  double tail_fraction = 0.0;   // tail_increment / T_l2_total
};

/// Stable-complement diagnostics recomputed from the result's snapshots.
/// Throws std::invalid_argument with fewer than 3 snapshots.
DiagnosticsReport diagnostics(const SimResult& result, const UnstableBasis& basis);

}  // namespace specobs
