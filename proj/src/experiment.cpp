#include "specobs/experiment.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace specobs {

double InitProfile::operator()(double x) const {
  if (kind == "sin_pi_x") return amplitude * std::sin(std::numbers::pi * x);
  if (kind == "sin_pi_one_minus_x") return amplitude * std::sin(std::numbers::pi * (1.0 - x));
  if (kind == "zero") return 0.0;
  throw std::invalid_argument("unknown initial profile '" + kind + "'");
}

double InitProfile::squared_l2() const {
  if (kind == "sin_pi_x" || kind == "sin_pi_one_minus_x") return 0.5 * amplitude * amplitude;
  if (kind == "zero") return 0.0;
  throw std::invalid_argument("unknown initial profile '" + kind + "'");
}

void ExperimentConfig::validate() const {
  if (n < 3) throw std::invalid_argument("grid size n must be >= 3");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be > 0");
  if (!(t_final > 0.0)) throw std::invalid_argument("t_final must be > 0");
  if (snapshot_stride < 1) throw std::invalid_argument("snapshot stride must be >= 1");
  for (double l : lambda_o_list)
    if (!(l > 0.0)) throw std::invalid_argument("prescribed rates must be > 0");
  (void)init_h(0.0);
  (void)init_c(0.0);
}

Field ExperimentConfig::initial_error(const SpatialGrid& grid) const {
  return Field::sample(grid, [&](double x) { return cplx(init_h(x)); },
                       [&](double x) { return cplx(init_c(x)); });
}

DecayFit fit_decay_rate(const TimeSeries<double>& norms, double t_begin, double t_end) {
  DecayFit fit;
  fit.t_begin = t_begin;
  fit.t_end = t_end;
  if (norms.empty() || !(norms.values.front() > 0.0)) {
    fit.warnings.push_back("zero initial norm; decay rate undefined");
    return fit;
  }
  if (t_begin < norms.times.front() || t_end > norms.times.back() || !(t_end > t_begin))
    throw std::invalid_argument("fit window outside the series");

  const double n0 = norms.values.front();
  const double floor = 1e-14 * n0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    const double t = norms.times[k];
    if (t < t_begin) continue;
    if (t > t_end) break;
    if (!(norms.values[k] > floor)) {
      std::ostringstream w;
      w << "norm reached the numerical floor at t = " << t << "; window shrunk";
      fit.warnings.push_back(w.str());
      fit.t_end = count ? norms.times[k - 1] : t_begin;
      break;
    }
    const double y = std::log(norms.values[k]);
    sx += t;
    sy += y;
    sxx += t * t;
    sxy += t * y;
    ++count;
  }
  if (count < 2) {
    fit.warnings.push_back("fewer than two samples in the fit window");
    return fit;
  }
  const double c = static_cast<double>(count);
  const double denom = c * sxx - sx * sx;
  const double slope = (c * sxy - sx * sy) / denom;
  const double intercept = (sy - slope * sx) / c;
  fit.valid = true;
  fit.rate = -slope;
  fit.M = std::exp(intercept) / n0;
  return fit;
}

std::optional<std::pair<double, double>> level_window(const TimeSeries<double>& norms, double hi,
                                                      double lo) {
  if (norms.empty() || !(norms.values.front() > 0.0)) return std::nullopt;
  const double n0 = norms.values.front();
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t k = 0; k < norms.size(); ++k) {
    const double s = norms.values[k] / n0;
    if (!first) {
      if (s <= hi) first = last = k;
      continue;
    }
    if (s < lo) break;
    last = k;
  }
  if (!first || last <= *first) return std::nullopt;
  return std::make_pair(norms.times[*first], norms.times[last]);
}

DecayFit fit_tail(const TimeSeries<double>& norms) {
  const auto window = level_window(norms);
  if (!window) {
    DecayFit fit;
    fit.warnings.push_back("series never enters the scaled-norm window [1e-6, 1e-2]");
    return fit;
  }
  return fit_decay_rate(norms, window->first, window->second);
}

std::optional<double> first_time_below(const TimeSeries<double>& norms, double level) {
  if (norms.empty() || !(norms.values.front() > 0.0)) return std::nullopt;
  for (std::size_t k = 0; k < norms.size(); ++k)
    if (norms.values[k] / norms.values.front() <= level) return norms.times[k];
  return std::nullopt;
}

double sample_at(const TimeSeries<double>& s, double t) {
  if (s.empty()) throw std::invalid_argument("empty series");
  if (t <= s.times.front()) return s.values.front();
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (s.times[k] >= t) {
      const double a = (t - s.times[k - 1]) / (s.times[k] - s.times[k - 1]);
      return (1.0 - a) * s.values[k - 1] + a * s.values[k];
    }
  }
  return s.values.back();
}

namespace {

// Accumulates the per-step norms and stable-complement series.
struct Recorder {
  const SpatialGrid& grid;
  const UnstableBasis& basis;
  SimResult& out;
  double cumulative = 0.0;
  double last_t = 0.0;
  double last_abs2 = 0.0;

  void record(Index k, double t, const Field& z) {
    out.norm_complex.push(t, l2_norm(z, grid));
    out.norm_real.push(t, l2_norm(Eigen::VectorXcd(z.stacked().real().cast<cplx>()), grid));
    const Eigen::VectorXcd xi = complement(z.stacked(), basis);
    const cplx T = -xi[grid.cold(0)];
    const double abs2 = std::norm(T);
    if (k > 0) cumulative += 0.5 * (t - last_t) * (abs2 + last_abs2);
    last_t = t;
    last_abs2 = abs2;
    out.xi_norms.push(t, l2_norm(xi, grid));
    out.T_series.push(t, T);
    out.T_l2_cumulative.push(t, cumulative);
  }
};

}  // namespace

SimResult run_error_experiment(const ExperimentConfig& config, const ObserverGain* gain) {
  config.validate();
  const SpatialGrid grid(config.n);
  std::optional<Field> kappa;
  if (gain) {
    require_on_grid(gain->kappa, grid, "run_error_experiment(gain)");
    kappa = gain->kappa;
  }
  const UnstableBasis basis = gain ? gain->basis : UnstableBasis::empty(grid, 0.0);
  const DiscreteGenerator gen = assemble_generator(config.params, grid, 0.0, kappa);
  const Field init = config.initial_error(grid);

  SimResult res;
  res.tag = gain ? "observer" : "direct";
  Recorder rec{grid, basis, res};
  auto sim = simulate(gen, init, config.dt, config.t_final, config.snapshot_stride,
                      [&](Index k, double t, const Field& z) { rec.record(k, t, z); });
  res.snapshots = std::move(sim.snapshots);
  res.fit = fit_tail(res.norm_real);
  res.warnings.insert(res.warnings.end(), res.fit.warnings.begin(), res.fit.warnings.end());
  return res;
}

SimResult run_plant_observer_demo(const ExperimentConfig& config, const ObserverGain& gain,
                                  const BoundaryInput& boundary, const Field& plant_init,
                                  const Field& observer_init) {
  config.validate();
  const SpatialGrid grid(config.n);
  require_on_grid(gain.kappa, grid, "plant/observer demo (kappa)");
  require_on_grid(plant_init, grid, "plant/observer demo (plant)");
  require_on_grid(observer_init, grid, "plant/observer demo (observer)");
  if (plant_init.stacked().imag().cwiseAbs().maxCoeff() != 0.0)
    throw std::invalid_argument("plant initial state must be real-valued");

  SimResult res;
  res.tag = "plant_observer";
  const double gh0 = boundary.gh(0.0), gc0 = boundary.gc(0.0);
  const auto check = [&](const Field& f, const char* who) {
    const double tol = 1e-12 * (1.0 + f.stacked().cwiseAbs().maxCoeff());
    if (std::abs(f.h()[0] - gh0) > tol || std::abs(f.c()[grid.n() - 1] - gc0) > tol)
      res.warnings.push_back(std::string(who) + " initial state violates the 0th-order compatibility conditions");
  };
  check(plant_init, "plant");
  check(observer_init, "observer");

  const DiscreteGenerator plant_gen = assemble_generator(config.params, grid, 0.0);
  const DiscreteGenerator obs_gen = assemble_generator(config.params, grid, 0.0, gain.kappa);
  const ImplicitEulerStepper plant_step(plant_gen, config.dt);
  const ImplicitEulerStepper obs_step(obs_gen, config.dt);
  const Index steps = step_count(config.t_final, config.dt);

  Field plant = plant_init;
  Field obs = observer_init;
  Recorder rec{grid, gain.basis, res};
  for (Index k = 0;; ++k) {
    const double t = static_cast<double>(k) * config.dt;
    const Field err = plant - obs;
    rec.record(k, t, err);
    // ||T - Re T_hat|| replaces the real part of the error norm
    res.norm_real.values.back() = l2_norm(Field(Eigen::VectorXcd(
        (plant.stacked() - obs.stacked().real().cast<cplx>()))), grid);
    if (k % config.snapshot_stride == 0) res.snapshots.push(t, err);
    if (k == steps) break;

    const double t_next = static_cast<double>(k + 1) * config.dt;
    const double gh = boundary.gh(t_next), gc = boundary.gc(t_next);
    plant = plant_step.step(plant, gh, gc);
    const cplx y = plant.c()[0];
    const Eigen::VectorXcd source = gain.kappa.stacked() * y;
    obs = obs_step.step(obs, gh, gc, &source);
  }
  res.fit = fit_tail(res.norm_real);
  res.warnings.insert(res.warnings.end(), res.fit.warnings.begin(), res.fit.warnings.end());
  return res;
}

DiagnosticsReport diagnostics(const SimResult& result, const UnstableBasis& basis) {
  if (result.snapshots.size() < 3)
    throw std::invalid_argument("diagnostics needs at least 3 snapshots");
  const SpatialGrid& grid = basis.grid;

  DiagnosticsReport rep;
  double cumulative = 0.0;
  for (std::size_t k = 0; k < result.snapshots.size(); ++k) {
    const double t = result.snapshots.times[k];
    const Field& z = result.snapshots.values[k];
    require_on_grid(z, grid, "diagnostics");
    const Eigen::VectorXcd xi = complement(z.stacked(), basis);
    const cplx T = -xi[grid.cold(0)];
    if (k > 0) {
      const double dt = t - rep.T_series.times.back();
      cumulative += 0.5 * dt * (std::norm(T) + std::norm(rep.T_series.values.back()));
    }
    rep.xi_norms.push(t, l2_norm(xi, grid));
    rep.T_series.push(t, T);
    rep.T_l2_cumulative.push(t, cumulative);
  }
  rep.T_l2_total = cumulative;

  const double t_end = rep.T_l2_cumulative.times.back();
  const double t_tail = rep.T_l2_cumulative.times.front() + 0.8 * (t_end - rep.T_l2_cumulative.times.front());
  rep.tail_increment = cumulative - sample_at(rep.T_l2_cumulative, t_tail);
  rep.tail_fraction = cumulative > 0.0 ? rep.tail_increment / cumulative : 0.0;

  rep.xi_fit = fit_tail(rep.xi_norms);
  if (!rep.xi_fit.valid && rep.xi_norms.values.front() > 0.0)
    rep.xi_fit = fit_decay_rate(rep.xi_norms, rep.xi_norms.times.front(), rep.xi_norms.times.back());
  return rep;
}

}  // namespace specobs
