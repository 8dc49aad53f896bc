#include "specobs/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace specobs {

namespace {

bool descending(cplx a, cplx b) {
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

void require_c1(const ExchangerParams& p) {
  if (!(p.c1() > 0.0))
    throw std::invalid_argument("characteristic function needs c1 > 0");
}

// sinh(z)/z, with the removable singularity filled in
cplx sinhc(cplx z) {
  if (std::abs(z) < 1e-3) {
    const cplx z2 = z * z;
    return 1.0 + z2 / 6.0 + z2 * z2 / 120.0;
  }
  return std::sinh(z) / z;
}

// Hot component of the reduced eigenfunction and its x-derivative.
struct ReducedHot {
  cplx v;
  cplx dv;
};

ReducedHot reduced_hot(const CharacteristicCoefficients& k, double x) {
  const cplx m = 0.5 * (k.mu1 + k.mu2);
  const cplx d = 0.5 * (k.mu1 - k.mu2);
  const cplx em = std::exp(m * x);
  const cplx sc = sinhc(d * x);
  return {em * x * sc, em * (m * x * sc + std::cosh(d * x))};
}

void normalize_phase(Field& v, const SpatialGrid& grid) {
  const double nrm = l2_norm(v, grid);
  if (nrm == 0.0) return;
  Index imax = 0;
  v.stacked().cwiseAbs().maxCoeff(&imax);
  const cplx pivot = v.stacked()[imax];
  v *= std::conj(pivot) / (std::abs(pivot) * nrm);
}

}  // namespace

CharacteristicCoefficients characteristic_coefficients(cplx lambda, const ExchangerParams& p,
                                                       double lambda_o) {
  const double u1 = p.u1(), u2 = p.u2(), c1 = p.c1(), c2 = p.c2();
  const cplx s = lambda - lambda_o;
  CharacteristicCoefficients k;
  k.theta1 = ((u2 - u1) * s + u2 * c1 - u1 * c2) / (u1 * u2);
  k.theta2 = -(s * s + s * (c1 + c2)) / (u1 * u2);

  // cancellation-free quadratic roots
  cplx disc = std::sqrt(k.theta1 * k.theta1 - 4.0 * k.theta2);
  if ((std::conj(k.theta1) * disc).real() < 0.0) disc = -disc;
  const cplx q = -0.5 * (k.theta1 + disc);
  cplx r1 = q;
  cplx r2 = (q != cplx(0.0)) ? k.theta2 / q : -k.theta1 - q;
  if (descending(r2, r1)) std::swap(r1, r2);
  k.mu1 = r1;
  k.mu2 = r2;
  return k;
}

bool is_double_root(const CharacteristicCoefficients& k) {
  return std::abs(k.mu1 - k.mu2) <= 1e-8 * (1.0 + std::abs(k.mu1));
}

cplx characteristic_f(cplx lambda, const ExchangerParams& p, double lambda_o, ExponentMode mode) {
  require_c1(p);
  const auto k = characteristic_coefficients(lambda, p, lambda_o);
  cplx a = k.mu1, b = k.mu2;
  if (mode == ExponentMode::verbatim) {
    a = k.theta1;
    b = k.theta2;
  } else if (is_double_root(k)) {
    return 0.0;
  }
  const cplx ea = std::exp(a), eb = std::exp(b);
  const cplx s = lambda - lambda_o;
  return (p.u1() / p.c1()) * (a * ea - b * eb) + ((s + p.c1()) / p.c1()) * (ea - eb);
}

cplx reduced_characteristic(cplx lambda, const ExchangerParams& p, double lambda_o) {
  require_c1(p);
  const auto k = characteristic_coefficients(lambda, p, lambda_o);
  const auto hot = reduced_hot(k, 1.0);
  const cplx s = lambda - lambda_o;
  return (p.u1() / p.c1()) * hot.dv + ((s + p.c1()) / p.c1()) * hot.v;
}

Field eigenfunction(cplx lambda, const ExchangerParams& p, double lambda_o,
                    const SpatialGrid& grid, ExponentMode mode) {
  require_c1(p);
  const auto k = characteristic_coefficients(lambda, p, lambda_o);
  Field v(grid.n());
  if (mode == ExponentMode::roots && is_double_root(k)) return v;
  const cplx a = mode == ExponentMode::roots ? k.mu1 : k.theta1;
  const cplx b = mode == ExponentMode::roots ? k.mu2 : k.theta2;
  const cplx s = lambda - lambda_o;
  for (Index i = 0; i < grid.n(); ++i) {
    const double x = grid.x()[i];
    const cplx ea = std::exp(a * x), eb = std::exp(b * x);
    v.h()[i] = ea - eb;
    v.c()[i] = (p.u1() / p.c1()) * (a * ea - b * eb) + ((s + p.c1()) / p.c1()) * (ea - eb);
  }
  return v;
}

Field reduced_eigenfunction(cplx lambda, const ExchangerParams& p, double lambda_o,
                            const SpatialGrid& grid) {
  require_c1(p);
  const auto k = characteristic_coefficients(lambda, p, lambda_o);
  const cplx s = lambda - lambda_o;
  Field v(grid.n());
  for (Index i = 0; i < grid.n(); ++i) {
    const auto hot = reduced_hot(k, grid.x()[i]);
    v.h()[i] = hot.v;
    v.c()[i] = (p.u1() / p.c1()) * hot.dv + ((s + p.c1()) / p.c1()) * hot.v;
  }
  return v;
}

const char* to_string(ModeSource s) {
  switch (s) {
    case ModeSource::discrete: return "discrete";
    case ModeSource::analytic: return "analytic";
    case ModeSource::polished: return "polished";
  }
  return "unknown";
}

double mode_residual(const DiscreteGenerator& gen, cplx lambda, const Field& v) {
  const Eigen::VectorXcd r = gen.mat * v.stacked() - lambda * v.stacked();
  return l2_norm(r, gen.grid) / l2_norm(v, gen.grid);
}

Mode analytic_mode(cplx lambda, const DiscreteGenerator& gen, const ExchangerParams& params,
                   double lambda_o) {
  Mode m;
  m.lambda = lambda;
  m.eigenfunction = reduced_eigenfunction(lambda, params, lambda_o, gen.grid);
  normalize_phase(m.eigenfunction, gen.grid);
  m.residual = mode_residual(gen, lambda, m.eigenfunction);
  m.source = ModeSource::analytic;
  return m;
}

Eigen::VectorXcd generator_eigenvalues(const DiscreteGenerator& gen) {
  const Eigen::MatrixXcd block = gen.free_block();
  if (block.imag().cwiseAbs().maxCoeff() == 0.0) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(block.real(), false);
    if (es.info() != Eigen::Success) throw std::runtime_error("real eigensolver did not converge");
    return es.eigenvalues();
  }
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(block, false);
  if (es.info() != Eigen::Success) throw std::runtime_error("complex eigensolver did not converge");
  return es.eigenvalues();
}

Spectrum discrete_spectrum(const DiscreteGenerator& gen) {
  if (gen.has_injection)
    throw std::invalid_argument("discrete_spectrum expects a generator without injection");

  const auto idx = gen.free_indices();
  const Eigen::MatrixXd block = gen.mat(idx, idx).real();
  Eigen::EigenSolver<Eigen::MatrixXd> es(block, true);
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "eigensolver failed to converge (n=" << gen.grid.n() << ", shift=" << gen.shift
        << ", u1=" << gen.params.u1() << ", u2=" << gen.params.u2() << ", c1=" << gen.params.c1()
        << ", c2=" << gen.params.c2() << ")";
    throw std::runtime_error(msg.str());
  }

  const Eigen::VectorXcd values = es.eigenvalues();
  const Eigen::MatrixXcd free_vecs = es.eigenvectors();
  const Index m = values.size();

  Eigen::MatrixXcd vecs = Eigen::MatrixXcd::Zero(gen.grid.size(), m);
  vecs(idx, Eigen::all) = free_vecs;

  const Eigen::MatrixXcd residuals = gen.mat * vecs - vecs * values.asDiagonal();

  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return descending(values[a], values[b]); });

  Spectrum spec{{}, gen.grid, gen.shift};
  spec.modes.reserve(order.size());
  for (Index j : order) {
    Field v(Eigen::VectorXcd(vecs.col(j)));
    const double nrm = l2_norm(v, gen.grid);
    normalize_phase(v, gen.grid);
    Mode mode;
    mode.lambda = values[j];
    mode.eigenfunction = std::move(v);
    mode.residual = l2_norm(residuals.col(j), gen.grid) / nrm;
    mode.source = ModeSource::discrete;
    spec.modes.push_back(std::move(mode));
  }
  return spec;
}

std::optional<cplx> polish_root(cplx start, const ExchangerParams& params, double lambda_o) {
  const auto g = [&](cplx z) { return reduced_characteristic(z, params, lambda_o); };
  const cplx g0 = g(start);
  const double target = 1e-12 * (1.0 + std::abs(g0));
  cplx z = start;
  cplx gz = g0;
  for (int it = 0; it < 30; ++it) {
    if (std::abs(gz) <= target) break;
    const double h = 1e-7 * (1.0 + std::abs(z));
    const cplx dg = (g(z + h) - g(z - h)) / (2.0 * h);
    if (dg == cplx(0.0) || !std::isfinite(std::abs(dg))) return std::nullopt;
    z -= gz / dg;
    gz = g(z);
  }
  if (!(std::abs(gz) <= target)) return std::nullopt;
  // a root that wandered off belongs to a different eigenvalue
  if (std::abs(z - start) > 0.5 * (1.0 + std::abs(start))) return std::nullopt;
  return z;
}

UnstableModes unstable_modes(const Spectrum& spectrum, const DiscreteGenerator& gen,
                             const ExchangerParams& params, double lambda_o,
                             const SelectionOptions& opts) {
  UnstableModes out;
  for (const auto& m : spectrum.modes) {
    const double re = m.lambda.real();
    if (std::abs(re - opts.re_threshold) < opts.warn_band) {
      std::ostringstream w;
      w << "eigenvalue " << m.lambda << " lies within " << opts.warn_band
        << " of the instability threshold; q is sensitive here";
      out.warnings.push_back(w.str());
    }
    if (re < opts.re_threshold - opts.guard) continue;

    Mode mode = m;
    if (opts.polish && params.coupled()) {
      if (auto root = polish_root(m.lambda, params, lambda_o)) {
        mode.polished_lambda = *root;
        Field v = reduced_eigenfunction(*root, params, lambda_o, gen.grid);
        normalize_phase(v, gen.grid);
        const double r = mode_residual(gen, *root, v);
        if (r < mode.residual) {
          mode.lambda = *root;
          mode.eigenfunction = std::move(v);
          mode.residual = r;
          mode.source = ModeSource::polished;
        }
      } else {
        std::ostringstream w;
        w << "Newton polish did not converge from " << m.lambda << "; keeping discrete mode";
        out.warnings.push_back(w.str());
      }
    }
    out.modes.push_back(std::move(mode));
  }
  return out;
}

double conjugate_asymmetry(const Eigen::VectorXcd& ev) {
  double worst = 0.0;
  for (Index i = 0; i < ev.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < ev.size(); ++j) best = std::min(best, std::abs(ev[i] - std::conj(ev[j])));
    worst = std::max(worst, best);
  }
  return worst;
}

double match_multisets(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
  if (a.size() != b.size()) throw std::invalid_argument("multisets differ in size");
  struct Pair {
    double d;
    Index i, j;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(a.size() * b.size()));
  for (Index i = 0; i < a.size(); ++i)
    for (Index j = 0; j < b.size(); ++j) pairs.push_back({std::abs(a[i] - b[j]), i, j});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.d < y.d; });
  std::vector<bool> used_a(static_cast<std::size_t>(a.size())), used_b(static_cast<std::size_t>(b.size()));
  double worst = 0.0;
  Index matched = 0;
  for (const auto& p : pairs) {
    if (used_a[p.i] || used_b[p.j]) continue;
    used_a[p.i] = used_b[p.j] = true;
    worst = std::max(worst, p.d);
    if (++matched == a.size()) break;
  }
  return worst;
}

}  // namespace specobs
