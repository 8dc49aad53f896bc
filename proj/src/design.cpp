#include "specobs/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "specobs/riccati.hpp"

namespace specobs {

namespace {

std::string join_indices(const std::vector<Index>& idx) {
  std::ostringstream s;
  for (std::size_t i = 0; i < idx.size(); ++i) s << (i ? ", " : "") << idx[i];
  return s.str();
}

Eigen::VectorXcd eigenvalues_of(const Eigen::MatrixXcd& M) {
  if (M.size() == 0) return {};
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(M, false);
  return es.eigenvalues();
}

}  // namespace

UnstableBasis UnstableBasis::empty(const SpatialGrid& grid, double lambda_o) {
  UnstableBasis b;
  b.w = Eigen::MatrixXcd(grid.size(), 0);
  b.v = Eigen::MatrixXcd(grid.size(), 0);
  b.lambdas = Eigen::VectorXcd(0);
  b.combo = Eigen::MatrixXcd(0, 0);
  b.lambda_o = lambda_o;
  b.grid = grid;
  return b;
}

RankDeficientModes::RankDeficientModes(std::vector<Index> indices, double sigma_min)
    : std::runtime_error("unstable modes are linearly dependent (offending mode indices: " +
                         join_indices(indices) + "; sigma_min = " + std::to_string(sigma_min) +
                         ")"),
      indices_(std::move(indices)),
      sigma_min_(sigma_min) {}

UnstableBasis orthonormalize(const std::vector<Mode>& modes, const SpatialGrid& grid,
                             double lambda_o) {
  if (modes.empty()) throw std::invalid_argument("orthonormalize needs at least one mode");
  const Index q = static_cast<Index>(modes.size());
  const Index N = grid.size();

  UnstableBasis b = UnstableBasis::empty(grid, lambda_o);
  b.modes = modes;
  b.v.resize(N, q);
  b.lambdas.resize(q);
  for (Index j = 0; j < q; ++j) {
    require_on_grid(modes[j].eigenfunction, grid, "orthonormalize");
    b.v.col(j) = modes[j].eigenfunction.stacked();
    b.lambdas[j] = modes[j].lambda;
  }

  // independence check on unit-normalized, weight-scaled samples
  const Eigen::VectorXd sqrt_w = grid.stacked_weights().cwiseSqrt();
  Eigen::MatrixXcd scaled = sqrt_w.asDiagonal() * b.v;
  for (Index j = 0; j < q; ++j) {
    const double nrm = scaled.col(j).norm();
    if (nrm == 0.0) throw RankDeficientModes({j}, 0.0);
    scaled.col(j) /= nrm;
  }
  const double sigma_min = Eigen::JacobiSVD<Eigen::MatrixXcd>(scaled).singularValues()(q - 1);

  b.w.resize(N, q);
  b.combo = Eigen::MatrixXcd::Zero(q, q);
  std::vector<Index> weak;
  std::vector<double> rel_residual(static_cast<std::size_t>(q));
  for (Index i = 0; i < q; ++i) {
    Eigen::VectorXcd u = b.v.col(i);
    Eigen::RowVectorXcd g = Eigen::RowVectorXcd::Zero(q);
    g[i] = 1.0;
    const double orig = l2_norm(u, grid);
    for (int pass = 0; pass < 2; ++pass) {
      for (Index k = 0; k < i; ++k) {
        const cplx r = inner(u, b.w.col(k), grid);
        u -= r * b.w.col(k);
        g -= r * b.combo.row(k);
      }
    }
    const double nrm = l2_norm(u, grid);
    rel_residual[static_cast<std::size_t>(i)] = nrm / orig;
    if (nrm <= 1e-10 * orig) {
      weak.push_back(i);
      continue;
    }
    b.w.col(i) = u / nrm;
    b.combo.row(i) = g / nrm;
  }
  if (!weak.empty() || !(sigma_min > 1e-10)) {
    if (weak.empty()) {
      const auto it = std::min_element(rel_residual.begin(), rel_residual.end());
      weak.push_back(static_cast<Index>(it - rel_residual.begin()));
    }
    throw RankDeficientModes(weak, sigma_min);
  }
  return b;
}

Eigen::VectorXcd project_coefficients(const Eigen::VectorXcd& z, const UnstableBasis& basis) {
  return basis.w.adjoint() * basis.grid.stacked_weights().cwiseProduct(z);
}

Eigen::VectorXcd project(const Eigen::VectorXcd& z, const UnstableBasis& basis) {
  return basis.w * project_coefficients(z, basis);
}

Eigen::VectorXcd complement(const Eigen::VectorXcd& z, const UnstableBasis& basis) {
  return z - project(z, basis);
}

double gram_deviation(const UnstableBasis& basis) {
  if (basis.q() == 0) return 0.0;
  const Eigen::MatrixXcd G =
      basis.w.adjoint() * basis.grid.stacked_weights().asDiagonal() * basis.w;
  return (G - Eigen::MatrixXcd::Identity(basis.q(), basis.q())).cwiseAbs().maxCoeff();
}

double span_residual(const UnstableBasis& basis) {
  double worst = 0.0;
  for (Index j = 0; j < basis.v.cols(); ++j) {
    const Eigen::VectorXcd vj = basis.v.col(j);
    worst = std::max(worst, l2_norm(complement(vj, basis), basis.grid) / l2_norm(vj, basis.grid));
  }
  return worst;
}

ProjectedSystem project_system(const UnstableBasis& basis, const ExchangerParams& /*params*/,
                               double lambda_o) {
  const Index q = basis.q();
  ProjectedSystem sys;
  // column i holds A_s w_i = sum_j combo(i, j) lambda_j v_j
  const Eigen::MatrixXcd As_w = basis.v * basis.lambdas.asDiagonal() * basis.combo.transpose();
  sys.A = basis.w.adjoint() * basis.grid.stacked_weights().asDiagonal() * As_w;
  sys.C = basis.w.row(basis.grid.cold(0));
  sys.K = Eigen::MatrixXcd(q, 0);
  sys.Q = (lambda_o + 2.0) * (lambda_o + 2.0) * Eigen::MatrixXcd::Identity(q, q);
  sys.R = 1.0;
  return sys;
}

ObservabilityReport hautus_check(const ProjectedSystem& sys, double tol) {
  ObservabilityReport rep;
  rep.tol = tol;
  const Index q = sys.q();
  rep.eigenvalues = eigenvalues_of(sys.A);
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < q; ++k) {
    Eigen::MatrixXcd stacked(q + 1, q);
    stacked.topRows(q) = rep.eigenvalues[k] * Eigen::MatrixXcd::Identity(q, q) - sys.A;
    stacked.bottomRows(1) = sys.C;
    const double s = Eigen::JacobiSVD<Eigen::MatrixXcd>(stacked).singularValues()(q - 1);
    rep.margins.push_back(s);
    rep.min_margin = std::min(rep.min_margin, s);
  }
  if (q == 0) rep.min_margin = 0.0;
  rep.observable = q == 0 || rep.min_margin > tol;
  return rep;
}

ProjectedSystem design_gain(ProjectedSystem sys) {
  const Eigen::VectorXcd open_loop = eigenvalues_of(sys.A);
  Eigen::MatrixXcd P;
  try {
    P = solve_filter_are(sys.A, sys.C, sys.Q, sys.R);
  } catch (const std::exception& e) {
    throw GainDesignError(std::string("Riccati solve failed: ") + e.what(),
                          std::numeric_limits<double>::quiet_NaN(), open_loop, {});
  }
  sys.P = P;
  sys.K = P * sys.C.adjoint() / sys.R;
  sys.riccati_residual = filter_are_residual(sys.A, sys.C, sys.Q, sys.R, P);
  const Eigen::VectorXcd closed = eigenvalues_of(sys.closed_loop());
  if (!(sys.riccati_residual <= 1e-8)) {
    std::ostringstream msg;
    msg << "Riccati residual " << sys.riccati_residual << " exceeds 1e-8";
    throw GainDesignError(msg.str(), sys.riccati_residual, open_loop, closed);
  }
  if (closed.size() > 0 && !(closed.real().maxCoeff() < 0.0)) {
    std::ostringstream msg;
    msg << "closed loop A - K C is not Hurwitz (max Re = " << closed.real().maxCoeff() << ")";
    throw GainDesignError(msg.str(), sys.riccati_residual, open_loop, closed);
  }
  return sys;
}

ObserverGain synthesize_kappa(const ProjectedSystem& sys, const UnstableBasis& basis) {
  if (sys.K.rows() != basis.q() || (basis.q() > 0 && sys.K.cols() != 1))
    throw std::invalid_argument("synthesize_kappa: K does not match the basis");
  ObserverGain g;
  g.coefficients = basis.q() > 0 ? Eigen::VectorXcd(sys.K.col(0)) : Eigen::VectorXcd(0);
  g.kappa = Field(Eigen::VectorXcd(basis.w * g.coefficients));
  g.basis = basis;
  return g;
}

ObserverGain zero_gain(const SpatialGrid& grid, double lambda_o) {
  ObserverGain g;
  g.kappa = Field(grid.n());
  g.coefficients = Eigen::VectorXcd(0);
  g.basis = UnstableBasis::empty(grid, lambda_o);
  return g;
}

ObserverDesign design_observer(const ExchangerParams& params, const SpatialGrid& grid,
                               double lambda_o, const SelectionOptions& opts) {
  ObserverDesign d;
  d.params = params;
  d.lambda_o = lambda_o;
  const DiscreteGenerator shifted = assemble_generator(params, grid, lambda_o);
  d.spectrum = discrete_spectrum(shifted);
  d.selection = unstable_modes(d.spectrum, shifted, params, lambda_o, opts);
  d.notes = d.selection.warnings;

  if (d.selection.modes.empty()) {
    d.basis = UnstableBasis::empty(grid, lambda_o);
    d.system = project_system(d.basis, params, lambda_o);
    d.observability = hautus_check(d.system);
    d.gain = zero_gain(grid, lambda_o);
    d.projected_closed_loop = Eigen::VectorXcd(0);
    d.notes.push_back("no unstable modes for lambda_o = " + std::to_string(lambda_o) +
                      "; kappa = 0 (the direct model already meets the rate)");
    return d;
  }

  d.basis = orthonormalize(d.selection.modes, grid, lambda_o);
  d.system = project_system(d.basis, params, lambda_o);
  d.eig_match_distance = match_multisets(eigenvalues_of(d.system.A), d.basis.lambdas);
  d.observability = hautus_check(d.system);
  if (!d.observability.observable) {
    std::ostringstream msg;
    msg << "(A, C) fails the Hautus test: min margin " << d.observability.min_margin
        << " <= " << d.observability.tol;
    throw ObservabilityError(msg.str(), d.observability);
  }
  d.system = design_gain(std::move(d.system));
  d.projected_closed_loop = eigenvalues_of(d.system.closed_loop());
  d.gain = synthesize_kappa(d.system, d.basis);
  return d;
}

}  // namespace specobs
