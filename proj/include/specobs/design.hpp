#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specobs/discretize.hpp"
#include "specobs/model.hpp"
#include "specobs/spectral.hpp"

namespace specobs {

/// Orthonormal basis {w_i} of the unstable subspace.
///
/// `w` and `v` hold fields as columns of a 2n x q matrix (stacked [h; c]).
/// `combo` records Gram-Schmidt: w_i = sum_j combo(i, j) v_j.
struct UnstableBasis {
  Eigen::MatrixXcd w;
  Eigen::MatrixXcd v;
  Eigen::VectorXcd lambdas;
  Eigen::MatrixXcd combo;
  std::vector<Mode> modes;
  double lambda_o = 0.0;
  SpatialGrid grid{3};

  Index q() const { return w.cols(); }
  Field field(Index i) const { return Field(Eigen::VectorXcd(w.col(i))); }

  static UnstableBasis empty(const SpatialGrid& grid, double lambda_o);
};

class RankDeficientModes : public std::runtime_error {
 public:
  RankDeficientModes(std::vector<Index> indices, double sigma_min);
  const std::vector<Index>& indices() const { return indices_; }
  double sigma_min() const { return sigma_min_; }

 private:
  std::vector<Index> indices_;
  double sigma_min_;
};

/// Modified Gram-Schmidt with one reorthogonalization pass in the discrete L2
/// inner product. Throws RankDeficientModes if the modes are (numerically)
/// dependent.
UnstableBasis orthonormalize(const std::vector<Mode>& modes, const SpatialGrid& grid,
                             double lambda_o = 0.0);

/// Coefficients z_i = <z, w_i>.
Eigen::VectorXcd project_coefficients(const Eigen::VectorXcd& z, const UnstableBasis& basis);
/// P z = sum_i <z, w_i> w_i.
Eigen::VectorXcd project(const Eigen::VectorXcd& z, const UnstableBasis& basis);
/// (I - P) z.
Eigen::VectorXcd complement(const Eigen::VectorXcd& z, const UnstableBasis& basis);

/// Max |<w_i, w_j> - delta_ij|.
double gram_deviation(const UnstableBasis& basis);
/// Max over source modes of ||(I - P) v_j|| / ||v_j||.
double span_residual(const UnstableBasis& basis);

/// Finite-dimensional triple governing the projected error dynamics.
struct ProjectedSystem {
  Eigen::MatrixXcd A;  // A(k, i) = <A_s w_i, w_k>
  Eigen::MatrixXcd C;  // 1 x q, C(0, i) = w_i^c(0)
  Eigen::MatrixXcd K;  // q x 1, empty until design_gain
  Eigen::MatrixXcd Q;
  double R = 1.0;
  Eigen::MatrixXcd P;  // Riccati solution, empty until design_gain
  double riccati_residual = 0.0;

  Index q() const { return A.rows(); }
  bool designed() const { return K.size() == A.rows() && A.rows() > 0; }
  Eigen::MatrixXcd closed_loop() const { return A - K * C; }
};

/// Builds A exactly on the mode span via A_s w_i = sum_j combo(i,j) lambda_j v_j.
/// Weights: Q = (lambda_o + 2)^2 I, R = 1.
ProjectedSystem project_system(const UnstableBasis& basis, const ExchangerParams& params,
                               double lambda_o);

struct ObservabilityReport {
  bool observable = true;
  Eigen::VectorXcd eigenvalues;
  std::vector<double> margins;  // sigma_min([lambda I - A; C]) per eigenvalue
  double min_margin = 0.0;
  double tol = 1e-8;
};

/// Popov-Belevitch-Hautus rank test.
ObservabilityReport hautus_check(const ProjectedSystem& sys, double tol = 1e-8);

class GainDesignError : public std::runtime_error {
 public:
  GainDesignError(const std::string& what, double residual, Eigen::VectorXcd open_loop,
                  Eigen::VectorXcd closed_loop)
      : std::runtime_error(what),
        residual(residual),
        open_loop(std::move(open_loop)),
        closed_loop(std::move(closed_loop)) {}
  double residual;
  Eigen::VectorXcd open_loop;
  Eigen::VectorXcd closed_loop;
};

/// Solves the filter Riccati equation and sets K = P C^H / R. Verifies the
/// Riccati residual (<= 1e-8 relative) and that A - K C is Hurwitz; throws
/// GainDesignError otherwise.
ProjectedSystem design_gain(ProjectedSystem sys);

struct ObserverGain {
  Field kappa;
  Eigen::VectorXcd coefficients;
  UnstableBasis basis;
};

/// kappa = sum_i K_i w_i.
ObserverGain synthesize_kappa(const ProjectedSystem& sys, const UnstableBasis& basis);

/// Zero gain on `grid` (no unstable modes to move).
ObserverGain zero_gain(const SpatialGrid& grid, double lambda_o);

class ObservabilityError : public std::runtime_error {
 public:
  ObservabilityError(const std::string& what, ObservabilityReport report)
      : std::runtime_error(what), report(std::move(report)) {}
  ObservabilityReport report;
};

/// Everything the design pipeline produces for one prescribed rate.
struct ObserverDesign {
  ExchangerParams params;
  double lambda_o = 0.0;
  Spectrum spectrum;
  UnstableModes selection;
  UnstableBasis basis;
  ProjectedSystem system;
  ObservabilityReport observability;
  ObserverGain gain;
  Eigen::VectorXcd projected_closed_loop;  // eig(A - K C), shifted frame
  double eig_match_distance = 0.0;         // eig(A) vs mode eigenvalues
  std::vector<std::string> notes;

  Index q() const { return basis.q(); }
};

/// spectrum -> unstable modes -> orthonormalize -> project -> Hautus ->
/// Riccati -> kappa. Throws ObservabilityError or GainDesignError.
ObserverDesign design_observer(const ExchangerParams& params, const SpatialGrid& grid,
                               double lambda_o, const SelectionOptions& opts = {});

}  // namespace specobs
