#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "specobs/discretize.hpp"
#include "specobs/model.hpp"

namespace specobs {

/// Coefficients of v'' + theta1 v' + theta2 v = 0 for the hot component of an
/// eigenfunction of A + lambda_o I, and the roots mu1, mu2 of
/// mu^2 + theta1 mu + theta2 = 0 (sorted by real part, then imaginary part,
/// descending).
struct CharacteristicCoefficients {
  cplx theta1;
  cplx theta2;
  cplx mu1;
  cplx mu2;
};

/// Which numbers enter the exponentials of the characteristic function.
///  roots:    e^{mu1 x}, e^{mu2 x}, the solutions of the second-order ODE.
///  verbatim: e^{theta1 x}, e^{theta2 x}, the coefficients taken literally.
///            Kept for comparison only; it does not vanish on the spectrum.
enum class ExponentMode { roots, verbatim };

CharacteristicCoefficients characteristic_coefficients(cplx lambda, const ExchangerParams& params,
                                                       double lambda_o);

/// True when mu1 and mu2 coincide to within 1e-8 (1 + |mu1|).
bool is_double_root(const CharacteristicCoefficients& k);

/// f(lambda); vanishes identically at a double root.
cplx characteristic_f(cplx lambda, const ExchangerParams& params, double lambda_o,
                      ExponentMode mode = ExponentMode::roots);

/// f(lambda) / (mu1 - mu2), continued through mu1 = mu2.
///
/// This is an entire function of lambda whose zeros are exactly the
/// eigenvalues of A + lambda_o I, including those where mu1 = mu2 (the
/// eigenfunction is then x e^{mu x}). Used for root polishing.
cplx reduced_characteristic(cplx lambda, const ExchangerParams& params, double lambda_o);

/// Eigenfunction candidate v_lambda sampled on the grid. Returns the null
/// field when mu1 = mu2 (roots mode).
Field eigenfunction(cplx lambda, const ExchangerParams& params, double lambda_o,
                    const SpatialGrid& grid, ExponentMode mode = ExponentMode::roots);

/// v_lambda / (mu1 - mu2), continued through mu1 = mu2. Never null.
Field reduced_eigenfunction(cplx lambda, const ExchangerParams& params, double lambda_o,
                            const SpatialGrid& grid);

enum class ModeSource { discrete, analytic, polished };
const char* to_string(ModeSource s);

struct Mode {
  cplx lambda;
  Field eigenfunction;
  double residual = 0.0;  // ||A_s v - lambda v|| / ||v|| with the discrete generator
  ModeSource source = ModeSource::discrete;
  std::optional<cplx> polished_lambda;  // Newton root of the characteristic function
};

struct Spectrum {
  std::vector<Mode> modes;  // sorted by decreasing Re(lambda)
  SpatialGrid grid{3};
  double shift = 0.0;
};

/// ||gen.mat v - lambda v|| / ||v||.
double mode_residual(const DiscreteGenerator& gen, cplx lambda, const Field& v);

/// Mode built from an analytic root: the reduced eigenfunction at `lambda`,
/// normalized, with its residual against the discrete generator.
Mode analytic_mode(cplx lambda, const DiscreteGenerator& gen, const ExchangerParams& params,
                   double lambda_o);

/// Eigenvalues of the generator restricted to the free (non-Dirichlet)
/// entries. Works with or without injection.
Eigen::VectorXcd generator_eigenvalues(const DiscreteGenerator& gen);

/// Full eigendecomposition of an injection-free generator. The two trivial
/// Dirichlet modes are excluded; eigenvectors have unit L2 norm and a real
/// positive largest entry.
Spectrum discrete_spectrum(const DiscreteGenerator& gen);

struct SelectionOptions {
  double re_threshold = 0.0;
  double guard = 1e-9;        // Re >= threshold - guard counts as unstable
  double warn_band = 1e-6;    // |Re - threshold| below this is flagged
  bool polish = true;
};

struct UnstableModes {
  std::vector<Mode> modes;
  std::vector<std::string> warnings;
};

/// Newton iteration on reduced_characteristic from `start`.
std::optional<cplx> polish_root(cplx start, const ExchangerParams& params, double lambda_o);

/// Selects the modes of a shifted spectrum with Re(lambda) >= threshold. When
/// polishing is enabled, each eigenvalue is refined on the characteristic
/// function and the analytic eigenfunction replaces the discrete eigenvector
/// if its discrete residual is smaller.
UnstableModes unstable_modes(const Spectrum& spectrum, const DiscreteGenerator& gen,
                             const ExchangerParams& params, double lambda_o,
                             const SelectionOptions& opts = {});

/// Max over eigenvalues of the distance to the nearest conjugate.
double conjugate_asymmetry(const Eigen::VectorXcd& eigenvalues);

/// Greedy minimal-distance matching of two equally sized multisets; returns the
/// largest matched distance.
double match_multisets(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b);

}  // namespace specobs
