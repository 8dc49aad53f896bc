#pragma once

#include <Eigen/Core>

namespace specobs {

/// Stabilizing solution X of the real continuous ARE
///   A^T X + X A - X B R^{-1} B^T X + Q = 0
/// by the scaled matrix-sign iteration on the Hamiltonian.
/// Throws std::runtime_error if the iteration fails.
Eigen::MatrixXd solve_care(const Eigen::Ref<const Eigen::MatrixXd>& A,
                           const Eigen::Ref<const Eigen::MatrixXd>& B,
                           const Eigen::Ref<const Eigen::MatrixXd>& Q,
                           const Eigen::Ref<const Eigen::MatrixXd>& R);

/// Solves A X + X A^H + Q = 0 (A Hurwitz) through its Kronecker form.
/// Sized for the small projected systems handled here (q up to a few dozen).
Eigen::MatrixXcd solve_lyapunov(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& Q);

/// Hermitian stabilizing solution of the complex filter ARE
///   A P + P A^H - P C^H R^{-1} C P + Q = 0.
///
/// The complex system is realified ([Re -Im; Im Re] blocks), solved with
/// solve_care on the transposed (dual) data, mapped back, Hermitized, and
/// refined by Newton-Kleinman steps.
Eigen::MatrixXcd solve_filter_are(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& C,
                                  const Eigen::MatrixXcd& Q, double R);

/// ||A P + P A^H - P C^H R^{-1} C P + Q|| / ||Q|| (Frobenius).
double filter_are_residual(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& C,
                           const Eigen::MatrixXcd& Q, double R, const Eigen::MatrixXcd& P);

/// Realification X -> [Re X, -Im X; Im X, Re X].
Eigen::MatrixXd realify(const Eigen::MatrixXcd& X);

}  // namespace specobs
