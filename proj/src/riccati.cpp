#include "specobs/riccati.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace specobs {

Eigen::MatrixXd solve_care(const Eigen::Ref<const Eigen::MatrixXd>& A,
                           const Eigen::Ref<const Eigen::MatrixXd>& B,
                           const Eigen::Ref<const Eigen::MatrixXd>& Q,
                           const Eigen::Ref<const Eigen::MatrixXd>& R) {
  const Eigen::Index n = A.rows();
  if (A.cols() != n || B.rows() != n || Q.rows() != n || Q.cols() != n ||
      R.rows() != B.cols() || R.cols() != B.cols())
    throw std::invalid_argument("solve_care: inconsistent dimensions");

  Eigen::LLT<Eigen::MatrixXd> R_chol(R);
  if (R_chol.info() != Eigen::Success) throw std::runtime_error("R must be positive definite");

  Eigen::MatrixXd H(2 * n, 2 * n);
  H << A, B * R_chol.solve(B.transpose()), Q, -A.transpose();

  // Byers' matrix sign function with determinant scaling
  Eigen::MatrixXd Z = H;
  const double p = static_cast<double>(Z.rows());
  double change = 0.0;
  int it = 0;
  do {
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(Z);
    const double det = std::abs(lu.determinant());
    if (!(det > 0.0) || !std::isfinite(det))
      throw std::runtime_error("solve_care: Hamiltonian has eigenvalues on the imaginary axis");
    const double ck = std::pow(det, -1.0 / p);
    const Eigen::MatrixXd Zn = 0.5 * (ck * Z + lu.inverse() / ck);
    change = (Zn - Z).norm() / std::max(1.0, Zn.norm());
    Z = Zn;
  } while (++it < 100 && change > 1e-13);
  if (change > 1e-8) throw std::runtime_error("solve_care: sign iteration did not converge");

  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd lhs(2 * n, n), rhs(2 * n, n);
  lhs << Z.block(0, n, n, n), Z.block(n, n, n, n) + I;
  rhs << Z.block(0, 0, n, n) + I, Z.block(n, 0, n, n);
  Eigen::MatrixXd X = lhs.colPivHouseholderQr().solve(rhs);
  return 0.5 * (X + X.transpose());
}

Eigen::MatrixXcd solve_lyapunov(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& Q) {
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  // column-major vec: vec(A X) = (I kron A) vec X, vec(X A^H) = (conj(A) kron I) vec X
  Eigen::MatrixXcd K = Eigen::MatrixXcd::Zero(n * n, n * n);
  for (Eigen::Index j = 0; j < n; ++j) {
    K.block(j * n, j * n, n, n) += A;
    for (Eigen::Index l = 0; l < n; ++l) K.block(j * n, l * n, n, n) += std::conj(A(j, l)) * I;
  }
  const Eigen::VectorXcd rhs = -Q.reshaped();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(K);
  Eigen::VectorXcd x = lu.solve(rhs);
  return x.reshaped(n, n);
}

Eigen::MatrixXd realify(const Eigen::MatrixXcd& X) {
  const Eigen::Index r = X.rows(), c = X.cols();
  Eigen::MatrixXd out(2 * r, 2 * c);
  out << X.real(), -X.imag(), X.imag(), X.real();
  return out;
}

double filter_are_residual(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& C,
                           const Eigen::MatrixXcd& Q, double R, const Eigen::MatrixXcd& P) {
  const Eigen::MatrixXcd res =
      A * P + P * A.adjoint() - P * C.adjoint() * C * P / R + Q;
  return res.norm() / Q.norm();
}

Eigen::MatrixXcd solve_filter_are(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& C,
                                  const Eigen::MatrixXcd& Q, double R) {
  const Eigen::Index q = A.rows();
  if (A.cols() != q || C.cols() != q || Q.rows() != q || Q.cols() != q)
    throw std::invalid_argument("solve_filter_are: inconsistent dimensions");
  if (!(R > 0.0)) throw std::invalid_argument("solve_filter_are: R must be > 0");

  // dual control problem on the realified data: A -> A_r^T, B -> C_r^T
  const Eigen::MatrixXd Ar = realify(A);
  const Eigen::MatrixXd Cr = realify(C);
  const Eigen::MatrixXd Qr = realify(Q);
  const Eigen::MatrixXd Rr = R * Eigen::MatrixXd::Identity(Cr.rows(), Cr.rows());
  const Eigen::MatrixXd Xr = solve_care(Ar.transpose(), Cr.transpose(), Qr, Rr);

  Eigen::MatrixXcd P(q, q);
  P.real() = 0.5 * (Xr.topLeftCorner(q, q) + Xr.bottomRightCorner(q, q));
  P.imag() = 0.5 * (Xr.bottomLeftCorner(q, q) - Xr.topRightCorner(q, q));
  P = 0.5 * (P + P.adjoint()).eval();

  // Newton-Kleinman refinement
  const Eigen::MatrixXcd G = C.adjoint() * C / R;
  for (int it = 0; it < 4; ++it) {
    if (filter_are_residual(A, C, Q, R, P) <= 1e-13) break;
    const Eigen::MatrixXcd Ak = A - P * G;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(Ak, false);
    if (es.eigenvalues().real().maxCoeff() >= 0.0) break;
    Eigen::MatrixXcd Pn = solve_lyapunov(Ak, Q + P * G * P);
    Pn = 0.5 * (Pn + Pn.adjoint()).eval();
    if (filter_are_residual(A, C, Q, R, Pn) >= filter_are_residual(A, C, Q, R, P)) break;
    P = Pn;
  }
  return P;
}

}  // namespace specobs
