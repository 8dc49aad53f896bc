#pragma once

#include <complex>
#include <functional>
#include <stdexcept>

#include <Eigen/Core>

namespace specobs {

using cplx = std::complex<double>;
using Eigen::Index;

/// Physical constants of the counter-flow exchanger.
///
/// u1, u2 are the hot/cold transport velocities (strictly positive). c1, c2
/// are the heat-transfer coefficients; they must be non-negative so that the
/// uncoupled transport limit c1 = c2 = 0 stays representable. Routines that
/// divide by c1 check `coupled()` themselves.
class ExchangerParams {
 public:
  ExchangerParams() = default;
  ExchangerParams(double u1, double u2, double c1, double c2);

  double u1() const { return u1_; }
  double u2() const { return u2_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }

  bool coupled() const { return c1_ > 0.0 && c2_ > 0.0; }

  friend bool operator==(const ExchangerParams&, const ExchangerParams&) = default;

 private:
  double u1_ = 1.0;
  double u2_ = 1.0;
  double c1_ = 1.0;
  double c2_ = 1.0;
};

/// Uniform grid on [0,1] including both endpoints.
class SpatialGrid {
 public:
  explicit SpatialGrid(Index n);

  Index n() const { return n_; }
  double dx() const { return dx_; }
  const Eigen::VectorXd& x() const { return x_; }

  /// Composite trapezoidal weights for one component (length n).
  const Eigen::VectorXd& weights() const { return weights_; }
  /// Trapezoidal weights for the stacked [h; c] vector (length 2n).
  const Eigen::VectorXd& stacked_weights() const { return stacked_weights_; }

  Index hot(Index i) const { return i; }
  Index cold(Index i) const { return n_ + i; }
  Index size() const { return 2 * n_; }

  bool operator==(const SpatialGrid& other) const { return n_ == other.n_; }

 private:
  Index n_;
  double dx_;
  Eigen::VectorXd x_;
  Eigen::VectorXd weights_;
  Eigen::VectorXd stacked_weights_;
};

/// Complex pair (z^h, z^c) sampled on the grid, stored stacked as [h; c].
class Field {
 public:
  Field() = default;
  explicit Field(Index n) : data_(Eigen::VectorXcd::Zero(2 * n)) {}
  explicit Field(Eigen::VectorXcd stacked);

  static Field sample(const SpatialGrid& grid, const std::function<cplx(double)>& fh,
                      const std::function<cplx(double)>& fc);

  Index n() const { return data_.size() / 2; }

  auto h() { return data_.head(n()); }
  auto h() const { return data_.head(n()); }
  auto c() { return data_.tail(n()); }
  auto c() const { return data_.tail(n()); }

  Eigen::VectorXcd& stacked() { return data_; }
  const Eigen::VectorXcd& stacked() const { return data_; }

  Field real_part() const;

  Field& operator+=(const Field& o) { data_ += o.data_; return *this; }
  Field& operator-=(const Field& o) { data_ -= o.data_; return *this; }
  Field& operator*=(cplx s) { data_ *= s; return *this; }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(cplx s, Field a) { return a *= s; }

 private:
  Eigen::VectorXcd data_;
};

/// Inlet temperatures g^h(t), g^c(t).
struct BoundaryInput {
  std::function<double(double)> gh = [](double) { return 0.0; };
  std::function<double(double)> gc = [](double) { return 0.0; };

  static BoundaryInput homogeneous() { return {}; }
};

struct SystemMatrices {
  Eigen::Matrix2d U;
  Eigen::Matrix2d M;
};

SystemMatrices system_matrices(const ExchangerParams& params);

/// Largest singular value of the coupling matrix M.
double spectral_norm_M(const ExchangerParams& params);

// L2 inner product on stacked samples, linear in the first argument:
// <a, b> = sum_i w_i conj(b_i) a_i.
template <typename DerivedA, typename DerivedB>
cplx inner(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b,
           const SpatialGrid& grid) {
  return b.dot(grid.stacked_weights().cwiseProduct(a.derived()).eval());
}

template <typename Derived>
double l2_norm(const Eigen::MatrixBase<Derived>& a, const SpatialGrid& grid) {
  return std::sqrt((grid.stacked_weights().array() * a.derived().array().abs2()).sum());
}

inline cplx inner(const Field& a, const Field& b, const SpatialGrid& grid) {
  return inner(a.stacked(), b.stacked(), grid);
}

inline double l2_norm(const Field& a, const SpatialGrid& grid) {
  return l2_norm(a.stacked(), grid);
}

/// Throws std::invalid_argument if the field does not live on `grid`.
void require_on_grid(const Field& f, const SpatialGrid& grid, const char* what);

}  // namespace specobs
