#include "specobs/model.hpp"

#include <cmath>
#include <string>

#include <Eigen/SVD>

namespace specobs {

ExchangerParams::ExchangerParams(double u1, double u2, double c1, double c2)
    : u1_(u1), u2_(u2), c1_(c1), c2_(c2) {
  if (!(std::isfinite(u1) && std::isfinite(u2) && std::isfinite(c1) && std::isfinite(c2)))
    throw std::invalid_argument("exchanger parameters must be finite");
  if (!(u1 > 0.0) || !(u2 > 0.0))
    throw std::invalid_argument("transport velocities u1, u2 must be > 0");
  if (c1 < 0.0 || c2 < 0.0)
    throw std::invalid_argument("heat-transfer coefficients c1, c2 must be >= 0");
}

SpatialGrid::SpatialGrid(Index n) : n_(n) {
  if (n < 3) throw std::invalid_argument("grid needs at least 3 nodes, got " + std::to_string(n));
  dx_ = 1.0 / static_cast<double>(n - 1);
  x_.resize(n);
  for (Index i = 0; i < n; ++i) x_[i] = static_cast<double>(i) * dx_;
  x_[n - 1] = 1.0;

  weights_ = Eigen::VectorXd::Constant(n, dx_);
  weights_[0] *= 0.5;
  weights_[n - 1] *= 0.5;
  stacked_weights_.resize(2 * n);
  stacked_weights_ << weights_, weights_;
}

Field::Field(Eigen::VectorXcd stacked) : data_(std::move(stacked)) {
  if (data_.size() % 2 != 0)
    throw std::invalid_argument("stacked field must have even length");
}

Field Field::sample(const SpatialGrid& grid, const std::function<cplx(double)>& fh,
                    const std::function<cplx(double)>& fc) {
  Field f(grid.n());
  for (Index i = 0; i < grid.n(); ++i) {
    f.h()[i] = fh(grid.x()[i]);
    f.c()[i] = fc(grid.x()[i]);
  }
  return f;
}

Field Field::real_part() const {
  return Field(Eigen::VectorXcd(data_.real().cast<cplx>()));
}

SystemMatrices system_matrices(const ExchangerParams& p) {
  SystemMatrices m;
  m.U << -p.u1(), 0.0,
         0.0, p.u2();
  m.M << -p.c1(), p.c1(),
         p.c2(), -p.c2();
  return m;
}

double spectral_norm_M(const ExchangerParams& params) {
  const Eigen::Matrix2d M = system_matrices(params).M;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(M);
  return svd.singularValues()[0];
}

void require_on_grid(const Field& f, const SpatialGrid& grid, const char* what) {
  if (f.n() != grid.n())
    throw std::invalid_argument(std::string(what) + ": field has " + std::to_string(f.n()) +
                                " nodes, grid has " + std::to_string(grid.n()));
}

}  // namespace specobs
