#include "spe/grid.hpp"

#include <cmath>

namespace spe {

CollocationGrid::CollocationGrid(const DomainSpec& dom, double pad) : dom_(dom) {
  if (!(pad >= 1.0)) throw config_error("CollocationGrid: pad must be >= 1");
  gx_ = static_cast<int>(std::ceil(pad * (dom.Nx + 1)));
  gz_ = static_cast<int>(std::ceil(pad * (dom.Nz + 1)));
  if (gx_ < dom.Nx + 1 || gz_ < dom.Nz + 1)
    throw config_error("CollocationGrid: grid too small for requested band");

  sx_.resize(gx_, dom.Nx + 1);
  cx_.resize(gx_, dom.Nx + 1);
  for (int i = 0; i < gx_; ++i) {
    for (int k = 0; k <= dom.Nx; ++k) {
      const double th = k * kPi * (i + 0.5) / gx_;
      sx_(i, k) = std::sin(th);
      cx_(i, k) = std::cos(th);
    }
  }
  sz_.resize(gz_, dom.Nz + 1);
  cz_.resize(gz_, dom.Nz + 1);
  for (int j = 0; j < gz_; ++j) {
    for (int m = 0; m <= dom.Nz; ++m) {
      const double th = m * kPi * (j + 0.5) / gz_;
      sz_(j, m) = std::sin(th);
      cz_(j, m) = std::cos(th);
    }
  }

  // Discrete orthogonality: sum over nodes of basis_k * basis_k' equals
  // g/2 off the constant mode and g on it.
  wx_sin_ = Eigen::VectorXd::Constant(dom.Nx + 1, 2.0 / gx_);
  wx_sin_(0) = 0.0;
  wx_cos_ = Eigen::VectorXd::Constant(dom.Nx + 1, 2.0 / gx_);
  wx_cos_(0) = 1.0 / gx_;
  wz_sin_ = Eigen::VectorXd::Constant(dom.Nz + 1, 2.0 / gz_);
  wz_sin_(0) = 0.0;
  wz_cos_ = Eigen::VectorXd::Constant(dom.Nz + 1, 2.0 / gz_);
  wz_cos_(0) = 1.0 / gz_;
}

Eigen::MatrixXd CollocationGrid::to_grid(const Field& f) const {
  if (f.domain() != dom_) throw shape_error("to_grid: mismatched DomainSpec");
  return basis_x(f.parity_x()) * f.coeffs() * basis_z(f.parity_z()).transpose();
}

Field CollocationGrid::from_grid(const Eigen::MatrixXd& values, Parity px, Parity pz) const {
  if (values.rows() != gx_ || values.cols() != gz_)
    throw shape_error("from_grid: values shape does not match the grid");
  Field f(dom_, px, pz);
  const Eigen::VectorXd& wx = px == Parity::Sin ? wx_sin_ : wx_cos_;
  const Eigen::VectorXd& wz = pz == Parity::Sin ? wz_sin_ : wz_cos_;
  f.coeffs() = wx.asDiagonal() * (basis_x(px).transpose() * values * basis_z(pz)) * wz.asDiagonal();
  return f;
}

}  // namespace spe
