#ifndef SPE_GRID_HPP
#define SPE_GRID_HPP

#include <Eigen/Dense>
#include <vector>

#include "spe/field.hpp"

namespace spe {

// Midpoint collocation grid for the half-range trigonometric family.
// Nodes x_i = (i+1/2) L/gx, zeta_j = (j+1/2) depth/gz give exact discrete
// orthogonality for all frequencies below 2*g, so with g = ceil(pad*(N+1))
// and pad >= 3/2 the in-band projection of a product of two in-band
// fields is free of aliasing.
class CollocationGrid {
 public:
  CollocationGrid(const DomainSpec& dom, double pad);

  const DomainSpec& domain() const { return dom_; }
  int gx() const { return gx_; }
  int gz() const { return gz_; }
  double node_x(int i) const { return (i + 0.5) * dom_.L / gx_; }
  double node_z(int j) const { return (j + 0.5) * dom_.depth / gz_ - dom_.depth; }

  // Quadrature weight of one node (midpoint rule).
  double quad_weight() const { return dom_.L / gx_ * dom_.depth / gz_; }

  // Collocation values of a field on the full grid (gx x gz).
  Eigen::MatrixXd to_grid(const Field& f) const;

  // Coefficients of the in-band projection of grid values, interpreted
  // in the requested parity family.  Exact inverse of to_grid on in-band
  // fields; out-of-band content of products is discarded.
  Field from_grid(const Eigen::MatrixXd& values, Parity px, Parity pz) const;

 private:
  const Eigen::MatrixXd& basis_x(Parity p) const { return p == Parity::Sin ? sx_ : cx_; }
  const Eigen::MatrixXd& basis_z(Parity p) const { return p == Parity::Sin ? sz_ : cz_; }

  DomainSpec dom_;
  int gx_, gz_;
  Eigen::MatrixXd sx_, cx_;  // gx x (Nx+1), columns are basis functions at nodes
  Eigen::MatrixXd sz_, cz_;  // gz x (Nz+1)
  Eigen::VectorXd wx_sin_, wx_cos_, wz_sin_, wz_cos_;  // analysis weights
};

}  // namespace spe

#endif
