#ifndef SPE_FIELD_HPP
#define SPE_FIELD_HPP

#include <Eigen/Dense>

#include "spe/domain.hpp"
#include "spe/errors.hpp"

namespace spe {

enum class Parity { Sin, Cos };

// A real trigonometric polynomial on the domain rectangle, stored as an
// (Nx+1) x (Nz+1) coefficient matrix indexed by (k,m).  Rows/columns that
// have no basis function for the given parity (k=0 for Sin-in-x, m=0 for
// Sin-in-z) are kept in the matrix as structural zeros so every field of
// a given domain has the same shape.
//
// Basis functions carry amplitude 1; all norms and inner products apply
// the explicit mode-mass factors from mass_x/mass_z.
class Field {
 public:
  Field(const DomainSpec& dom, Parity px, Parity pz)
      : dom_(dom), px_(px), pz_(pz), c_(Eigen::MatrixXd::Zero(dom.Nx + 1, dom.Nz + 1)) {}

  const DomainSpec& domain() const { return dom_; }
  Parity parity_x() const { return px_; }
  Parity parity_z() const { return pz_; }

  Eigen::MatrixXd& coeffs() { return c_; }
  const Eigen::MatrixXd& coeffs() const { return c_; }

  int k_min() const { return px_ == Parity::Sin ? 1 : 0; }
  int m_min() const { return pz_ == Parity::Sin ? 1 : 0; }

  double coeff(int k, int m) const { return c_(k, m); }
  void set_coeff(int k, int m, double value) {
    if (k < 0 || k > dom_.Nx || m < 0 || m > dom_.Nz)
      throw shape_error("Field::set_coeff: mode index out of band");
    if (k < k_min() || m < m_min())
      throw shape_error("Field::set_coeff: structurally absent mode for this parity");
    c_(k, m) = value;
  }

  // L^2 mass of one basis function, zero on structurally absent entries.
  double mass(int k, int m) const { return mass_x(k) * mass_z(m); }
  double mass_x(int k) const {
    if (px_ == Parity::Sin) return k == 0 ? 0.0 : dom_.L / 2.0;
    return k == 0 ? dom_.L : dom_.L / 2.0;
  }
  double mass_z(int m) const {
    if (pz_ == Parity::Sin) return m == 0 ? 0.0 : dom_.depth / 2.0;
    return m == 0 ? dom_.depth : dom_.depth / 2.0;
  }

  // Value of the truncated series at a point of the closed rectangle.
  double eval(double x, double z) const;

  // Term-by-term partial derivatives; the result has flipped parity in
  // the differentiated direction.
  Field dx() const;
  Field dz() const;

  double inner(const Field& other) const;
  double l2_sq() const { return inner(*this); }

  bool all_finite() const { return c_.allFinite(); }

  Field& operator+=(const Field& o) {
    require_same_family(o);
    c_ += o.c_;
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_family(o);
    c_ -= o.c_;
    return *this;
  }
  Field& operator*=(double a) {
    c_ *= a;
    return *this;
  }
  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator*(double a, Field f) { return f *= a; }

  void require_same_domain(const Field& o) const {
    if (dom_ != o.dom_) throw shape_error("Field: mismatched DomainSpec");
  }
  void require_same_family(const Field& o) const {
    require_same_domain(o);
    if (px_ != o.px_ || pz_ != o.pz_) throw shape_error("Field: mismatched parity family");
  }

 private:
  DomainSpec dom_;
  Parity px_, pz_;
  Eigen::MatrixXd c_;
};

// Diagnostic vertical velocity: theta = -int_{-depth}^{z} d_x v dz'.
// Exact per mode: the (k,m) v-mode maps to amplitude
// -(k*depth)/(m*L) on cos(k pi x/L) sin(m pi (z+depth)/depth), so theta
// vanishes identically on the top and bottom boundaries.
Field phi_of_v(const Field& v);

// Drops the m=0 column of a v-family field; together with band
// truncation this realizes the Leray-type projection P_H.
void remove_vertical_mean(Field& f);

}  // namespace spe

#endif
