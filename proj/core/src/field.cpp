#include "spe/field.hpp"

#include <cmath>

namespace spe {

namespace {

inline double basis_1d(Parity p, int n, double theta) {
  // theta = n*pi*coord/extent precomputed by the caller
  return p == Parity::Sin ? std::sin(theta) : std::cos(theta);
}

}  // namespace

double Field::eval(double x, double z) const {
  if (x < 0.0 || x > dom_.L || z < -dom_.depth || z > 0.0)
    throw domain_error("Field::eval: point outside the closed domain");
  const double zeta = z + dom_.depth;
  double sum = 0.0;
  for (int k = k_min(); k <= dom_.Nx; ++k) {
    const double fx = basis_1d(px_, k, k * kPi * x / dom_.L);
    double inner_sum = 0.0;
    for (int m = m_min(); m <= dom_.Nz; ++m) {
      inner_sum += c_(k, m) * basis_1d(pz_, m, m * kPi * zeta / dom_.depth);
    }
    sum += fx * inner_sum;
  }
  return sum;
}

Field Field::dx() const {
  Field out(dom_, px_ == Parity::Sin ? Parity::Cos : Parity::Sin, pz_);
  const double sign = px_ == Parity::Sin ? 1.0 : -1.0;  // cos' = -sin
  for (int k = 1; k <= dom_.Nx; ++k) out.c_.row(k) = sign * (k * kPi / dom_.L) * c_.row(k);
  // k=0: either input row is zero (Sin) or derivative vanishes (Cos).
  return out;
}

Field Field::dz() const {
  Field out(dom_, px_, pz_ == Parity::Sin ? Parity::Cos : Parity::Sin);
  const double sign = pz_ == Parity::Sin ? 1.0 : -1.0;
  for (int m = 1; m <= dom_.Nz; ++m) out.c_.col(m) = sign * (m * kPi / dom_.depth) * c_.col(m);
  return out;
}

double Field::inner(const Field& other) const {
  require_same_family(other);
  double sum = 0.0;
  for (int k = k_min(); k <= dom_.Nx; ++k) {
    const double mx = mass_x(k);
    for (int m = m_min(); m <= dom_.Nz; ++m) {
      sum += c_(k, m) * other.c_(k, m) * mx * mass_z(m);
    }
  }
  return sum;
}

Field phi_of_v(const Field& v) {
  if (v.parity_x() != Parity::Sin || v.parity_z() != Parity::Cos)
    throw shape_error("phi_of_v: expected a v-family field (Sin x, Cos z)");
  const DomainSpec& dom = v.domain();
  Field theta(dom, Parity::Cos, Parity::Sin);
  for (int k = 1; k <= dom.Nx; ++k) {
    for (int m = 1; m <= dom.Nz; ++m) {
      theta.coeffs()(k, m) = -(static_cast<double>(k) * dom.depth) /
                             (static_cast<double>(m) * dom.L) * v.coeffs()(k, m);
    }
  }
  return theta;
}

void remove_vertical_mean(Field& f) {
  if (f.parity_z() != Parity::Cos)
    throw shape_error("remove_vertical_mean: field is not Cos in z");
  f.coeffs().col(0).setZero();
}

}  // namespace spe
