#ifndef SPE_DOMAIN_HPP
#define SPE_DOMAIN_HPP

#include <cmath>

#include "spe/errors.hpp"

namespace spe {

inline constexpr double kPi = 3.14159265358979323846;

// Rectangle (0,L) x (-depth,0) with a truncated trigonometric basis:
// Nx horizontal and Nz vertical modes beyond the constant one.
//
// Basis conventions used throughout:
//   v-fields:  sin(k pi x / L) * cos(m pi (z+depth)/depth),  1<=k<=Nx, 1<=m<=Nz
//   T-fields:  cos(k pi x / L) * cos(m pi (z+depth)/depth),  0<=k<=Nx, 0<=m<=Nz
// The missing m=0 row of the v family enforces the zero vertical mean
// constraint exactly; lateral and top/bottom boundary conditions hold
// identically for every coefficient vector.
struct DomainSpec {
  double L = 1.0;
  double depth = 1.0;
  int Nx = 1;
  int Nz = 1;

  DomainSpec() = default;
  DomainSpec(double L_, double depth_, int Nx_, int Nz_) : L(L_), depth(depth_), Nx(Nx_), Nz(Nz_) {
    if (!(L > 0.0) || !(depth > 0.0)) throw config_error("DomainSpec: L and depth must be positive");
    if (Nx < 1 || Nz < 1) throw config_error("DomainSpec: Nx and Nz must be >= 1");
  }

  bool operator==(const DomainSpec& o) const {
    return L == o.L && depth == o.depth && Nx == o.Nx && Nz == o.Nz;
  }
  bool operator!=(const DomainSpec& o) const { return !(*this == o); }

  // Laplacian eigenvalue of mode (k,m); zero only for (0,0).
  double lambda(int k, int m) const {
    const double a = k / L, b = m / depth;
    return kPi * kPi * (a * a + b * b);
  }

  // Smallest nonzero eigenvalue over the v family and the T family
  // minus its constant mode; Poincare constant is 1/sqrt of this.
  double lambda_min() const {
    const double lmax = L > depth ? L : depth;
    return kPi * kPi / (lmax * lmax);
  }

  double poincare_constant() const { return 1.0 / std::sqrt(lambda_min()); }
};

}  // namespace spe

#endif
