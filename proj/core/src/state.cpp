#include "spe/state.hpp"

#include <cmath>

namespace spe {

double inner(const State& a, const State& b) {
  a.require_same_domain(b);
  return a.v().inner(b.v()) + a.T().inner(b.T());
}

namespace {

// Accumulates sum of w(k,m) * c(k,m)^2 * mass(k,m) over one field.
template <class Weight>
double weighted_mass_sum(const Field& f, Weight&& w) {
  const DomainSpec& dom = f.domain();
  double sum = 0.0;
  for (int k = f.k_min(); k <= dom.Nx; ++k) {
    const double mx = f.mass_x(k);
    for (int m = f.m_min(); m <= dom.Nz; ++m) {
      const double c = f.coeffs()(k, m);
      sum += w(k, m) * c * c * mx * f.mass_z(m);
    }
  }
  return sum;
}

}  // namespace

StateNorms norms(const State& y) {
  const DomainSpec& dom = y.domain();
  auto one = [](int, int) { return 1.0; };
  auto lam = [&dom](int k, int m) { return dom.lambda(k, m); };
  auto mzsq = [&dom](int, int m) {
    const double w = m * kPi / dom.depth;
    return w * w;
  };
  StateNorms n;
  n.l2 = std::sqrt(weighted_mass_sum(y.v(), one) + weighted_mass_sum(y.T(), one));
  n.h1 = std::sqrt(weighted_mass_sum(y.v(), lam) + weighted_mass_sum(y.T(), lam));
  n.dz_l2 = std::sqrt(weighted_mass_sum(y.v(), mzsq) + weighted_mass_sum(y.T(), mzsq));
  return n;
}

StateDiag diag_norms(const State& y) {
  const DomainSpec& dom = y.domain();
  auto lam = [&dom](int k, int m) { return dom.lambda(k, m); };
  auto mzsq = [&dom](int, int m) {
    const double w = m * kPi / dom.depth;
    return w * w;
  };
  StateDiag d;
  const StateNorms n = norms(y);
  d.l2 = n.l2;
  d.h1 = n.h1;
  d.dz_l2 = n.dz_l2;
  auto mz_lam = [&](int k, int m) { return mzsq(k, m) * lam(k, m); };
  auto lam_sq = [&](int k, int m) { return lam(k, m) * lam(k, m); };
  d.dz_h1 = std::sqrt(weighted_mass_sum(y.v(), mz_lam) + weighted_mass_sum(y.T(), mz_lam));
  d.a_l2 = std::sqrt(weighted_mass_sum(y.v(), lam_sq) + weighted_mass_sum(y.T(), lam_sq));
  return d;
}

double standard_normal(std::mt19937_64& rng) {
  // Box-Muller; u1 in (0,1], u2 in [0,1).
  const double u1 = (static_cast<double>(rng() >> 11) + 1.0) * 0x1.0p-53;
  const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

State random_state(std::mt19937_64& rng, const DomainSpec& dom, double decay) {
  State y(dom);
  for (int k = 1; k <= dom.Nx; ++k)
    for (int m = 1; m <= dom.Nz; ++m)
      y.v().coeffs()(k, m) = standard_normal(rng) / std::pow(1.0 + dom.lambda(k, m), decay);
  for (int k = 0; k <= dom.Nx; ++k)
    for (int m = 0; m <= dom.Nz; ++m)
      y.T().coeffs()(k, m) = standard_normal(rng) / std::pow(1.0 + dom.lambda(k, m), decay);
  return y;
}

}  // namespace spe
