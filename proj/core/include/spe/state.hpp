#ifndef SPE_STATE_HPP
#define SPE_STATE_HPP

#include <random>

#include "spe/field.hpp"

namespace spe {

struct StateNorms {
  double l2 = 0.0;     // |Y|
  double h1 = 0.0;     // ||Y|| (H^1 seminorm)
  double dz_l2 = 0.0;  // |d_z Y|
};

// Extended per-step diagnostics used by the time steppers.
struct StateDiag {
  double l2 = 0.0;
  double h1 = 0.0;
  double dz_l2 = 0.0;
  double dz_h1 = 0.0;  // ||d_z Y||
  double a_l2 = 0.0;   // |A Y|
};

// Y = (v,T) on one domain.  The v component always lives in the
// constrained family (Sin x, Cos z, m>=1), so the zero-vertical-mean
// invariant is structural.
class State {
 public:
  explicit State(const DomainSpec& dom, double t = 0.0)
      : v_(dom, Parity::Sin, Parity::Cos), T_(dom, Parity::Cos, Parity::Cos), t_(t) {}

  State(Field v, Field T, double t = 0.0) : v_(std::move(v)), T_(std::move(T)), t_(t) {
    if (v_.parity_x() != Parity::Sin || v_.parity_z() != Parity::Cos)
      throw shape_error("State: v component must be (Sin x, Cos z)");
    if (T_.parity_x() != Parity::Cos || T_.parity_z() != Parity::Cos)
      throw shape_error("State: T component must be (Cos x, Cos z)");
    v_.require_same_domain(T_);
    remove_vertical_mean(v_);
  }

  const DomainSpec& domain() const { return v_.domain(); }
  Field& v() { return v_; }
  const Field& v() const { return v_; }
  Field& T() { return T_; }
  const Field& T() const { return T_; }
  double time() const { return t_; }
  void set_time(double t) { t_ = t; }

  bool all_finite() const { return v_.all_finite() && T_.all_finite(); }

  State& operator+=(const State& o) {
    v_ += o.v_;
    T_ += o.T_;
    return *this;
  }
  State& operator-=(const State& o) {
    v_ -= o.v_;
    T_ -= o.T_;
    return *this;
  }
  State& operator*=(double a) {
    v_ *= a;
    T_ *= a;
    return *this;
  }
  friend State operator+(State a, const State& b) { return a += b; }
  friend State operator-(State a, const State& b) { return a -= b; }
  friend State operator*(double a, State y) { return y *= a; }

  void require_same_domain(const State& o) const { v_.require_same_domain(o.v_); }

 private:
  Field v_;
  Field T_;
  double t_;
};

double inner(const State& a, const State& b);
StateNorms norms(const State& y);
StateDiag diag_norms(const State& y);

// Deterministic standard normal built on raw mt19937_64 output so the
// draw sequence is identical across platforms and standard libraries.
double standard_normal(std::mt19937_64& rng);

// SplitMix64 stream; used to derive independent per-path seeds.
std::uint64_t splitmix64(std::uint64_t& state);

// Smooth random state: coefficient of mode (k,m) is a normal draw scaled
// by (1+lambda(k,m))^-decay.
State random_state(std::mt19937_64& rng, const DomainSpec& dom, double decay = 1.0);

}  // namespace spe

#endif
