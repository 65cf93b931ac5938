#ifndef SPE_NOISE_HPP
#define SPE_NOISE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "spe/state.hpp"
#include "spe/time_grid.hpp"

namespace spe {

enum class NoiseKind { additive, bounded_diagonal, linear_diagonal };

std::string to_string(NoiseKind k);
NoiseKind noise_kind_from_string(const std::string& s);

// One noise direction: a single amplitude-1 basis mode of the v or T
// family.  Directions alternate v and T targets in order of increasing
// eigenvalue, realizing U = U1 x U2 on finitely many modes.
struct NoiseDirection {
  bool is_v = true;
  int k = 1;
  int m = 1;
  double mass = 0.0;      // |phi_j|^2 in H
  double dz_mass = 0.0;   // |d_z phi_j|^2 in H
};

// A concrete diagonal psi family with its closed-form constant K, so
// Hypotheses (A.1), (A.2) and B are contracts checkable at runtime.
class NoiseSpec {
 public:
  static NoiseSpec make(NoiseKind kind, const DomainSpec& dom, int d_w,
                        std::vector<double> sigma, double saturation = 1.0);

  NoiseKind kind() const { return kind_; }
  const DomainSpec& domain() const { return dom_; }
  int d_w() const { return d_w_; }
  const std::vector<double>& sigma() const { return sigma_; }
  double saturation() const { return saturation_; }
  const std::vector<NoiseDirection>& directions() const { return dirs_; }
  double stored_K() const { return K_; }

  // Diagonal gain at direction j for the current state.
  double gain(int j, const State& y) const;

  // psi(t, Y) u for a U-vector u with d_w entries.
  State apply(double t, const State& y, const Eigen::VectorXd& u) const;

  // Adjoint of u -> psi(t,Y)u with respect to (U Euclidean, H) pairing.
  Eigen::VectorXd apply_adjoint(double t, const State& y, const State& z) const;

  // Squared Hilbert-Schmidt norms of psi and of d_z psi (entrywise d_z
  // on the output field).
  double hs_norm_sq(double t, const State& y) const;
  double dz_hs_norm_sq(double t, const State& y) const;

 private:
  NoiseKind kind_ = NoiseKind::additive;
  DomainSpec dom_;
  int d_w_ = 0;
  std::vector<double> sigma_;
  double saturation_ = 1.0;
  std::vector<NoiseDirection> dirs_;
  double K_ = 0.0;
};

// Pre-drawn Wiener increments, [step x mode], each N(0, dt).
// Regenerating with the same (master seed, path index) reproduces the
// array bit-for-bit.
struct WienerPath {
  TimeGrid grid;
  Eigen::MatrixXd increments;  // n_steps x d_w
  std::uint64_t master_seed = 0;
  std::uint64_t path_index = 0;
};

WienerPath sample_path(std::uint64_t master_seed, std::uint64_t path_index, const TimeGrid& grid,
                       int d_w);

struct HypothesisReport {
  NoiseKind kind;
  double stored_K = 0.0;
  double max_growth_ratio = 0.0;     // ||psi||^2 / (1+|phi|^2)
  double max_lipschitz_ratio = 0.0;  // ||psi(phi1)-psi(phi2)||^2 / |phi1-phi2|^2
  double max_dz_ratio = 0.0;         // ||d_z psi||^2 / (1+|d_z phi|^2)
  bool pass = false;
  double margin = 0.0;  // stored_K - max ratio
};

HypothesisReport verify_hypotheses(const NoiseSpec& spec, int trials, std::uint64_t seed);

}  // namespace spe

#endif
