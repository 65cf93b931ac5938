#ifndef SPE_DYNAMICS_HPP
#define SPE_DYNAMICS_HPP

#include <functional>
#include <vector>

#include "spe/noise.hpp"
#include "spe/operators.hpp"
#include "spe/time_grid.hpp"

namespace spe {

struct SolverConfig {
  TimeGrid grid;
  DomainSpec domain;
  OperatorToggles toggles;
  double eps = 0.0;
  double lambda_exponent = 0.25;  // a in lambda(eps) = eps^-a, 0 < a < 1/2
  int record_every = 1;
  double c_nl = 1.0;          // explicit-nonlinearity step guard: dt <= c_nl/(1+||Y_n||)
  double blowup_guard = 1e12;

  void validate() const {
    if (!(lambda_exponent > 0.0) || !(lambda_exponent < 0.5))
      throw config_error("SolverConfig: lambda_exponent must lie in (0, 1/2)");
    if (record_every < 1) throw config_error("SolverConfig: record_every must be >= 1");
    if (!(c_nl > 0.0)) throw config_error("SolverConfig: c_nl must be positive");
    if (!(blowup_guard > 0.0)) throw config_error("SolverConfig: blowup_guard must be positive");
    if (eps < 0.0) throw config_error("SolverConfig: eps must be >= 0");
  }
  // Deviation scale: diverges while sqrt(eps)*lambda(eps) -> 0.
  double lambda_of_eps() const {
    if (!(eps > 0.0)) throw config_error("lambda(eps) undefined at eps = 0");
    return std::pow(eps, -lambda_exponent);
  }
};

// Per-step scalar diagnostics, recorded at every step regardless of the
// state sampling stride.
struct StepDiag {
  double t = 0.0;
  double l2 = 0.0;
  double h1 = 0.0;
  double dz_l2 = 0.0;
  double dz_h1 = 0.0;
  double a_l2 = 0.0;
  double defect = 0.0;  // energy-identity defect rate (deterministic runs)
};

class Trajectory {
 public:
  std::vector<StepDiag> diag;                    // n_steps + 1 rows
  std::vector<std::pair<double, State>> samples; // strided by record_every
  SolverConfig cfg;

  const State& sample_state(int idx) const { return samples.at(idx).second; }

  // State at step n; requires the trajectory to have been recorded with
  // stride 1 (base trajectories for the linearized equations).
  const State& state_at_step(int n) const;
  bool has_every_step() const {
    return static_cast<int>(samples.size()) == cfg.grid.n_steps + 1;
  }

  double sup_l2() const;
  double sup_dz_l2() const;
  double sup_h1_sq() const;
  double int_h1_sq() const;       // left-Riemann sum of ||Y||^2
  double int_a_sq() const;        // left-Riemann sum of |AY|^2
  double int_dz_mixed() const;    // left-Riemann sum of |d_z Y|^2 ||d_z Y||^2
  double total_defect() const;    // sum dt * defect rate

  // Monitored moment quantities: sup|Y|^4, int ||Y||^2,
  // sup |d_z Y|^4, int |d_z Y|^2 ||d_z Y||^2.
  std::array<double, 4> moment_diagnostics() const;
};

using StepObserver = std::function<void(int step, double t, const State& y)>;

// Shared semi-implicit kernel: solves (I + dt A) y_next = y - dt*forcing
// + stochastic_term mode by mode.
State step(const State& y, const State& forcing, const State& stochastic_term, double dt);

// d Y0 + A Y0 dt + B(Y0,Y0) dt + G(Y0) dt = 0
Trajectory simulate_deterministic(const State& y0, const SolverConfig& cfg,
                                  const Operators& ops, const StepObserver& obs = nullptr);

// d Ye + A Ye dt + B(Ye,Ye) dt + G(Ye) dt = sqrt(eps) psi(t,Ye) dW
Trajectory simulate_stochastic(const State& y0, const SolverConfig& cfg, const Operators& ops,
                               const NoiseSpec& spec, const WienerPath& path,
                               const StepObserver& obs = nullptr);

// d V + A V dt + (B(Y0,V) + B(V,Y0)) dt + G(V) dt = psi(t,Y0) dW, V(0)=0
Trajectory simulate_linearized(const State& y0, const SolverConfig& cfg, const Operators& ops,
                               const NoiseSpec& spec, const WienerPath& path,
                               const Trajectory& base, const StepObserver& obs = nullptr);

// Piecewise-constant U-valued control on the time grid.
struct ControlPath {
  TimeGrid grid;
  Eigen::MatrixXd values;  // n_steps x d_w

  ControlPath() = default;
  ControlPath(const TimeGrid& g, int d_w)
      : grid(g), values(Eigen::MatrixXd::Zero(g.n_steps, d_w)) {}
};

// d R + A R dt + (B(R,Y0) + B(Y0,R)) dt + G(R) dt = psi(t,Y0) h dt, R(0)=0
Trajectory solve_skeleton(const ControlPath& h, const SolverConfig& cfg, const Operators& ops,
                          const NoiseSpec& spec, const Trajectory& base,
                          const StepObserver& obs = nullptr);

// d Z + A Z dt + B(Z, Y0 + sqrt(eps) lambda(eps) Z) dt + B(Y0,Z) dt
//   + G(Z) dt = lambda(eps)^-1 psi(t,Ybar) dW + psi(t,Ybar) h dt,
// with Ybar = Y0 + sqrt(eps) lambda(eps) Z.  Requires eps > 0; the eps=0
// limit is solve_skeleton.
Trajectory simulate_controlled(const ControlPath& h, const SolverConfig& cfg,
                               const Operators& ops, const NoiseSpec& spec,
                               const WienerPath& path, const Trajectory& base,
                               const StepObserver& obs = nullptr);

}  // namespace spe

#endif
