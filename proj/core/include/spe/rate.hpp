#ifndef SPE_RATE_HPP
#define SPE_RATE_HPP

#include <string>
#include <vector>

#include "spe/dynamics.hpp"

namespace spe {

// Energy functional 1/2 int_0^T |h|_U^2 dt of a piecewise-constant
// control; membership in T_M means 2*energy(h) <= M.
double energy(const ControlPath& h);

// Backward adjoint sweep for the frozen-coefficient skeleton operator
// A + B(.,Y0) + B(Y0,.) + G.  Stores p_N = phi and
//   p_n = (I - dt L_n)^* (I + dt A)^-1 p_{n+1},
// the exact transpose of the forward recursion, so the discrete pairing
//   <R^h(T), phi> = sum_n dt <h_n, W_n>_U,  W_n = psi_n^* (I+dtA)^-1 p_{n+1}
// holds to round-off.  B*, G* are numerical transposes of the assembled
// frozen-Y0 linear map.
struct AdjointSolution {
  std::vector<State> p;  // indices 0..N, p[N] = phi
};

AdjointSolution adjoint_solve(const State& phi, const SolverConfig& cfg, const Operators& ops,
                              const Trajectory& base);

// The control weights W_n of the pairing identity, one U-vector per step.
std::vector<Eigen::VectorXd> control_weights(const AdjointSolution& adj, const SolverConfig& cfg,
                                             const Operators& ops, const NoiseSpec& spec,
                                             const Trajectory& base);

enum class RateMethod { adjoint_closed_form, gradient_descent };

std::string to_string(RateMethod m);

struct RateResult {
  double value = 0.0;       // I
  ControlPath optimizer;
  RateMethod method = RateMethod::adjoint_closed_form;
  double residual = 0.0;    // |<R(T),phi> - x| from a forward solve
  double gram = 0.0;        // Q = sum dt |W_n|_U^2
  int iterations = 0;
  // Gradient descent only: accepted objective values, nonincreasing
  // within each penalty phase; phase_starts marks where the plateau rule
  // doubled the penalty and re-anchored the objective.
  std::vector<double> objective_log;
  std::vector<int> phase_starts;
};

// Rate of the terminal hyperplane {<Y(T),phi> = x} over the linear map
// h -> R^h: closed form I = x^2/(2Q) with optimizer h*_n = (x/Q) W_n.
// Throws degenerate_direction_error when Q falls below q_tol.
RateResult rate_for_terminal_hyperplane(const State& phi, double x, const SolverConfig& cfg,
                                        const Operators& ops, const NoiseSpec& spec,
                                        const Trajectory& base, double q_tol = 1e-12);

// Penalized gradient descent cross-check for the same functional; the
// constraint value is always evaluated by a forward skeleton solve.
RateResult rate_gradient_descent(const State& phi, double x, const SolverConfig& cfg,
                                 const Operators& ops, const NoiseSpec& spec,
                                 const Trajectory& base, int iters, double q_tol = 1e-12);

}  // namespace spe

#endif
