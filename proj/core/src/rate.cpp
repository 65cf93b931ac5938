#include "spe/rate.hpp"

#include <cmath>
#include <limits>

namespace spe {

double energy(const ControlPath& h) {
  return 0.5 * h.grid.dt() * h.values.squaredNorm();
}

std::string to_string(RateMethod m) {
  return m == RateMethod::adjoint_closed_form ? "adjoint_closed_form" : "gradient_descent";
}

namespace {

int state_dim(const DomainSpec& dom) {
  return dom.Nx * dom.Nz + (dom.Nx + 1) * (dom.Nz + 1);
}

Eigen::VectorXd to_vec(const State& y) {
  const DomainSpec& dom = y.domain();
  Eigen::VectorXd v(state_dim(dom));
  int i = 0;
  for (int k = 1; k <= dom.Nx; ++k)
    for (int m = 1; m <= dom.Nz; ++m) v(i++) = y.v().coeffs()(k, m);
  for (int k = 0; k <= dom.Nx; ++k)
    for (int m = 0; m <= dom.Nz; ++m) v(i++) = y.T().coeffs()(k, m);
  return v;
}

State from_vec(const DomainSpec& dom, const Eigen::VectorXd& v) {
  State y(dom);
  int i = 0;
  for (int k = 1; k <= dom.Nx; ++k)
    for (int m = 1; m <= dom.Nz; ++m) y.v().coeffs()(k, m) = v(i++);
  for (int k = 0; k <= dom.Nx; ++k)
    for (int m = 0; m <= dom.Nz; ++m) y.T().coeffs()(k, m) = v(i++);
  return y;
}

Eigen::VectorXd mass_vec(const DomainSpec& dom) {
  const State proto(dom);
  Eigen::VectorXd d(state_dim(dom));
  int i = 0;
  for (int k = 1; k <= dom.Nx; ++k)
    for (int m = 1; m <= dom.Nz; ++m) d(i++) = proto.v().mass(k, m);
  for (int k = 0; k <= dom.Nx; ++k)
    for (int m = 0; m <= dom.Nz; ++m) d(i++) = proto.T().mass(k, m);
  return d;
}

// Frozen-coefficient linear part X -> B(X,Yb) + B(Yb,X) + G(X) assembled
// as a dense matrix in coefficient space; the H-adjoint is
// D^-1 M^T D with D the mass diagonal.
class FrozenLinearOp {
 public:
  FrozenLinearOp(const Operators& ops, const OperatorToggles& tg, const State& yb)
      : dom_(yb.domain()), active_(tg.enable_B || tg.enable_G) {
    if (!active_) return;
    const int dim = state_dim(dom_);
    mat_.resize(dim, dim);
    for (int col = 0; col < dim; ++col) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(dim);
      e(col) = 1.0;
      const State x = from_vec(dom_, e);
      State lx(dom_);
      if (tg.enable_B) lx += ops.apply_B(x, yb) + ops.apply_B(yb, x);
      if (tg.enable_G) lx += ops.apply_G(x);
      mat_.col(col) = to_vec(lx);
    }
    mass_ = mass_vec(dom_);
  }

  State apply_adjoint(const State& z) const {
    if (!active_) return State(z.domain());
    // The flattened layout skips the structurally absent v modes, so
    // every mass entry is positive.
    Eigen::VectorXd out = mat_.transpose() * (mass_.asDiagonal() * to_vec(z));
    out.array() /= mass_.array();
    return from_vec(dom_, out);
  }

 private:
  DomainSpec dom_;
  bool active_;
  Eigen::MatrixXd mat_;
  Eigen::VectorXd mass_;
};

State implicit_a_solve(const State& y, double dt) {
  const DomainSpec& dom = y.domain();
  State out(dom, y.time());
  for (int k = 0; k <= dom.Nx; ++k) {
    for (int m = 0; m <= dom.Nz; ++m) {
      const double denom = 1.0 + dt * dom.lambda(k, m);
      out.v().coeffs()(k, m) = y.v().coeffs()(k, m) / denom;
      out.T().coeffs()(k, m) = y.T().coeffs()(k, m) / denom;
    }
  }
  return out;
}

}  // namespace

AdjointSolution adjoint_solve(const State& phi, const SolverConfig& cfg, const Operators& ops,
                              const Trajectory& base) {
  cfg.validate();
  if (phi.domain() != cfg.domain) throw shape_error("adjoint_solve: phi domain mismatch");
  if (!phi.all_finite()) throw blowup_error("adjoint_solve: non-finite phi");
  if (base.cfg.grid != cfg.grid) throw shape_error("adjoint_solve: base grid mismatch");
  if (!base.has_every_step())
    throw config_error("adjoint_solve: base must be recorded with record_every = 1");

  const int n_steps = cfg.grid.n_steps;
  const double dt = cfg.grid.dt();
  AdjointSolution adj;
  adj.p.assign(n_steps + 1, State(cfg.domain));
  adj.p[n_steps] = phi;
  for (int n = n_steps - 1; n >= 0; --n) {
    const State q = implicit_a_solve(adj.p[n + 1], dt);
    const FrozenLinearOp lin(ops, cfg.toggles, base.state_at_step(n));
    adj.p[n] = q - dt * lin.apply_adjoint(q);
  }
  return adj;
}

std::vector<Eigen::VectorXd> control_weights(const AdjointSolution& adj, const SolverConfig& cfg,
                                             const Operators& /*ops*/, const NoiseSpec& spec,
                                             const Trajectory& base) {
  const int n_steps = cfg.grid.n_steps;
  const double dt = cfg.grid.dt();
  std::vector<Eigen::VectorXd> w;
  w.reserve(n_steps);
  for (int n = 0; n < n_steps; ++n) {
    const State q = implicit_a_solve(adj.p[n + 1], dt);
    w.push_back(spec.apply_adjoint(n * dt, base.state_at_step(n), q));
  }
  return w;
}

namespace {

struct WeightData {
  std::vector<Eigen::VectorXd> w;
  double gram = 0.0;
};

WeightData make_weights(const State& phi, const SolverConfig& cfg, const Operators& ops,
                        const NoiseSpec& spec, const Trajectory& base) {
  const AdjointSolution adj = adjoint_solve(phi, cfg, ops, base);
  WeightData wd;
  wd.w = control_weights(adj, cfg, ops, spec, base);
  const double dt = cfg.grid.dt();
  for (const auto& wn : wd.w) wd.gram += dt * wn.squaredNorm();
  return wd;
}

double terminal_pairing(const ControlPath& h, const State& phi, const SolverConfig& cfg,
                        const Operators& ops, const NoiseSpec& spec, const Trajectory& base) {
  SolverConfig scfg = cfg;
  scfg.record_every = 1;
  const Trajectory r = solve_skeleton(h, scfg, ops, spec, base);
  return inner(r.state_at_step(cfg.grid.n_steps), phi);
}

}  // namespace

RateResult rate_for_terminal_hyperplane(const State& phi, double x, const SolverConfig& cfg,
                                        const Operators& ops, const NoiseSpec& spec,
                                        const Trajectory& base, double q_tol) {
  const WeightData wd = make_weights(phi, cfg, ops, spec, base);
  if (!(wd.gram > q_tol))
    throw degenerate_direction_error(
        "rate: Gram value Q <= tolerance; the noise does not act on phi's reachable space");

  RateResult res;
  res.method = RateMethod::adjoint_closed_form;
  res.gram = wd.gram;
  res.optimizer = ControlPath(cfg.grid, spec.d_w());
  for (int n = 0; n < cfg.grid.n_steps; ++n)
    res.optimizer.values.row(n) = (x / wd.gram) * wd.w[n].transpose();
  res.value = x * x / (2.0 * wd.gram);
  res.residual = std::abs(terminal_pairing(res.optimizer, phi, cfg, ops, spec, base) - x);
  return res;
}

RateResult rate_gradient_descent(const State& phi, double x, const SolverConfig& cfg,
                                 const Operators& ops, const NoiseSpec& spec,
                                 const Trajectory& base, int iters, double q_tol) {
  if (iters < 1) throw config_error("rate_gradient_descent: iters must be >= 1");
  const WeightData wd = make_weights(phi, cfg, ops, spec, base);
  if (!(wd.gram > q_tol))
    throw degenerate_direction_error(
        "rate: Gram value Q <= tolerance; the noise does not act on phi's reachable space");

  const double dt = cfg.grid.dt();
  const int n_steps = cfg.grid.n_steps;
  const int d_w = spec.d_w();

  ControlPath h(cfg.grid, d_w);
  // Oversized probe controls can trip the solver guards; such trials
  // read as an infinite objective and the line search backtracks.
  auto constraint = [&](const ControlPath& hh) {
    try {
      return terminal_pairing(hh, phi, cfg, ops, spec, base) - x;
    } catch (const blowup_error&) {
      return std::numeric_limits<double>::infinity();
    } catch (const stability_error&) {
      return std::numeric_limits<double>::infinity();
    }
  };
  double penalty = 1e2 / wd.gram;  // scale-free start from the problem's own Gram value
  auto objective = [&](const ControlPath& hh, double r) {
    if (!std::isfinite(r)) return std::numeric_limits<double>::infinity();
    return energy(hh) + penalty * r * r;
  };

  RateResult res;
  res.method = RateMethod::gradient_descent;
  res.gram = wd.gram;

  double r = constraint(h);
  double obj = objective(h, r);
  if (x == 0.0) {
    // h = 0 already optimal.
    res.optimizer = h;
    res.value = 0.0;
    res.residual = std::abs(r);
    return res;
  }

  const int kMaxPhases = 8;
  const int kMaxBacktracks = 40;
  int it = 0;
  int accepted_total = 0;
  for (int phase = 0; phase < kMaxPhases && it < iters; ++phase) {
    res.phase_starts.push_back(static_cast<int>(res.objective_log.size()));
    res.objective_log.push_back(obj);
    double prev_abs_r = std::abs(r);
    int stagnant = 0;
    bool stalled = false;
    while (it < iters) {
      // Gradient of the penalized objective (per dt): h_n + 2 P r W_n.
      Eigen::MatrixXd grad(n_steps, d_w);
      for (int n = 0; n < n_steps; ++n)
        grad.row(n) = h.values.row(n) + 2.0 * penalty * r * wd.w[n].transpose();
      const double gnorm2 = dt * grad.squaredNorm();
      if (gnorm2 < 1e-30) break;

      double s = 1.0;
      bool accepted = false;
      for (int bt = 0; bt < kMaxBacktracks; ++bt) {
        ControlPath trial = h;
        trial.values -= s * grad;
        const double tr = constraint(trial);
        const double tobj = objective(trial, tr);
        // Armijo decrease on the penalized objective.
        if (tobj <= obj - 1e-4 * s * gnorm2) {
          h = std::move(trial);
          r = tr;
          obj = tobj;
          accepted = true;
          break;
        }
        s *= 0.5;
      }
      ++it;
      if (!accepted) {
        stalled = true;
        break;
      }
      ++accepted_total;
      res.objective_log.push_back(obj);
      if (std::abs(r) > 0.999 * prev_abs_r) {
        if (++stagnant >= 5) break;  // constraint violation plateau
      } else {
        stagnant = 0;
      }
      prev_abs_r = std::min(prev_abs_r, std::abs(r));
      if (std::abs(r) <= 1e-9 * std::abs(x) && gnorm2 <= 1e-18) break;
    }
    if (stalled && accepted_total == 0) {
      throw stall_error("rate_gradient_descent: no accepted step; best objective " +
                        std::to_string(obj));
    }
    // Tighten the constraint; the objective is recomputed under the new
    // penalty, starting a new monotone phase.
    penalty *= 2.0;
    obj = objective(h, r);
  }

  res.optimizer = h;
  res.value = energy(h);
  res.residual = std::abs(r);
  res.iterations = it;
  return res;
}

}  // namespace spe
