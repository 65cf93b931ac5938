#include "spe/dynamics.hpp"

#include <cmath>

namespace spe {

const State& Trajectory::state_at_step(int n) const {
  if (!has_every_step())
    throw config_error("Trajectory: per-step states required (record_every must be 1)");
  return samples.at(static_cast<std::size_t>(n)).second;
}

double Trajectory::sup_l2() const {
  double s = 0.0;
  for (const auto& d : diag) s = std::max(s, d.l2);
  return s;
}

double Trajectory::sup_dz_l2() const {
  double s = 0.0;
  for (const auto& d : diag) s = std::max(s, d.dz_l2);
  return s;
}

double Trajectory::sup_h1_sq() const {
  double s = 0.0;
  for (const auto& d : diag) s = std::max(s, d.h1 * d.h1);
  return s;
}

namespace {
template <class F>
double left_riemann(const std::vector<StepDiag>& diag, double dt, F&& f) {
  double s = 0.0;
  for (std::size_t n = 0; n + 1 < diag.size(); ++n) s += f(diag[n]);
  return s * dt;
}
}  // namespace

double Trajectory::int_h1_sq() const {
  return left_riemann(diag, cfg.grid.dt(), [](const StepDiag& d) { return d.h1 * d.h1; });
}

double Trajectory::int_a_sq() const {
  return left_riemann(diag, cfg.grid.dt(), [](const StepDiag& d) { return d.a_l2 * d.a_l2; });
}

double Trajectory::int_dz_mixed() const {
  return left_riemann(diag, cfg.grid.dt(),
                      [](const StepDiag& d) { return d.dz_l2 * d.dz_l2 * d.dz_h1 * d.dz_h1; });
}

double Trajectory::total_defect() const {
  double s = 0.0;
  for (std::size_t n = 1; n < diag.size(); ++n) s += diag[n].defect;
  return s * cfg.grid.dt();
}

std::array<double, 4> Trajectory::moment_diagnostics() const {
  const double sl = sup_l2(), sdz = sup_dz_l2();
  return {sl * sl * sl * sl, int_h1_sq(), sdz * sdz * sdz * sdz, int_dz_mixed()};
}

State step(const State& y, const State& forcing, const State& stochastic_term, double dt) {
  y.require_same_domain(forcing);
  y.require_same_domain(stochastic_term);
  if (!y.all_finite() || !forcing.all_finite() || !stochastic_term.all_finite())
    throw blowup_error("step: non-finite input");
  const DomainSpec& dom = y.domain();
  State out(dom, y.time() + dt);
  for (int k = 0; k <= dom.Nx; ++k) {
    for (int m = 0; m <= dom.Nz; ++m) {
      const double denom = 1.0 + dt * dom.lambda(k, m);
      out.v().coeffs()(k, m) =
          (y.v().coeffs()(k, m) - dt * forcing.v().coeffs()(k, m) + stochastic_term.v().coeffs()(k, m)) /
          denom;
      out.T().coeffs()(k, m) =
          (y.T().coeffs()(k, m) - dt * forcing.T().coeffs()(k, m) + stochastic_term.T().coeffs()(k, m)) /
          denom;
    }
  }
  return out;
}

namespace {

StepDiag make_diag(double t, const State& y, double defect = 0.0) {
  const StateDiag d = diag_norms(y);
  return StepDiag{t, d.l2, d.h1, d.dz_l2, d.dz_h1, d.a_l2, defect};
}

// Generic driver shared by all five equations.  ForcingFn(n, t, Y) gives
// the explicit part; NoiseFn(n, t, Y) the additive term of the solve.
// DefectFn computes the recorded energy-identity defect rate, or is null.
template <class ForcingFn, class NoiseFn, class DefectFn>
Trajectory run_scheme(const State& y0, const SolverConfig& cfg, ForcingFn&& forcing_fn,
                      NoiseFn&& noise_fn, DefectFn&& defect_fn, const StepObserver& obs) {
  cfg.validate();
  if (y0.domain() != cfg.domain) throw shape_error("simulate: y0 domain mismatch");
  if (!y0.all_finite()) throw blowup_error("simulate: non-finite initial state");

  const double dt = cfg.grid.dt();
  Trajectory traj;
  traj.cfg = cfg;
  traj.diag.reserve(cfg.grid.n_steps + 1);

  State y = y0;
  y.set_time(0.0);
  traj.diag.push_back(make_diag(0.0, y));
  if (traj.diag.back().l2 > cfg.blowup_guard)
    throw blowup_error("simulate: |Y0| exceeds the blow-up guard");
  traj.samples.emplace_back(0.0, y);
  if (obs) obs(0, 0.0, y);

  for (int n = 0; n < cfg.grid.n_steps; ++n) {
    const double t = n * dt;
    const double h1 = traj.diag.back().h1;
    if (dt > cfg.c_nl / (1.0 + h1))
      throw stability_error("simulate: dt exceeds c_nl/(1+||Y||) at step " + std::to_string(n));

    const State f = forcing_fn(n, t, y);
    const State s = noise_fn(n, t, y);
    State y_next = step(y, f, s, dt);

    if (!y_next.all_finite()) throw blowup_error("simulate: non-finite state at step " + std::to_string(n + 1));
    const double defect = defect_fn ? defect_fn(y, y_next) : 0.0;
    StepDiag d = make_diag((n + 1) * dt, y_next, defect);
    if (d.l2 > cfg.blowup_guard)
      throw blowup_error("simulate: |Y| exceeded blow-up guard at step " + std::to_string(n + 1));
    traj.diag.push_back(d);

    y = std::move(y_next);
    if ((n + 1) % cfg.record_every == 0 || n + 1 == cfg.grid.n_steps) {
      if (traj.samples.back().first != (n + 1) * dt) traj.samples.emplace_back((n + 1) * dt, y);
    }
    if (obs) obs(n + 1, (n + 1) * dt, y);
  }
  return traj;
}

using DefectFn = std::function<double(const State&, const State&)>;

}  // namespace

Trajectory simulate_deterministic(const State& y0, const SolverConfig& cfg, const Operators& ops,
                                  const StepObserver& obs) {
  const double dt = cfg.grid.dt();
  const State zero(cfg.domain);
  // Defect rate of d(|Y|^2)/dt + 2||Y||^2 + 2(G(Y),Y) per step.
  DefectFn defect = [&](const State& y, const State& y_next) {
    const StateNorms na = norms(y), nb = norms(y_next);
    double gterm = 0.0;
    if (cfg.toggles.enable_G) gterm = inner(ops.apply_G(y_next), y_next);
    return (nb.l2 * nb.l2 - na.l2 * na.l2) / dt + 2.0 * nb.h1 * nb.h1 + 2.0 * gterm;
  };
  return run_scheme(
      y0, cfg, [&](int, double, const State& y) { return ops.forcing(y, cfg.toggles); },
      [&](int, double, const State&) { return zero; }, defect, obs);
}

Trajectory simulate_stochastic(const State& y0, const SolverConfig& cfg, const Operators& ops,
                               const NoiseSpec& spec, const WienerPath& path,
                               const StepObserver& obs) {
  if (path.grid != cfg.grid) throw shape_error("simulate_stochastic: Wiener path grid mismatch");
  if (cfg.eps == 0.0) {
    // Degenerate scaling: identical to the deterministic solve.
    return simulate_deterministic(y0, cfg, ops, obs);
  }
  const double root_eps = std::sqrt(cfg.eps);
  return run_scheme(
      y0, cfg, [&](int, double, const State& y) { return ops.forcing(y, cfg.toggles); },
      [&](int n, double t, const State& y) {
        return root_eps * spec.apply(t, y, path.increments.row(n).transpose());
      },
      DefectFn{}, obs);
}

namespace {

void check_base(const Trajectory& base, const SolverConfig& cfg, const State* y0) {
  if (base.cfg.grid != cfg.grid) throw shape_error("base trajectory grid mismatch");
  if (base.cfg.domain != cfg.domain) throw shape_error("base trajectory domain mismatch");
  if (!base.has_every_step())
    throw config_error("base trajectory must be recorded with record_every = 1");
  if (y0 != nullptr) {
    const State d = base.state_at_step(0) - *y0;
    if (inner(d, d) != 0.0)
      throw config_error("base trajectory initial state differs from y0");
  }
}

}  // namespace

Trajectory simulate_linearized(const State& y0, const SolverConfig& cfg, const Operators& ops,
                               const NoiseSpec& spec, const WienerPath& path,
                               const Trajectory& base, const StepObserver& obs) {
  if (path.grid != cfg.grid) throw shape_error("simulate_linearized: Wiener path grid mismatch");
  check_base(base, cfg, &y0);
  State v0(cfg.domain);
  return run_scheme(
      v0, cfg,
      [&](int n, double, const State& v) {
        const State& yb = base.state_at_step(n);
        State f(cfg.domain);
        if (cfg.toggles.enable_B) f += ops.apply_B(yb, v) + ops.apply_B(v, yb);
        if (cfg.toggles.enable_G) f += ops.apply_G(v);
        return f;
      },
      [&](int n, double t, const State&) {
        return spec.apply(t, base.state_at_step(n), path.increments.row(n).transpose());
      },
      DefectFn{}, obs);
}

Trajectory solve_skeleton(const ControlPath& h, const SolverConfig& cfg, const Operators& ops,
                          const NoiseSpec& spec, const Trajectory& base, const StepObserver& obs) {
  if (h.grid != cfg.grid) throw shape_error("solve_skeleton: control grid mismatch");
  if (h.values.cols() != spec.d_w()) throw shape_error("solve_skeleton: control width != d_W");
  check_base(base, cfg, nullptr);
  const double dt = cfg.grid.dt();
  State r0(cfg.domain);
  return run_scheme(
      r0, cfg,
      [&](int n, double, const State& r) {
        const State& yb = base.state_at_step(n);
        State f(cfg.domain);
        if (cfg.toggles.enable_B) f += ops.apply_B(r, yb) + ops.apply_B(yb, r);
        if (cfg.toggles.enable_G) f += ops.apply_G(r);
        return f;
      },
      [&](int n, double t, const State&) {
        return dt * spec.apply(t, base.state_at_step(n), h.values.row(n).transpose());
      },
      DefectFn{}, obs);
}

Trajectory simulate_controlled(const ControlPath& h, const SolverConfig& cfg, const Operators& ops,
                               const NoiseSpec& spec, const WienerPath& path,
                               const Trajectory& base, const StepObserver& obs) {
  if (!(cfg.eps > 0.0))
    throw config_error("simulate_controlled: eps = 0 has no deviation scale; use solve_skeleton");
  if (path.grid != cfg.grid) throw shape_error("simulate_controlled: Wiener path grid mismatch");
  if (h.grid != cfg.grid) throw shape_error("simulate_controlled: control grid mismatch");
  if (h.values.cols() != spec.d_w()) throw shape_error("simulate_controlled: control width != d_W");
  check_base(base, cfg, nullptr);

  const double dt = cfg.grid.dt();
  const double lam = cfg.lambda_of_eps();
  const double amp = std::sqrt(cfg.eps) * lam;  // sqrt(eps) lambda(eps) -> 0
  State z0(cfg.domain);
  return run_scheme(
      z0, cfg,
      [&](int n, double, const State& z) {
        const State& yb = base.state_at_step(n);
        State f(cfg.domain);
        if (cfg.toggles.enable_B) f += ops.apply_B(z, yb + amp * z) + ops.apply_B(yb, z);
        if (cfg.toggles.enable_G) f += ops.apply_G(z);
        return f;
      },
      [&](int n, double t, const State& z) {
        const State arg = base.state_at_step(n) + amp * z;
        const Eigen::VectorXd u =
            path.increments.row(n).transpose() / lam + dt * h.values.row(n).transpose();
        return spec.apply(t, arg, u);
      },
      DefectFn{}, obs);
}

}  // namespace spe
