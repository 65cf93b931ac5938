#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spe/dynamics.hpp"

using namespace spe;

namespace {

SolverConfig make_cfg(const DomainSpec& dom, double t_end, int n_steps, double eps = 0.0) {
  SolverConfig cfg;
  cfg.grid = TimeGrid(t_end, n_steps);
  cfg.domain = dom;
  cfg.eps = eps;
  return cfg;
}

double state_dist(const State& a, const State& b) {
  const State d = a - b;
  return std::sqrt(inner(d, d));
}

}  // namespace

TEST_CASE("step kernel: scalar recurrence, neutral mode, implicit decay") {
  const DomainSpec dom(1.0, 1.0, 2, 2);
  const double dt = 0.1;
  State y(dom);
  y.v().set_coeff(1, 1, 3.0);
  y.T().set_coeff(0, 0, 2.0);
  const State zero(dom);
  const State next = step(y, zero, zero, dt);
  CHECK(next.v().coeff(1, 1) == doctest::Approx(3.0 / (1.0 + dt * dom.lambda(1, 1))));
  CHECK(next.T().coeff(0, 0) == 2.0);  // zero eigenvalue: untouched

  // implicit-Euler decay converges to exp(-lambda T) at first order
  const double lam = dom.lambda(1, 1);
  double err_prev = -1.0;
  for (int n : {64, 128, 256}) {
    const double dtn = 1.0 / n;
    double c = 1.0;
    for (int i = 0; i < n; ++i) c /= 1.0 + dtn * lam;
    const double err = std::abs(c - std::exp(-lam));
    if (err_prev > 0.0) CHECK(err < 0.75 * err_prev);
    err_prev = err;
  }

  State bad(dom);
  bad.v().set_coeff(1, 1, std::numeric_limits<double>::quiet_NaN());
  CHECK_THROWS_AS(step(bad, zero, zero, dt), blowup_error);
}

TEST_CASE("deterministic solve: linear decay, x-independent heat modes, defect order") {
  SUBCASE("toggles off: exact per-mode decay") {
    const DomainSpec dom(1.0, 1.0, 3, 3);
    const Operators ops(dom);
    SolverConfig cfg = make_cfg(dom, 0.5, 50);
    cfg.toggles = {false, false};
    State y0(dom);
    y0.v().set_coeff(1, 2, 1.7);
    const Trajectory traj = simulate_deterministic(y0, cfg, ops);
    const double q = 1.0 / (1.0 + cfg.grid.dt() * dom.lambda(1, 2));
    for (int n = 0; n <= 50; n += 10) {
      CHECK(traj.state_at_step(n).v().coeff(1, 2) ==
            doctest::Approx(1.7 * std::pow(q, n)).epsilon(1e-12));
    }
  }

  SUBCASE("x-independent T state: both nonlinear paths vanish") {
    const DomainSpec dom(2.0, 1.0, 4, 4);
    const Operators ops(dom);
    const SolverConfig cfg = make_cfg(dom, 0.25, 40);  // full toggles
    State y0(dom);
    y0.T().set_coeff(0, 1, 1.0);
    y0.T().set_coeff(0, 3, -0.4);
    const Trajectory traj = simulate_deterministic(y0, cfg, ops);
    const double dt = cfg.grid.dt();
    for (int m : {1, 3}) {
      const double q = 1.0 / (1.0 + dt * dom.lambda(0, m));
      CHECK(traj.state_at_step(40).T().coeff(0, m) ==
            doctest::Approx(y0.T().coeff(0, m) * std::pow(q, 40)).epsilon(1e-12));
    }
    // nothing leaks into other modes
    CHECK(traj.state_at_step(40).v().coeffs().norm() < 1e-14);
  }

  SUBCASE("energy-identity defect halves under dt halving") {
    const DomainSpec dom(2.0 * kPi, 2.0 * kPi, 6, 6);
    const Operators ops(dom);
    std::mt19937_64 rng(19);
    State y0 = random_state(rng, dom, 1.0);
    y0 *= 1.0 / norms(y0).l2;  // O(1) data
    double prev = -1.0;
    for (int n : {50, 100, 200, 400}) {
      const Trajectory traj = simulate_deterministic(y0, make_cfg(dom, 0.5, n), ops);
      const double defect = std::abs(traj.total_defect());
      if (prev > 0.0) {
        const double ratio = prev / defect;
        CHECK(ratio > 1.7);
        CHECK(ratio < 2.3);
      }
      prev = defect;
    }
  }

  SUBCASE("sampling stride keeps first and last states") {
    const DomainSpec dom(1.0, 1.0, 2, 2);
    const Operators ops(dom);
    SolverConfig cfg = make_cfg(dom, 1.0, 45);
    cfg.record_every = 10;
    State y0(dom);
    y0.v().set_coeff(1, 1, 1.0);
    const Trajectory traj = simulate_deterministic(y0, cfg, ops);
    CHECK(traj.diag.size() == 46);
    REQUIRE(traj.samples.size() == 6);  // 0,10,20,30,40,45
    CHECK(traj.samples.back().first == doctest::Approx(1.0));
    CHECK_FALSE(traj.has_every_step());
    CHECK_THROWS_AS(traj.state_at_step(3), config_error);
  }
}

TEST_CASE("guards: blow-up and explicit-step stability") {
  const DomainSpec dom(1.0, 1.0, 2, 2);
  const Operators ops(dom);
  SUBCASE("blow-up guard") {
    SolverConfig cfg = make_cfg(dom, 1.0, 10);
    cfg.blowup_guard = 1e3;
    cfg.c_nl = 1e9;  // keep the stability guard out of the way
    State y0(dom);
    y0.v().set_coeff(1, 1, 5e3);
    cfg.toggles = {false, false};
    CHECK_THROWS_AS(simulate_deterministic(y0, cfg, ops), blowup_error);
  }
  SUBCASE("stability guard") {
    SolverConfig cfg = make_cfg(dom, 1.0, 10);
    cfg.c_nl = 1e-3;
    State y0(dom);
    y0.v().set_coeff(1, 1, 100.0);
    CHECK_THROWS_AS(simulate_deterministic(y0, cfg, ops), stability_error);
  }
}

TEST_CASE("stochastic solve degenerates to deterministic") {
  const DomainSpec dom(2.0, 1.0, 4, 4);
  const Operators ops(dom);
  std::mt19937_64 rng(23);
  const State y0 = random_state(rng, dom, 1.0);
  const NoiseSpec spec = NoiseSpec::make(NoiseKind::bounded_diagonal, dom, 4, {0.3}, 1.0);
  const WienerPath path = sample_path(5, 0, TimeGrid(0.5, 80), 4);

  const Trajectory det = simulate_deterministic(y0, make_cfg(dom, 0.5, 80), ops);

  SUBCASE("eps = 0") {
    const Trajectory st = simulate_stochastic(y0, make_cfg(dom, 0.5, 80, 0.0), ops, spec, path);
    for (int n = 0; n <= 80; n += 16)
      CHECK(state_dist(st.state_at_step(n), det.state_at_step(n)) == 0.0);
  }
  SUBCASE("all sigma zero") {
    const NoiseSpec mute = NoiseSpec::make(NoiseKind::bounded_diagonal, dom, 4, {0.0}, 1.0);
    const Trajectory st =
        simulate_stochastic(y0, make_cfg(dom, 0.5, 80, 1e-2), ops, mute, path);
    for (int n = 0; n <= 80; n += 16)
      CHECK(state_dist(st.state_at_step(n), det.state_at_step(n)) == 0.0);
  }
  SUBCASE("grid mismatch is rejected") {
    const WienerPath wrong = sample_path(5, 0, TimeGrid(0.5, 40), 4);
    CHECK_THROWS_AS(simulate_stochastic(y0, make_cfg(dom, 0.5, 80, 1e-2), ops, spec, wrong),
                    shape_error);
  }

  SUBCASE("every recorded state keeps an exact zero vertical v-mean") {
    const Trajectory st = simulate_stochastic(y0, make_cfg(dom, 0.5, 80, 1e-2), ops, spec, path);
    for (const auto& [t, y] : st.samples) CHECK(y.v().coeffs().col(0).norm() == 0.0);
  }
}

TEST_CASE("linearized solve: zero noise, exact linear oracle, OU variance") {
  SUBCASE("zero noise gives the zero process") {
    const DomainSpec dom(1.0, 1.0, 3, 3);
    const Operators ops(dom);
    std::mt19937_64 rng(29);
    const State y0 = random_state(rng, dom, 1.0);
    SolverConfig cfg = make_cfg(dom, 0.5, 50);
    const Trajectory base = simulate_deterministic(y0, cfg, ops);
    const NoiseSpec mute = NoiseSpec::make(NoiseKind::additive, dom, 3, {0.0});
    const WienerPath path = sample_path(1, 0, cfg.grid, 3);
    const Trajectory v = simulate_linearized(y0, cfg, ops, mute, path, base);
    CHECK(v.sup_l2() == 0.0);
  }

  SUBCASE("with B,G disabled the CLT difference vanishes pathwise") {
    const DomainSpec dom(1.5, 0.9, 4, 4);
    const Operators ops(dom);
    std::mt19937_64 rng(31);
    const State y0 = random_state(rng, dom, 1.0);
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::additive, dom, 6, {0.4});
    for (double eps : {1e-2, 1e-4}) {
      SolverConfig cfg = make_cfg(dom, 0.5, 100, eps);
      cfg.toggles = {false, false};
      const Trajectory base = simulate_deterministic(y0, cfg, ops);
      const WienerPath path = sample_path(17, 3, cfg.grid, 6);
      const Trajectory ye = simulate_stochastic(y0, cfg, ops, spec, path);
      const Trajectory v0 = simulate_linearized(y0, cfg, ops, spec, path, base);
      double sup = 0.0;
      for (int n = 0; n <= 100; ++n) {
        const State diff =
            (1.0 / std::sqrt(eps)) * (ye.state_at_step(n) - base.state_at_step(n)) -
            v0.state_at_step(n);
        sup = std::max(sup, std::sqrt(inner(diff, diff)));
      }
      CHECK(sup <= 1e-12);
    }
  }

  SUBCASE("single-mode OU variance matches the discrete and continuum values") {
    // eigenvalue 1 on the (1,1) v mode
    const double side = kPi * std::sqrt(2.0);
    const DomainSpec dom(side, side, 1, 1);
    const Operators ops(dom);
    const double sigma = 0.8, lam = dom.lambda(1, 1);
    CHECK(lam == doctest::Approx(1.0));
    SolverConfig cfg = make_cfg(dom, 1.0, 64);
    cfg.toggles = {false, false};
    const State y0(dom);  // Y0 = 0
    const Trajectory base = simulate_deterministic(y0, cfg, ops);
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::additive, dom, 1, {sigma});

    const int n_paths = 400;
    double sum = 0.0, sum_sq = 0.0;
    for (int p = 0; p < n_paths; ++p) {
      const WienerPath path = sample_path(99, p, cfg.grid, 1);
      const Trajectory v = simulate_linearized(y0, cfg, ops, spec, path, base);
      const double c = v.state_at_step(64).v().coeff(1, 1);
      sum += c;
      sum_sq += c * c;
    }
    const double var = (sum_sq - sum * sum / n_paths) / (n_paths - 1);

    const double dt = cfg.grid.dt();
    const double q = 1.0 / (1.0 + dt * lam);
    // exact discrete variance: sigma^2 dt sum_{j=1..N} q^{2j}
    const double var_discrete =
        sigma * sigma * dt * q * q * (1.0 - std::pow(q, 128)) / (1.0 - q * q);
    const double var_analytic = sigma * sigma * (1.0 - std::exp(-2.0 * lam)) / (2.0 * lam);

    const double mc_tol = 3.0 * std::sqrt(2.0 / n_paths);  // CLT band for a variance
    CHECK(std::abs(var - var_discrete) <= mc_tol * var_discrete);
    CHECK(std::abs(var_discrete - var_analytic) <= 3.0 * dt * var_analytic);
  }
}

TEST_CASE("skeleton solve: zero control, joint linearity, growing energy family") {
  const DomainSpec dom(2.0, 1.0, 4, 4);
  const Operators ops(dom);
  std::mt19937_64 rng(37);
  State y0 = random_state(rng, dom, 1.0);
  SolverConfig cfg = make_cfg(dom, 0.5, 60);
  const Trajectory base = simulate_deterministic(y0, cfg, ops);
  const NoiseSpec spec = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.7});

  ControlPath h0(cfg.grid, 4);
  const Trajectory r0 = solve_skeleton(h0, cfg, ops, spec, base);
  CHECK(r0.sup_l2() == 0.0);

  ControlPath h(cfg.grid, 4);
  for (int n = 0; n < 60; ++n)
    for (int j = 0; j < 4; ++j) h.values(n, j) = standard_normal(rng);
  const Trajectory r = solve_skeleton(h, cfg, ops, spec, base);
  ControlPath h3 = h;
  h3.values *= 3.0;
  const Trajectory r3 = solve_skeleton(h3, cfg, ops, spec, base);
  double sup_rel = 0.0;
  for (int n = 0; n <= 60; ++n) {
    const State d = r3.state_at_step(n) - 3.0 * r.state_at_step(n);
    sup_rel = std::max(sup_rel, std::sqrt(inner(d, d)));
  }
  CHECK(sup_rel <= 1e-12 * (1.0 + 3.0 * r.sup_l2()));

  // scaled family: alpha h has energy alpha^2 E; sup ||R||^2 nondecreasing
  double prev_sup = -1.0, prev_int = -1.0;
  for (double alpha : {1.0, 2.0, 4.0}) {
    ControlPath ha = h;
    ha.values *= alpha;
    const Trajectory ra = solve_skeleton(ha, cfg, ops, spec, base);
    const double s = ra.sup_h1_sq(), ia = ra.int_a_sq();
    CHECK(std::isfinite(s));
    CHECK(std::isfinite(ia));
    CHECK(s >= prev_sup);
    CHECK(ia >= prev_int);
    prev_sup = s;
    prev_int = ia;
  }
}

TEST_CASE("controlled solve: degenerate cases and linear decomposition") {
  const DomainSpec dom(2.0, 1.0, 4, 4);
  const Operators ops(dom);
  std::mt19937_64 rng(41);
  State y0 = random_state(rng, dom, 1.0);
  SolverConfig cfg = make_cfg(dom, 0.5, 60, 1e-2);
  const Trajectory base = simulate_deterministic(y0, cfg, ops);
  const NoiseSpec spec = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.6});
  const WienerPath path = sample_path(43, 11, cfg.grid, 4);

  SUBCASE("h=0, sigma=0 gives the zero process") {
    const NoiseSpec mute = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.0});
    const ControlPath h0(cfg.grid, 4);
    const Trajectory z = simulate_controlled(h0, cfg, ops, mute, path, base);
    CHECK(z.sup_l2() == 0.0);
  }

  SUBCASE("eps = 0 is a configuration error pointing to the skeleton") {
    SolverConfig c0 = cfg;
    c0.eps = 0.0;
    const ControlPath h0(cfg.grid, 4);
    CHECK_THROWS_WITH_AS(simulate_controlled(h0, c0, ops, spec, path, base),
                         doctest::Contains("solve_skeleton"), config_error);
  }

  SUBCASE("with B disabled, Zbar - R is exactly the scaled stochastic convolution") {
    SolverConfig clin = cfg;
    clin.toggles.enable_B = false;
    const Trajectory base_lin = simulate_deterministic(y0, clin, ops);
    ControlPath h(cfg.grid, 4);
    for (int n = 0; n < 60; ++n)
      for (int j = 0; j < 4; ++j) h.values(n, j) = 0.5 * standard_normal(rng);
    const Trajectory r = solve_skeleton(h, clin, ops, spec, base_lin);
    // driftless convolution: dS + A S + G(S) = psi dW, S(0)=0, via the
    // linearized solver around the same base (additive psi ignores it)
    const Trajectory s = simulate_linearized(y0, clin, ops, spec, path, base_lin);
    const double lam_inv = 1.0 / clin.lambda_of_eps();
    for (double eps : {1e-2, 1e-4}) {
      SolverConfig ce = clin;
      ce.eps = eps;
      const double li = 1.0 / ce.lambda_of_eps();
      const Trajectory z = simulate_controlled(h, ce, ops, spec, path, base_lin);
      double sup_err = 0.0, sup_conv = 0.0;
      for (int n = 0; n <= 60; ++n) {
        const State d = z.state_at_step(n) - r.state_at_step(n) - li * s.state_at_step(n);
        sup_err = std::max(sup_err, std::sqrt(inner(d, d)));
        sup_conv = std::max(sup_conv, std::sqrt(inner(s.state_at_step(n), s.state_at_step(n))));
      }
      CHECK(sup_err <= 1e-11 * (1.0 + sup_conv));
      // and the advertised inequality
      double sup_dist = 0.0;
      for (int n = 0; n <= 60; ++n)
        sup_dist = std::max(sup_dist, state_dist(z.state_at_step(n), r.state_at_step(n)));
      CHECK(sup_dist <= li * sup_conv * (1.0 + 1e-9));
    }
    (void)lam_inv;
  }
}
