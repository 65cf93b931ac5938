#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "spe/experiments.hpp"

using namespace spe;

namespace {

SolverConfig small_cfg(const DomainSpec& dom, int n_steps = 100) {
  SolverConfig cfg;
  cfg.grid = TimeGrid(1.0, n_steps);
  cfg.domain = dom;
  return cfg;
}

State smooth_state(const DomainSpec& dom) {
  State y0(dom);
  y0.v().set_coeff(1, 1, 1.0);
  y0.T().set_coeff(1, 1, 0.5);
  y0.T().set_coeff(0, 1, 0.3);
  return y0;
}

}  // namespace

TEST_CASE("fit_slope: exact lines, power laws, noisy recovery") {
  const SlopeFit unit = fit_slope({{0.0, 0.0}, {1.0, 1.0}});
  CHECK(unit.slope == doctest::Approx(1.0));
  CHECK(unit.intercept == doctest::Approx(0.0));
  CHECK(unit.r2 == doctest::Approx(1.0));

  // exact cubic sampled in log-log
  std::vector<std::pair<double, double>> pts;
  for (double x : {0.5, 1.0, 2.0, 4.0}) pts.push_back({std::log(x), std::log(x * x * x)});
  CHECK(fit_slope(pts).slope == doctest::Approx(3.0));

  std::mt19937_64 rng(3);
  pts.clear();
  for (int i = 0; i < 20; ++i) {
    const double x = i * 0.2;
    pts.push_back({x, x + 0.05 * standard_normal(rng)});
  }
  const SlopeFit noisy = fit_slope(pts);
  CHECK(noisy.slope > 0.9);
  CHECK(noisy.slope < 1.1);

  CHECK_THROWS_AS(fit_slope({{1.0, 2.0}}), config_error);
  CHECK_THROWS_AS(fit_slope({{1.0, 2.0}, {1.0, 3.0}}), config_error);
}

TEST_CASE("student t quantiles match tabulated values") {
  CHECK(student_t_975(1) == doctest::Approx(12.7062).epsilon(1e-4));
  CHECK(student_t_975(5) == doctest::Approx(2.5706).epsilon(1e-4));
  CHECK(student_t_975(15) == doctest::Approx(2.1314).epsilon(1e-4));
  CHECK(student_t_975(63) == doctest::Approx(1.9983).epsilon(1e-4));
  CHECK(student_t_975(1000) == doctest::Approx(1.9623).epsilon(1e-4));
}

TEST_CASE("CI-adjusted monotonicity rules") {
  auto row = [](double mean, double ci) {
    EstimatorRow r;
    r.mean = mean;
    r.ci_half = ci;
    return r;
  };
  CHECK(ci_adjusted_decreasing({row(1.0, 0.1), row(0.5, 0.1), row(0.2, 0.1)}));
  // overlapping bump is tolerated
  CHECK(ci_adjusted_decreasing({row(1.0, 0.3), row(1.1, 0.3), row(0.2, 0.1)}));
  // disjoint increase is not
  CHECK_FALSE(ci_adjusted_decreasing({row(1.0, 0.1), row(2.0, 0.1)}));

  CHECK(strictly_decreasing_with_separation({row(1.0, 0.1), row(0.6, 0.1), row(0.3, 0.1)}));
  CHECK_FALSE(strictly_decreasing_with_separation({row(1.0, 0.4), row(0.9, 0.4), row(0.3, 0.4)}));
}

TEST_CASE("strong convergence campaign") {
  const DomainSpec dom(2.0 * kPi, 2.0 * kPi, 4, 4);
  const State y0 = smooth_state(dom);
  CampaignConfig camp;
  camp.eps_list = {1e-1, 1e-2, 1e-3};
  camp.n_paths = 8;
  camp.master_seed = 2024;
  camp.config_digest = "test";

  SUBCASE("zero noise: zero estimators and a skipped regression") {
    const NoiseSpec mute = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.0});
    const ExperimentReport rep = run_strong_convergence(camp, small_cfg(dom), mute, y0);
    for (const EstimatorRow& r : rep.rows) CHECK(r.mean == 0.0);
    CHECK(rep.fit.skipped);
  }

  SUBCASE("linear model: estimator/eps is constant to round-off") {
    SolverConfig cfg = small_cfg(dom);
    cfg.toggles = {false, false};
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.3});
    const ExperimentReport rep = run_strong_convergence(camp, cfg, spec, y0);
    REQUIRE(rep.rows.size() == 3);
    const double c0 = rep.rows[0].mean / rep.rows[0].eps;
    for (const EstimatorRow& r : rep.rows)
      CHECK(r.mean / r.eps == doctest::Approx(c0).epsilon(1e-10));
    CHECK(rep.fit.slope == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.fit.r2 == doctest::Approx(1.0));
  }

  SUBCASE("full model: slope near one, moment diagnostics bounded") {
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::bounded_diagonal, dom, 4, {0.1}, 1.0);
    const ExperimentReport rep = run_strong_convergence(camp, small_cfg(dom), spec, y0);
    CHECK_FALSE(rep.fit.skipped);
    CHECK(rep.fit.slope > 0.8);
    CHECK(rep.fit.slope < 1.2);
    CHECK(rep.fit.r2 > 0.99);
    for (int i = 0; i < 4; ++i) {
      double lo = 1e300, hi = 0.0;
      for (const EstimatorRow& r : rep.rows) {
        CHECK(std::isfinite(r.moment_means[i]));
        lo = std::min(lo, r.moment_means[i]);
        hi = std::max(hi, r.moment_means[i]);
      }
      CHECK(hi <= 10.0 * lo);
    }
  }

  SUBCASE("sup|Y_eps| stays uniformly bounded in eps") {
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::bounded_diagonal, dom, 4, {0.1}, 1.0);
    const Operators ops(dom);
    const int n_paths = 16;
    std::array<double, 2> mean{0.0, 0.0}, var{0.0, 0.0};
    const std::array<double, 2> eps{1e-2, 1e-3};
    for (int e = 0; e < 2; ++e) {
      std::vector<double> sups(n_paths);
      for (int p = 0; p < n_paths; ++p) {
        SolverConfig cfg = small_cfg(dom);
        cfg.eps = eps[e];
        const WienerPath path = sample_path(2024, p, cfg.grid, 4);
        sups[p] = simulate_stochastic(y0, cfg, ops, spec, path).sup_l2();
      }
      for (double s : sups) mean[e] += s / n_paths;
      for (double s : sups) var[e] += (s - mean[e]) * (s - mean[e]) / (n_paths - 1);
    }
    CHECK(std::isfinite(mean[0]));
    const double sd = std::sqrt(std::max(var[0], var[1]));
    CHECK(std::abs(mean[0] - mean[1]) <= 3.0 * std::max(sd, 1e-6));
  }

  SUBCASE("worker count does not change the report") {
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::bounded_diagonal, dom, 4, {0.1}, 1.0);
    CampaignConfig c1 = camp;
    c1.threads = 1;
    CampaignConfig c2 = camp;
    c2.threads = 2;
    const ExperimentReport r1 = run_strong_convergence(c1, small_cfg(dom), spec, y0);
    const ExperimentReport r2 = run_strong_convergence(c2, small_cfg(dom), spec, y0);
    REQUIRE(r1.rows.size() == r2.rows.size());
    for (std::size_t i = 0; i < r1.rows.size(); ++i) {
      CHECK(r1.rows[i].mean == r2.rows[i].mean);
      CHECK(r1.rows[i].sigma == r2.rows[i].sigma);
    }
  }

  SUBCASE("eps list validation") {
    CampaignConfig bad = camp;
    bad.eps_list = {1e-3, 1e-2};
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.1});
    CHECK_THROWS_AS(run_strong_convergence(bad, small_cfg(dom), spec, y0), config_error);
    bad.eps_list = {};
    CHECK_THROWS_AS(run_strong_convergence(bad, small_cfg(dom), spec, y0), config_error);
  }
}

TEST_CASE("CLT campaign") {
  const DomainSpec dom(2.0 * kPi, 2.0 * kPi, 4, 4);
  const State y0 = smooth_state(dom);
  CampaignConfig camp;
  camp.eps_list = {1e-2, 1e-3, 1e-4};
  camp.n_paths = 8;
  camp.master_seed = 515;
  camp.config_digest = "test";

  SUBCASE("exact linear oracle: estimator at round-off") {
    SolverConfig cfg = small_cfg(dom);
    cfg.toggles = {false, false};
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.3});
    const ExperimentReport rep = run_clt_verification(camp, cfg, spec, y0);
    for (const EstimatorRow& r : rep.rows) CHECK(r.mean <= 1e-20);
  }

  SUBCASE("full model: estimator decreases, quartic diagnostic bounded") {
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::bounded_diagonal, dom, 4, {0.1}, 1.0);
    const ExperimentReport rep = run_clt_verification(camp, small_cfg(dom), spec, y0);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].mean > rep.rows[1].mean);
    CHECK(rep.rows[1].mean > rep.rows[2].mean);
    double lo = 1e300, hi = 0.0;
    for (const EstimatorRow& r : rep.rows) {
      CHECK(std::isfinite(r.aux_mean));
      lo = std::min(lo, r.aux_mean);
      hi = std::max(hi, r.aux_mean);
    }
    CHECK(hi <= 10.0 * lo);  // uniform-in-eps quartic moment bound
  }
}

TEST_CASE("MDP campaign") {
  const DomainSpec dom(2.0 * kPi, 2.0 * kPi, 4, 4);
  const State y0 = smooth_state(dom);
  CampaignConfig camp;
  camp.eps_list = {1e-2, 1e-3, 1e-4};
  camp.n_paths = 4;
  camp.master_seed = 907;
  camp.config_digest = "test";
  SolverConfig cfg = small_cfg(dom);
  cfg.lambda_exponent = 0.25;

  ControlPath h(cfg.grid, 4);
  h.values.setConstant(1.0);  // energy = 0.5 * T * d_W = 2

  SUBCASE("zero control, zero noise") {
    const NoiseSpec mute = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.0});
    CampaignConfig c2 = camp;
    c2.n_paths = 2;
    const ControlPath h0(cfg.grid, 4);
    const ExperimentReport rep = run_mdp_convergence(h0, c2, cfg, mute, y0);
    for (const EstimatorRow& r : rep.rows) CHECK(r.mean == 0.0);
    CHECK(rep.fit.skipped);
  }

  SUBCASE("with B disabled the estimator scales exactly like eps^(2a)") {
    SolverConfig clin = cfg;
    clin.toggles.enable_B = false;
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.4});
    const ExperimentReport rep = run_mdp_convergence(h, camp, clin, spec, y0);
    CHECK(rep.fit.slope == doctest::Approx(0.5).epsilon(1e-9));
    CHECK(rep.fit.r2 == doctest::Approx(1.0));
  }

  SUBCASE("full model: decreasing in eps") {
    const NoiseSpec spec = NoiseSpec::make(NoiseKind::additive, dom, 4, {0.4});
    const ExperimentReport rep = run_mdp_convergence(h, camp, cfg, spec, y0);
    REQUIRE(rep.rows.size() == 3);
    CHECK(rep.rows[0].mean > rep.rows[1].mean);
    CHECK(rep.rows[1].mean > rep.rows[2].mean);
    // aux carries the non-squared sup distance
    CHECK(rep.rows[0].aux_mean > rep.rows[2].aux_mean);
  }
}
