#include "spe/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace spe {

namespace {

// Regularized incomplete beta via the standard continued fraction.
double betacf(double a, double b, double x) {
  const int kMaxIter = 300;
  const double eps = 3e-14, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

double ibeta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log1p(-x);
  const double front = std::exp(ln);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, int df) {
  const double x = df / (df + t * t);
  const double p = 0.5 * ibeta(df / 2.0, 0.5, x);
  return t >= 0.0 ? 1.0 - p : p;
}

}  // namespace

double student_t_975(int df) {
  if (df < 1) throw config_error("student_t_975: df must be >= 1");
  double lo = 0.0, hi = 700.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (student_t_cdf(mid, df) < 0.975)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 2) throw config_error("fit_slope: need at least two points");
  double sx = 0.0, sy = 0.0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
  }
  const double n = static_cast<double>(points.size());
  const double mx = sx / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
    syy += (y - my) * (y - my);
  }
  if (sxx == 0.0) throw config_error("fit_slope: degenerate abscissae");
  SlopeFit fit;
  fit.skipped = false;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

bool ci_adjusted_decreasing(const std::vector<EstimatorRow>& rows) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = i + 1; j < rows.size(); ++j) {
      // rows are ordered by decreasing eps; a later row sitting strictly
      // above an earlier one violates monotone decay.
      if (rows[j].mean - rows[j].ci_half > rows[i].mean + rows[i].ci_half) return false;
    }
  }
  return true;
}

bool strictly_decreasing_with_separation(const std::vector<EstimatorRow>& rows) {
  if (rows.size() < 2) return false;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (!(rows[i + 1].mean < rows[i].mean)) return false;
  }
  const EstimatorRow& first = rows.front();
  const EstimatorRow& last = rows.back();
  return last.mean + last.ci_half < first.mean - first.ci_half;
}

namespace {

struct PathStats {
  double estimator = 0.0;
  double aux = 0.0;
  std::array<double, 4> moments{0.0, 0.0, 0.0, 0.0};
};

void validate_campaign(const CampaignConfig& camp) {
  if (camp.eps_list.empty()) throw config_error("campaign: eps list must be nonempty");
  for (std::size_t i = 0; i + 1 < camp.eps_list.size(); ++i)
    if (!(camp.eps_list[i + 1] < camp.eps_list[i]))
      throw config_error("campaign: eps list must be strictly decreasing");
  if (camp.n_paths < 2) throw config_error("campaign: n_paths must be >= 2 for sample sigma");
}

// Runs fn(path_index) over all paths on a small worker pool; results are
// reduced afterwards in path-index order so reports are deterministic in
// the worker count.
template <class Fn>
void parallel_paths(int n_paths, int threads, Fn&& fn) {
  int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  if (workers < 1) workers = 1;
  workers = std::min(workers, n_paths);
  if (workers == 1) {
    for (int p = 0; p < n_paths; ++p) fn(p);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr first_error;
  std::mutex err_mutex;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const int p = next.fetch_add(1);
        if (p >= n_paths) return;
        try {
          fn(p);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

EstimatorRow reduce_rows(double eps, const std::vector<PathStats>& stats) {
  EstimatorRow row;
  row.eps = eps;
  row.n_paths = static_cast<int>(stats.size());
  double sum = 0.0, aux = 0.0;
  std::array<double, 4> mom{0.0, 0.0, 0.0, 0.0};
  for (const PathStats& s : stats) {
    sum += s.estimator;
    aux += s.aux;
    for (int i = 0; i < 4; ++i) mom[i] += s.moments[i];
  }
  const double n = static_cast<double>(stats.size());
  row.mean = sum / n;
  row.aux_mean = aux / n;
  for (int i = 0; i < 4; ++i) row.moment_means[i] = mom[i] / n;
  double ss = 0.0;
  for (const PathStats& s : stats) ss += (s.estimator - row.mean) * (s.estimator - row.mean);
  row.sigma = std::sqrt(ss / (n - 1.0));
  row.ci_half = student_t_975(row.n_paths - 1) * row.sigma / std::sqrt(n);
  return row;
}

SlopeFit fit_or_skip(const std::vector<EstimatorRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const EstimatorRow& r : rows) {
    if (!(r.mean > 0.0)) return SlopeFit{};  // skipped
    pts.push_back({std::log(r.eps), std::log(r.mean)});
  }
  if (pts.size() < 2) return SlopeFit{};
  return fit_slope(pts);
}

// Difference diagnostics accumulated while stepping: discrete sup of
// |D_n|^2 and left-Riemann sum of ||D_n||^2.
struct DiffAccumulator {
  double sup_sq = 0.0;
  double int_h1 = 0.0;
  double sup_abs = 0.0;
  void add(const State& d, double dt, bool last) {
    const StateNorms n = norms(d);
    sup_sq = std::max(sup_sq, n.l2 * n.l2);
    sup_abs = std::max(sup_abs, n.l2);
    if (!last) int_h1 += dt * n.h1 * n.h1;
  }
  double estimator() const { return sup_sq + int_h1; }
};

}  // namespace

ExperimentReport run_strong_convergence(const CampaignConfig& camp, const SolverConfig& cfg,
                                        const NoiseSpec& spec, const State& y0) {
  validate_campaign(camp);
  SolverConfig base_cfg = cfg;
  base_cfg.record_every = 1;
  const Operators ops(cfg.domain);
  const Trajectory base = simulate_deterministic(y0, base_cfg, ops);
  const double dt = cfg.grid.dt();
  const int n_steps = cfg.grid.n_steps;

  ExperimentReport rep;
  rep.master_seed = camp.master_seed;
  rep.config_digest = camp.config_digest;
  for (double eps : camp.eps_list) {
    SolverConfig run_cfg = cfg;
    run_cfg.eps = eps;
    std::vector<PathStats> stats(camp.n_paths);
    parallel_paths(camp.n_paths, camp.threads, [&](int p) {
      const WienerPath path = sample_path(camp.master_seed, p, cfg.grid, spec.d_w());
      DiffAccumulator acc;
      const Trajectory traj = simulate_stochastic(
          y0, run_cfg, ops, spec, path, [&](int n, double, const State& y) {
            acc.add(y - base.state_at_step(n), dt, n == n_steps);
          });
      stats[p].estimator = acc.estimator();
      stats[p].moments = traj.moment_diagnostics();
    });
    rep.rows.push_back(reduce_rows(eps, stats));
  }
  rep.fit = fit_or_skip(rep.rows);
  return rep;
}

ExperimentReport run_clt_verification(const CampaignConfig& camp, const SolverConfig& cfg,
                                      const NoiseSpec& spec, const State& y0) {
  validate_campaign(camp);
  SolverConfig base_cfg = cfg;
  base_cfg.record_every = 1;
  const Operators ops(cfg.domain);
  const Trajectory base = simulate_deterministic(y0, base_cfg, ops);
  const double dt = cfg.grid.dt();
  const int n_steps = cfg.grid.n_steps;

  ExperimentReport rep;
  rep.master_seed = camp.master_seed;
  rep.config_digest = camp.config_digest;
  for (double eps : camp.eps_list) {
    SolverConfig run_cfg = cfg;
    run_cfg.eps = eps;
    const double root_eps = std::sqrt(eps);
    std::vector<PathStats> stats(camp.n_paths);
    parallel_paths(camp.n_paths, camp.threads, [&](int p) {
      const WienerPath path = sample_path(camp.master_seed, p, cfg.grid, spec.d_w());
      SolverConfig lin_cfg = run_cfg;
      lin_cfg.record_every = 1;
      const Trajectory vtraj = simulate_linearized(y0, lin_cfg, ops, spec, path, base);
      DiffAccumulator acc;
      double quartic = 0.0;  // int |Ve|^2 ||Ve||^2, Ve = (Ye-Y0)/sqrt(eps)
      const Trajectory ytraj = simulate_stochastic(
          y0, run_cfg, ops, spec, path, [&](int n, double, const State& y) {
            const State ve = (1.0 / root_eps) * (y - base.state_at_step(n));
            acc.add(ve - vtraj.state_at_step(n), dt, n == n_steps);
            if (n < n_steps) {
              const StateNorms nv = norms(ve);
              quartic += dt * nv.l2 * nv.l2 * nv.h1 * nv.h1;
            }
          });
      stats[p].estimator = acc.estimator();
      stats[p].aux = quartic;
      stats[p].moments = ytraj.moment_diagnostics();
    });
    rep.rows.push_back(reduce_rows(eps, stats));
  }
  rep.fit = fit_or_skip(rep.rows);
  return rep;
}

ExperimentReport run_mdp_convergence(const ControlPath& h, const CampaignConfig& camp,
                                     const SolverConfig& cfg, const NoiseSpec& spec,
                                     const State& y0) {
  validate_campaign(camp);
  SolverConfig base_cfg = cfg;
  base_cfg.record_every = 1;
  const Operators ops(cfg.domain);
  const Trajectory base = simulate_deterministic(y0, base_cfg, ops);
  const Trajectory skel = solve_skeleton(h, base_cfg, ops, spec, base);
  const double dt = cfg.grid.dt();
  const int n_steps = cfg.grid.n_steps;

  ExperimentReport rep;
  rep.master_seed = camp.master_seed;
  rep.config_digest = camp.config_digest;
  for (double eps : camp.eps_list) {
    SolverConfig run_cfg = cfg;
    run_cfg.eps = eps;
    std::vector<PathStats> stats(camp.n_paths);
    parallel_paths(camp.n_paths, camp.threads, [&](int p) {
      const WienerPath path = sample_path(camp.master_seed, p, cfg.grid, spec.d_w());
      DiffAccumulator acc;
      const Trajectory ztraj = simulate_controlled(
          h, run_cfg, ops, spec, path, base, [&](int n, double, const State& z) {
            acc.add(z - skel.state_at_step(n), dt, n == n_steps);
          });
      stats[p].estimator = acc.estimator();
      stats[p].aux = acc.sup_abs;
      stats[p].moments = ztraj.moment_diagnostics();
    });
    rep.rows.push_back(reduce_rows(eps, stats));
  }
  rep.fit = fit_or_skip(rep.rows);
  return rep;
}

}  // namespace spe
