#ifndef SPE_EXPERIMENTS_HPP
#define SPE_EXPERIMENTS_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "spe/dynamics.hpp"

namespace spe {

// One per-epsilon row of a campaign report.  mean/sigma/ci_half describe
// the primary estimator; aux_mean is a campaign-specific companion
// (quartic moment integral for CLT runs, non-squared sup distance for MDP
// runs).  moment_means are the per-run means of the four monitored
// moment quantities of the driving process.
struct EstimatorRow {
  double eps = 0.0;
  int n_paths = 0;
  double mean = 0.0;
  double sigma = 0.0;
  double ci_half = 0.0;
  double aux_mean = 0.0;
  std::array<double, 4> moment_means{0.0, 0.0, 0.0, 0.0};
};

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  bool skipped = true;  // set when estimators vanish (e.g. zero noise)
};

struct ExperimentReport {
  std::vector<EstimatorRow> rows;
  SlopeFit fit;
  std::uint64_t master_seed = 0;
  std::string config_digest;
};

// Two-sided 97.5% quantile of Student's t with df degrees of freedom
// (the factor of a 95% confidence interval).
double student_t_975(int df);

// Ordinary least squares y = slope*x + intercept with r^2; throws on
// fewer than two distinct abscissae.
SlopeFit fit_slope(const std::vector<std::pair<double, double>>& points);

// CI-adjusted monotonicity: false only when some later-eps interval lies
// strictly above an earlier one (disjoint intervals in the wrong order).
bool ci_adjusted_decreasing(const std::vector<EstimatorRow>& rows);

// Strict decrease of means together with disjoint CIs between the first
// and last row.
bool strictly_decreasing_with_separation(const std::vector<EstimatorRow>& rows);

struct CampaignConfig {
  std::vector<double> eps_list;  // nonempty, strictly decreasing
  int n_paths = 2;
  std::uint64_t master_seed = 0;
  int threads = 0;  // 0 = hardware concurrency
  std::string config_digest;
};

// E[ sup |Ye - Y0|^2 + int ||Ye - Y0||^2 ] per eps, with the same Wiener
// paths reused across eps (common random numbers), plus the log-log
// slope against eps.
ExperimentReport run_strong_convergence(const CampaignConfig& camp, const SolverConfig& cfg,
                                        const NoiseSpec& spec, const State& y0);

// E[ sup |(Ye-Y0)/sqrt(eps) - V0|^2 + int ||.||^2 ] per eps with Ye and
// V0 coupled through one path; aux is the quartic moment integral
// int |Ve|^2 ||Ve||^2 of the rescaled deviation.
ExperimentReport run_clt_verification(const CampaignConfig& camp, const SolverConfig& cfg,
                                      const NoiseSpec& spec, const State& y0);

// E[ sup |Zbar - R^h|^2 + int ||Zbar - R^h||^2 ] per eps for a fixed
// deterministic control h; aux is the mean non-squared sup distance.
ExperimentReport run_mdp_convergence(const ControlPath& h, const CampaignConfig& camp,
                                     const SolverConfig& cfg, const NoiseSpec& spec,
                                     const State& y0);

}  // namespace spe

#endif
