#include "spe/driver.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "spe/io.hpp"

namespace spe {

namespace {

const char* kSubcommands[] = {"identities", "hypotheses", "simulate", "strong",
                              "clt",        "mdp",        "skeleton", "rate"};

CampaignConfig make_campaign(const RunConfig& cfg) {
  CampaignConfig camp;
  camp.eps_list = cfg.eps_list;
  camp.n_paths = cfg.paths;
  camp.master_seed = cfg.master_seed;
  camp.threads = cfg.threads;
  camp.config_digest = cfg.digest();
  return camp;
}

void write_meta(const std::string& out_dir, const RunConfig& cfg, const std::string& name) {
  // The only artifact carrying wall-clock time; CSV outputs stay
  // byte-identical across reruns.
  std::ofstream meta(out_dir + "/meta.txt");
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  meta << "subcommand " << name << "\nconfig_digest " << cfg.digest() << "\nwall_clock "
       << std::ctime(&tt);
}

int cmd_identities(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const IdentityReport rep = identity_suite(cfg.master_seed, cfg.domain, 100);
  write_identity_csv(out_dir + "/identities.csv", rep, cfg.digest());
  log << "identities: max res_31 " << rep.max_res_31 << ", antisym " << rep.max_res_antisym
      << ", energy " << rep.max_res_energy << ", ratio_33 " << rep.max_ratio_33 << "\n";
  const bool ok =
      rep.max_res_31 <= 1e-8 && rep.max_res_antisym <= 1e-9 && rep.max_res_energy <= 1e-9;
  if (!ok) {
    write_error_csv(out_dir + "/error.csv", kExitAssertionFailed, "identities",
                    "identity residuals exceed tolerance (see identities.csv)");
    return kExitAssertionFailed;
  }
  return kExitOk;
}

int cmd_hypotheses(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  std::vector<HypothesisReport> reps;
  bool all_pass = true;
  for (NoiseKind kind :
       {NoiseKind::additive, NoiseKind::bounded_diagonal, NoiseKind::linear_diagonal}) {
    const NoiseSpec spec =
        NoiseSpec::make(kind, cfg.domain, cfg.noise_d_w, cfg.noise_sigma, cfg.noise_saturation);
    const HypothesisReport rep = verify_hypotheses(spec, 200, cfg.master_seed);
    log << "hypotheses: " << to_string(kind) << " K=" << rep.stored_K
        << " margin=" << rep.margin << (rep.pass ? " pass" : " FAIL") << "\n";
    all_pass = all_pass && rep.pass;
    reps.push_back(rep);
  }
  write_hypothesis_csv(out_dir + "/hypotheses.csv", reps, cfg.digest());
  if (!all_pass) {
    write_error_csv(out_dir + "/error.csv", kExitAssertionFailed, "hypotheses",
                    "a psi family violates its stored K");
    return kExitAssertionFailed;
  }
  return kExitOk;
}

int cmd_simulate(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const double eps = cfg.eps_list.front();
  const Operators ops(cfg.domain);
  const SolverConfig scfg = cfg.make_solver_config(eps);
  const State y0 = cfg.make_initial_state();
  Trajectory traj;
  if (eps == 0.0) {
    traj = simulate_deterministic(y0, scfg, ops);
  } else {
    const NoiseSpec spec = cfg.make_noise_spec();
    const WienerPath path = sample_path(cfg.master_seed, 0, cfg.grid, spec.d_w());
    traj = simulate_stochastic(y0, scfg, ops, spec, path);
  }
  write_trajectory_csv(out_dir + "/trajectory.csv", traj, cfg.digest());
  if (cfg.write_binary) write_trajectory_bin(out_dir + "/trajectory.bin", traj, cfg.digest());
  log << "simulate: eps=" << eps << " final |Y|=" << traj.diag.back().l2 << "\n";
  return kExitOk;
}

int cmd_strong(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const ExperimentReport rep = run_strong_convergence(
      make_campaign(cfg), cfg.make_solver_config(0.0), cfg.make_noise_spec(),
      cfg.make_initial_state());
  write_experiment_csv(out_dir + "/strong.csv", rep);
  if (rep.fit.skipped) {
    log << "strong: regression skipped (vanishing estimators)\n";
    return kExitOk;
  }
  log << "strong: slope " << rep.fit.slope << " r2 " << rep.fit.r2 << "\n";
  if (std::abs(rep.fit.slope - 1.0) > 0.15 || rep.fit.r2 < 0.99) {
    write_error_csv(out_dir + "/error.csv", kExitAssertionFailed, "strong",
                    "log-log slope outside 1.0 +- 0.15 or r2 < 0.99");
    return kExitAssertionFailed;
  }
  return kExitOk;
}

int cmd_clt(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const ExperimentReport rep = run_clt_verification(
      make_campaign(cfg), cfg.make_solver_config(0.0), cfg.make_noise_spec(),
      cfg.make_initial_state());
  write_experiment_csv(out_dir + "/clt.csv", rep);
  for (const EstimatorRow& r : rep.rows)
    log << "clt: eps " << r.eps << " estimator " << r.mean << " +- " << r.ci_half << "\n";
  if (!ci_adjusted_decreasing(rep.rows)) {
    write_error_csv(out_dir + "/error.csv", kExitAssertionFailed, "clt",
                    "estimator increases across eps with disjoint confidence intervals");
    return kExitAssertionFailed;
  }
  return kExitOk;
}

int cmd_mdp(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const ExperimentReport rep =
      run_mdp_convergence(cfg.make_control(), make_campaign(cfg), cfg.make_solver_config(0.0),
                          cfg.make_noise_spec(), cfg.make_initial_state());
  write_experiment_csv(out_dir + "/mdp.csv", rep);
  for (const EstimatorRow& r : rep.rows)
    log << "mdp: eps " << r.eps << " estimator " << r.mean << " sup-dist " << r.aux_mean << "\n";
  if (!ci_adjusted_decreasing(rep.rows)) {
    write_error_csv(out_dir + "/error.csv", kExitAssertionFailed, "mdp",
                    "estimator increases across eps with disjoint confidence intervals");
    return kExitAssertionFailed;
  }
  return kExitOk;
}

int cmd_skeleton(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const Operators ops(cfg.domain);
  SolverConfig scfg = cfg.make_solver_config(0.0);
  scfg.record_every = 1;
  const NoiseSpec spec = cfg.make_noise_spec();
  const State y0 = cfg.make_initial_state();
  const Trajectory base = simulate_deterministic(y0, scfg, ops);
  const ControlPath h = cfg.make_control();
  const Trajectory skel = solve_skeleton(h, scfg, ops, spec, base);
  write_trajectory_csv(out_dir + "/skeleton.csv", skel, cfg.digest());
  if (cfg.write_binary) write_trajectory_bin(out_dir + "/skeleton.bin", skel, cfg.digest());
  log << "skeleton: energy(h)=" << energy(h) << " sup||R||^2=" << skel.sup_h1_sq()
      << " int|AR|^2=" << skel.int_a_sq() << "\n";
  return kExitOk;
}

int cmd_rate(const RunConfig& cfg, const std::string& out_dir, std::ostream& log) {
  const Operators ops(cfg.domain);
  SolverConfig scfg = cfg.make_solver_config(0.0);
  scfg.record_every = 1;
  const NoiseSpec spec = cfg.make_noise_spec();
  const State y0 = cfg.make_initial_state();
  const Trajectory base = simulate_deterministic(y0, scfg, ops);
  const State phi = cfg.make_phi();

  const RateResult closed =
      rate_for_terminal_hyperplane(phi, cfg.rate_x, scfg, ops, spec, base);
  const RateResult descent =
      rate_gradient_descent(phi, cfg.rate_x, scfg, ops, spec, base, cfg.rate_iters);

  // Discrete duality check on a random control.
  std::mt19937_64 rng(cfg.master_seed ^ 0x5245415445ULL);
  ControlPath hr(cfg.grid, spec.d_w());
  for (int n = 0; n < cfg.grid.n_steps; ++n)
    for (int j = 0; j < spec.d_w(); ++j) hr.values(n, j) = standard_normal(rng);
  const AdjointSolution adj = adjoint_solve(phi, scfg, ops, base);
  const auto w = control_weights(adj, scfg, ops, spec, base);
  double pairing = 0.0;
  const double dt = cfg.grid.dt();
  for (int n = 0; n < cfg.grid.n_steps; ++n) pairing += dt * hr.values.row(n).dot(w[n]);
  const Trajectory rtraj = solve_skeleton(hr, scfg, ops, spec, base);
  const double forward = inner(rtraj.state_at_step(cfg.grid.n_steps), phi);
  const double pairing_residual =
      std::abs(forward - pairing) / (std::abs(forward) + std::abs(pairing) + 1e-300);

  write_rate_csv(out_dir + "/rate.csv", {closed, descent}, pairing_residual, cfg.digest());
  if (cfg.write_binary)
    write_control_bin(out_dir + "/optimizer.bin", closed.optimizer, cfg.digest());
  log << "rate: I=" << closed.value << " (descent " << descent.value << "), Q=" << closed.gram
      << ", pairing residual " << pairing_residual << "\n";

  const bool constraint_ok =
      closed.residual <= 1e-6 * std::max(std::abs(cfg.rate_x), 1e-12);
  const bool agree = std::abs(closed.value - descent.value) <=
                     0.01 * std::max(std::abs(closed.value), 1e-300);
  if (!constraint_ok || pairing_residual > 1e-8 || !agree) {
    write_error_csv(out_dir + "/error.csv", kExitAssertionFailed, "rate",
                    "duality or cross-method agreement failed (see rate.csv)");
    return kExitAssertionFailed;
  }
  return kExitOk;
}

}  // namespace

bool is_known_subcommand(const std::string& name) {
  for (const char* s : kSubcommands)
    if (name == s) return true;
  return false;
}

std::string usage_text() {
  std::string u = "usage: spe <subcommand> --config <path> [--seed N] [--out DIR]\n  subcommands:";
  for (const char* s : kSubcommands) u += std::string(" ") + s;
  u += "\n";
  return u;
}

int run_subcommand(const std::string& name, const RunConfig& cfg, const std::string& out_dir,
                   std::ostream& log) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    log << "cannot create output directory '" << out_dir << "'\n";
    return kExitConfigError;
  }
  write_meta(out_dir, cfg, name);
  try {
    if (name == "identities") return cmd_identities(cfg, out_dir, log);
    if (name == "hypotheses") return cmd_hypotheses(cfg, out_dir, log);
    if (name == "simulate") return cmd_simulate(cfg, out_dir, log);
    if (name == "strong") return cmd_strong(cfg, out_dir, log);
    if (name == "clt") return cmd_clt(cfg, out_dir, log);
    if (name == "mdp") return cmd_mdp(cfg, out_dir, log);
    if (name == "skeleton") return cmd_skeleton(cfg, out_dir, log);
    if (name == "rate") return cmd_rate(cfg, out_dir, log);
    log << usage_text();
    return kExitConfigError;
  } catch (const blowup_error& e) {
    write_error_csv(out_dir + "/error.csv", kExitBlowup, name, e.what());
    log << "blow-up: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const stability_error& e) {
    write_error_csv(out_dir + "/error.csv", kExitBlowup, name, e.what());
    log << "instability: " << e.what() << "\n";
    return kExitBlowup;
  } catch (const stall_error& e) {
    write_error_csv(out_dir + "/error.csv", kExitAssertionFailed, name, e.what());
    log << "stall: " << e.what() << "\n";
    return kExitAssertionFailed;
  } catch (const error& e) {
    write_error_csv(out_dir + "/error.csv", kExitConfigError, name, e.what());
    log << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc < 2) {
    err << usage_text();
    return kExitConfigError;
  }
  const std::string name = argv[1];
  if (!is_known_subcommand(name)) {
    err << "unknown subcommand '" << name << "'\n" << usage_text();
    return kExitConfigError;
  }
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed_override;
  for (int i = 2; i < argc; ++i) {
    const std::string arg = argv[i];
    auto next = [&](const char* what) -> std::string {
      if (i + 1 >= argc) throw config_error(std::string("missing value for ") + what);
      return argv[++i];
    };
    try {
      if (arg == "--config")
        config_path = next("--config");
      else if (arg == "--seed")
        seed_override = std::stoull(next("--seed"));
      else if (arg == "--out")
        out_dir = next("--out");
      else {
        err << "unknown option '" << arg << "'\n" << usage_text();
        return kExitConfigError;
      }
    } catch (const std::exception& e) {
      err << e.what() << "\n" << usage_text();
      return kExitConfigError;
    }
  }
  if (config_path.empty()) {
    err << "--config is required\n" << usage_text();
    return kExitConfigError;
  }
  ParseResult parsed = parse_config_file(config_path);
  if (!parsed.ok) {
    std::string combined;
    for (const ParseIssue& issue : parsed.issues) {
      if (issue.line > 0)
        err << config_path << ":" << issue.line << ": " << issue.message << "\n";
      else
        err << config_path << ": " << issue.message << "\n";
      combined += issue.message + "; ";
    }
    if (!out_dir.empty()) {
      std::error_code ec;
      std::filesystem::create_directories(out_dir, ec);
      if (!ec) write_error_csv(out_dir + "/error.csv", kExitConfigError, name, combined);
    }
    return kExitConfigError;
  }
  RunConfig cfg = parsed.config;
  if (seed_override) cfg.master_seed = *seed_override;
  if (out_dir.empty()) out_dir = cfg.out_dir;
  return run_subcommand(name, cfg, out_dir, out);
}

}  // namespace spe
