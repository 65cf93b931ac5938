#ifndef SPE_CONFIG_HPP
#define SPE_CONFIG_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "spe/dynamics.hpp"

namespace spe {

struct ParseIssue {
  int line = 0;  // 0 when the issue is not tied to one line
  std::string message;
};

struct ModeAmplitude {
  int k = 0;
  int m = 0;
  double amp = 0.0;
};

// Validated run configuration assembled from a flat `section.key = value`
// file.  Unknown keys are rejected; every artifact written from this
// configuration embeds digest().
struct RunConfig {
  DomainSpec domain{1.0, 1.0, 8, 8};
  TimeGrid grid{1.0, 400};

  NoiseKind noise_kind = NoiseKind::additive;
  int noise_d_w = 8;
  std::vector<double> noise_sigma{0.1};
  double noise_saturation = 1.0;

  OperatorToggles toggles;
  std::vector<double> eps_list{1e-2, 1e-3, 1e-4};
  double lambda_exponent = 0.25;
  int record_every = 1;
  double c_nl = 1.0;
  double blowup_guard = 1e12;

  int paths = 64;
  std::uint64_t master_seed = 12345;
  int threads = 0;

  double control_energy = 2.0;

  std::vector<ModeAmplitude> init_v{{1, 1, 1.0}};
  std::vector<ModeAmplitude> init_T{{1, 1, 0.5}, {0, 1, 0.3}};

  int rate_phi_mode = 0;
  double rate_x = 1.0;
  int rate_iters = 500;

  std::string out_dir = "out";
  bool write_binary = false;

  std::string digest() const;  // order-independent hash of key = value pairs

  NoiseSpec make_noise_spec() const;
  SolverConfig make_solver_config(double eps) const;
  State make_initial_state() const;
  ControlPath make_control() const;  // constant-in-time, energy = control_energy
  State make_phi() const;            // coefficient-extracting functional of rate_phi_mode
};

struct ParseResult {
  bool ok = false;
  RunConfig config;
  std::vector<ParseIssue> issues;
};

// Parses and validates; never throws on bad input, collecting every
// issue with its line number instead.
ParseResult parse_config(const std::string& text);

ParseResult parse_config_file(const std::string& path);

}  // namespace spe

#endif
