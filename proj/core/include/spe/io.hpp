#ifndef SPE_IO_HPP
#define SPE_IO_HPP

#include <string>

#include "spe/dynamics.hpp"
#include "spe/experiments.hpp"
#include "spe/noise.hpp"
#include "spe/operators.hpp"
#include "spe/rate.hpp"

namespace spe {

// All writers emit RFC-4180-style rows with `.` decimal separator and
// scientific notation at 17 significant digits, append `key,value`
// footer rows (always including config_digest), and contain no
// timestamps, so reruns with the same configuration are byte-identical.

std::string format_real(double v);

void write_identity_csv(const std::string& path, const IdentityReport& rep,
                        const std::string& digest);

void write_hypothesis_csv(const std::string& path, const std::vector<HypothesisReport>& reps,
                          const std::string& digest);

void write_experiment_csv(const std::string& path, const ExperimentReport& rep);

// Trajectory CSV: columns t, l2, h1, dz_l2 (one row per step), followed
// by footer rows sup_h1_sq, int_a_sq, config_digest.
void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::string& digest);

// Flat binary layout: header magic (u64 "SPETRAJ1"), Nx (u32), Nz (u32),
// n_samples (u32), digest (u64); then per sample the time followed by
// the v and T coefficient matrices in row-major order (float64 LE).
void write_trajectory_bin(const std::string& path, const Trajectory& traj,
                          const std::string& digest);

// Control dump in the same layout with Nx = d_W, Nz = 1 and rows
// t_n followed by the d_W control values of that step.
void write_control_bin(const std::string& path, const ControlPath& h, const std::string& digest);

void write_rate_csv(const std::string& path, const std::vector<RateResult>& results,
                    double pairing_residual, const std::string& digest);

void write_error_csv(const std::string& path, int code, const std::string& where,
                     const std::string& message);

// Reads the config_digest footer of a CSV artifact; throws config_error
// when artifacts from different digests are mixed.
std::string read_csv_digest(const std::string& path);
void require_same_digest(const std::string& path_a, const std::string& path_b);

}  // namespace spe

#endif
