#include "spe/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace spe {

std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

namespace {

std::ofstream open_out(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw config_error("cannot open output file '" + path + "'");
  return out;
}

void footer(std::ofstream& out, const std::string& digest) {
  out << "config_digest," << digest << "\n";
}

}  // namespace

void write_identity_csv(const std::string& path, const IdentityReport& rep,
                        const std::string& digest) {
  auto out = open_out(path);
  out << "trial,res_31,res_antisym,res_energy,ratio_33\n";
  for (const IdentityRow& r : rep.rows) {
    out << r.trial << "," << format_real(r.res_31) << "," << format_real(r.res_antisym) << ","
        << format_real(r.res_energy) << "," << format_real(r.ratio_33) << "\n";
  }
  if (rep.rerun_at_pad2) {
    for (const IdentityRow& r : rep.pad2_rows) {
      out << "pad2_" << r.trial << "," << format_real(r.res_31) << ","
          << format_real(r.res_antisym) << "," << format_real(r.res_energy) << ","
          << format_real(r.ratio_33) << "\n";
    }
  }
  out << "max_res_31," << format_real(rep.max_res_31) << "\n";
  out << "max_res_antisym," << format_real(rep.max_res_antisym) << "\n";
  out << "max_res_energy," << format_real(rep.max_res_energy) << "\n";
  out << "max_ratio_33," << format_real(rep.max_ratio_33) << "\n";
  footer(out, digest);
}

void write_hypothesis_csv(const std::string& path, const std::vector<HypothesisReport>& reps,
                          const std::string& digest) {
  auto out = open_out(path);
  out << "kind,stored_K,growth_ratio,lipschitz_ratio,dz_ratio,margin,pass\n";
  for (const HypothesisReport& r : reps) {
    out << to_string(r.kind) << "," << format_real(r.stored_K) << ","
        << format_real(r.max_growth_ratio) << "," << format_real(r.max_lipschitz_ratio) << ","
        << format_real(r.max_dz_ratio) << "," << format_real(r.margin) << ","
        << (r.pass ? "true" : "false") << "\n";
  }
  footer(out, digest);
}

void write_experiment_csv(const std::string& path, const ExperimentReport& rep) {
  auto out = open_out(path);
  out << "eps,n_paths,mean,sigma,ci_half,aux_mean,sup_l2_p4,int_h1_sq,sup_dz_p4,int_dz_mixed\n";
  for (const EstimatorRow& r : rep.rows) {
    out << format_real(r.eps) << "," << r.n_paths << "," << format_real(r.mean) << ","
        << format_real(r.sigma) << "," << format_real(r.ci_half) << ","
        << format_real(r.aux_mean);
    for (double m : r.moment_means) out << "," << format_real(m);
    out << "\n";
  }
  if (rep.fit.skipped) {
    out << "regression,skipped\n";
  } else {
    out << "slope," << format_real(rep.fit.slope) << "\n";
    out << "intercept," << format_real(rep.fit.intercept) << "\n";
    out << "r2," << format_real(rep.fit.r2) << "\n";
  }
  out << "seed," << rep.master_seed << "\n";
  footer(out, rep.config_digest);
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj,
                          const std::string& digest) {
  auto out = open_out(path);
  out << "t,l2,h1,dz_l2\n";
  for (const StepDiag& d : traj.diag) {
    out << format_real(d.t) << "," << format_real(d.l2) << "," << format_real(d.h1) << ","
        << format_real(d.dz_l2) << "\n";
  }
  out << "sup_h1_sq," << format_real(traj.sup_h1_sq()) << "\n";
  out << "int_a_sq," << format_real(traj.int_a_sq()) << "\n";
  footer(out, digest);
}

namespace {

constexpr std::uint64_t kTrajMagic = 0x314a415254455053ULL;  // "SPETRAJ1" little-endian

std::uint64_t digest_bits(const std::string& digest) {
  return std::strtoull(digest.c_str(), nullptr, 16);
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_u64(std::ofstream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}
void put_f64(std::ofstream& out, double v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

}  // namespace

void write_trajectory_bin(const std::string& path, const Trajectory& traj,
                          const std::string& digest) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  const DomainSpec& dom = traj.cfg.domain;
  put_u64(out, kTrajMagic);
  put_u32(out, static_cast<std::uint32_t>(dom.Nx));
  put_u32(out, static_cast<std::uint32_t>(dom.Nz));
  put_u32(out, static_cast<std::uint32_t>(traj.samples.size()));
  put_u64(out, digest_bits(digest));
  for (const auto& [t, y] : traj.samples) {
    put_f64(out, t);
    for (int k = 0; k <= dom.Nx; ++k)
      for (int m = 0; m <= dom.Nz; ++m) put_f64(out, y.v().coeffs()(k, m));
    for (int k = 0; k <= dom.Nx; ++k)
      for (int m = 0; m <= dom.Nz; ++m) put_f64(out, y.T().coeffs()(k, m));
  }
}

void write_control_bin(const std::string& path, const ControlPath& h, const std::string& digest) {
  auto out = open_out(path, std::ios::out | std::ios::binary);
  put_u64(out, kTrajMagic);
  put_u32(out, static_cast<std::uint32_t>(h.values.cols()));
  put_u32(out, 1u);
  put_u32(out, static_cast<std::uint32_t>(h.values.rows()));
  put_u64(out, digest_bits(digest));
  const double dt = h.grid.dt();
  for (int n = 0; n < h.values.rows(); ++n) {
    put_f64(out, n * dt);
    for (int j = 0; j < h.values.cols(); ++j) put_f64(out, h.values(n, j));
  }
}

void write_rate_csv(const std::string& path, const std::vector<RateResult>& results,
                    double pairing_residual, const std::string& digest) {
  auto out = open_out(path);
  out << "method,value,residual,Q,iterations\n";
  for (const RateResult& r : results) {
    out << to_string(r.method) << "," << format_real(r.value) << "," << format_real(r.residual)
        << "," << format_real(r.gram) << "," << r.iterations << "\n";
  }
  out << "pairing_residual," << format_real(pairing_residual) << "\n";
  footer(out, digest);
}

void write_error_csv(const std::string& path, int code, const std::string& where,
                     const std::string& message) {
  std::ofstream out(path);
  if (!out) return;  // error reporting must not throw
  out << "code,where,message\n";
  std::string sanitized = message;
  for (char& c : sanitized)
    if (c == ',' || c == '\n' || c == '\r') c = ';';
  out << code << "," << where << "," << sanitized << "\n";
}

std::string read_csv_digest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open artifact '" + path + "'");
  std::string line, digest;
  while (std::getline(in, line)) {
    if (line.rfind("config_digest,", 0) == 0) digest = line.substr(14);
  }
  if (digest.empty()) throw config_error("artifact '" + path + "' carries no config digest");
  return digest;
}

void require_same_digest(const std::string& path_a, const std::string& path_b) {
  const std::string da = read_csv_digest(path_a), db = read_csv_digest(path_b);
  if (da != db)
    throw config_error("artifacts '" + path_a + "' (digest " + da + ") and '" + path_b +
                       "' (digest " + db + ") come from different configurations");
}

}  // namespace spe
