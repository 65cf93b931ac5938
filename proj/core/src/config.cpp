#include "spe/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace spe {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

std::string fmt_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RawEntry {
  int line = 0;
  std::string value;
};

// Collects raw entries first, then applies typed setters so every error
// is reported, not just the first.
class Parser {
 public:
  explicit Parser(ParseResult& result) : res_(result) {}

  void scan(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line = line.substr(0, hash);
      line = trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        issue(lineno, "expected `section.key = value`");
        continue;
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty() || key.find('.') == std::string::npos) {
        issue(lineno, "key must have the form section.key");
        continue;
      }
      auto it = entries_.find(key);
      if (it != entries_.end()) {
        issue(lineno, "duplicate key '" + key + "' (first set at line " +
                          std::to_string(it->second.line) + ")");
        continue;
      }
      entries_[key] = RawEntry{lineno, value};
    }
  }

  void issue(int line, const std::string& msg) { res_.issues.push_back({line, msg}); }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  template <class Fn>
  void apply(const std::string& key, Fn&& fn) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return;
    consumed_.insert(it->first);
    try {
      fn(it->second.value);
    } catch (const std::exception& e) {
      issue(it->second.line, key + ": " + e.what());
    }
  }

  void reject_unknown() {
    for (const auto& [key, entry] : entries_) {
      if (!consumed_.count(key)) issue(entry.line, "unknown key '" + key + "'");
    }
  }

  int line_of(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

 private:
  ParseResult& res_;
  std::map<std::string, RawEntry> entries_;
  std::set<std::string> consumed_;
};

double parse_real(const std::string& s) {
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters after number");
  if (!std::isfinite(v)) throw std::invalid_argument("value must be finite");
  return v;
}

long long parse_int(const std::string& s) {
  std::size_t pos = 0;
  const long long v = std::stoll(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters after integer");
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw std::invalid_argument("expected true or false");
}

std::vector<double> parse_real_list(const std::string& s) {
  std::vector<double> out;
  for (const std::string& tok : split_ws(s)) out.push_back(parse_real(tok));
  if (out.empty()) throw std::invalid_argument("expected at least one value");
  return out;
}

// Mode triples `k:m:amp`, space separated.
std::vector<ModeAmplitude> parse_modes(const std::string& s) {
  std::vector<ModeAmplitude> out;
  for (const std::string& tok : split_ws(s)) {
    const auto c1 = tok.find(':');
    const auto c2 = tok.find(':', c1 == std::string::npos ? c1 : c1 + 1);
    if (c1 == std::string::npos || c2 == std::string::npos)
      throw std::invalid_argument("expected k:m:amplitude triples");
    ModeAmplitude ma;
    ma.k = static_cast<int>(parse_int(tok.substr(0, c1)));
    ma.m = static_cast<int>(parse_int(tok.substr(c1 + 1, c2 - c1 - 1)));
    ma.amp = parse_real(tok.substr(c2 + 1));
    out.push_back(ma);
  }
  return out;
}

}  // namespace

ParseResult parse_config(const std::string& text) {
  ParseResult res;
  RunConfig& c = res.config;
  Parser p(res);
  p.scan(text);

  double L = c.domain.L, depth = c.domain.depth;
  long long nx = c.domain.Nx, nz = c.domain.Nz;
  p.apply("domain.L", [&](const std::string& v) {
    const double x = parse_real(v);
    if (!(x > 0.0)) throw std::invalid_argument("must be positive");
    L = x;
  });
  p.apply("domain.depth", [&](const std::string& v) {
    const double x = parse_real(v);
    if (!(x > 0.0)) throw std::invalid_argument("must be positive");
    depth = x;
  });
  p.apply("domain.Nx", [&](const std::string& v) {
    const long long x = parse_int(v);
    if (x < 1) throw std::invalid_argument("must be >= 1");
    nx = x;
  });
  p.apply("domain.Nz", [&](const std::string& v) {
    const long long x = parse_int(v);
    if (x < 1) throw std::invalid_argument("must be >= 1");
    nz = x;
  });

  double t_end = c.grid.t_end;
  long long n_steps = c.grid.n_steps;
  p.apply("grid.t_end", [&](const std::string& v) {
    const double x = parse_real(v);
    if (!(x > 0.0)) throw std::invalid_argument("must be positive");
    t_end = x;
  });
  p.apply("grid.n_steps", [&](const std::string& v) {
    const long long x = parse_int(v);
    if (x < 1) throw std::invalid_argument("must be >= 1");
    n_steps = x;
  });

  p.apply("noise.kind", [&](const std::string& v) { c.noise_kind = noise_kind_from_string(v); });
  p.apply("noise.d_W", [&](const std::string& v) {
    const long long d = parse_int(v);
    if (d < 0) throw std::invalid_argument("must be >= 0");
    c.noise_d_w = static_cast<int>(d);
  });
  p.apply("noise.sigma", [&](const std::string& v) {
    const std::vector<double> xs = parse_real_list(v);
    for (double s : xs)
      if (s < 0.0) throw std::invalid_argument("amplitudes must be >= 0");
    c.noise_sigma = xs;
  });
  p.apply("noise.saturation", [&](const std::string& v) {
    const double x = parse_real(v);
    if (!(x > 0.0)) throw std::invalid_argument("must be positive");
    c.noise_saturation = x;
  });

  p.apply("solver.enable_B", [&](const std::string& v) { c.toggles.enable_B = parse_bool(v); });
  p.apply("solver.enable_G", [&](const std::string& v) { c.toggles.enable_G = parse_bool(v); });
  p.apply("solver.eps", [&](const std::string& v) {
    const std::vector<double> xs = parse_real_list(v);
    for (double e : xs)
      if (e < 0.0) throw std::invalid_argument("eps values must be >= 0");
    c.eps_list = xs;
  });
  p.apply("solver.lambda_exponent", [&](const std::string& v) {
    const double x = parse_real(v);
    if (!(x > 0.0 && x < 0.5))
      throw std::invalid_argument(
          "must lie in the open interval (0, 1/2) so that lambda(eps) -> inf and "
          "sqrt(eps) lambda(eps) -> 0");
    c.lambda_exponent = x;
  });
  p.apply("solver.record_every", [&](const std::string& v) {
    const long long r = parse_int(v);
    if (r < 1) throw std::invalid_argument("must be >= 1");
    c.record_every = static_cast<int>(r);
  });
  p.apply("solver.c_nl", [&](const std::string& v) {
    const double x = parse_real(v);
    if (!(x > 0.0)) throw std::invalid_argument("must be positive");
    c.c_nl = x;
  });
  p.apply("solver.blowup_guard", [&](const std::string& v) {
    const double x = parse_real(v);
    if (!(x > 0.0)) throw std::invalid_argument("must be positive");
    c.blowup_guard = x;
  });

  p.apply("experiment.paths", [&](const std::string& v) {
    const long long n = parse_int(v);
    if (n < 2) throw std::invalid_argument("must be >= 2 (sample sigma needs two paths)");
    c.paths = static_cast<int>(n);
  });
  p.apply("experiment.master_seed", [&](const std::string& v) {
    c.master_seed = static_cast<std::uint64_t>(parse_int(v));
  });
  p.apply("experiment.threads", [&](const std::string& v) {
    const long long n = parse_int(v);
    if (n < 0) throw std::invalid_argument("must be >= 0");
    c.threads = static_cast<int>(n);
  });

  p.apply("control.energy", [&](const std::string& v) {
    const double x = parse_real(v);
    if (x < 0.0) throw std::invalid_argument("must be >= 0");
    c.control_energy = x;
  });

  p.apply("init.v", [&](const std::string& v) { c.init_v = parse_modes(v); });
  p.apply("init.T", [&](const std::string& v) { c.init_T = parse_modes(v); });

  p.apply("rate.phi_mode", [&](const std::string& v) {
    const long long n = parse_int(v);
    if (n < 0) throw std::invalid_argument("must be >= 0");
    c.rate_phi_mode = static_cast<int>(n);
  });
  p.apply("rate.x", [&](const std::string& v) { c.rate_x = parse_real(v); });
  p.apply("rate.iters", [&](const std::string& v) {
    const long long n = parse_int(v);
    if (n < 1) throw std::invalid_argument("must be >= 1");
    c.rate_iters = static_cast<int>(n);
  });

  p.apply("output.directory", [&](const std::string& v) {
    if (v.empty()) throw std::invalid_argument("must not be empty");
    c.out_dir = v;
  });
  p.apply("output.formats", [&](const std::string& v) {
    c.write_binary = false;
    bool csv = false;
    for (const std::string& tok : split_ws(v)) {
      if (tok == "csv")
        csv = true;
      else if (tok == "bin")
        c.write_binary = true;
      else
        throw std::invalid_argument("unknown format '" + tok + "' (expected csv and/or bin)");
    }
    if (!csv) throw std::invalid_argument("csv output is required");
  });

  p.reject_unknown();

  // Cross-field validation.
  try {
    c.domain = DomainSpec(L, depth, static_cast<int>(nx), static_cast<int>(nz));
    c.grid = TimeGrid(t_end, static_cast<int>(n_steps));
  } catch (const std::exception& e) {
    p.issue(0, e.what());
  }
  if (c.noise_sigma.size() != 1 &&
      static_cast<int>(c.noise_sigma.size()) != c.noise_d_w)
    p.issue(p.line_of("noise.sigma"), "noise.sigma: need one value or exactly d_W values");
  auto check_modes = [&](const std::vector<ModeAmplitude>& modes, bool is_v, const char* key) {
    for (const ModeAmplitude& ma : modes) {
      const int kmin = is_v ? 1 : 0, mmin = is_v ? 1 : 0;
      if (ma.k < kmin || ma.k > static_cast<int>(nx) || ma.m < mmin || ma.m > static_cast<int>(nz))
        p.issue(p.line_of(key), std::string(key) + ": mode (" + std::to_string(ma.k) + "," +
                                    std::to_string(ma.m) + ") outside the band");
    }
  };
  check_modes(c.init_v, true, "init.v");
  check_modes(c.init_T, false, "init.T");

  res.ok = res.issues.empty();
  return res;
}

ParseResult parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ParseResult res;
    res.issues.push_back({0, "cannot open config file '" + path + "'"});
    return res;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string RunConfig::digest() const {
  std::map<std::string, std::string> kv;
  kv["domain.L"] = fmt_real(domain.L);
  kv["domain.depth"] = fmt_real(domain.depth);
  kv["domain.Nx"] = std::to_string(domain.Nx);
  kv["domain.Nz"] = std::to_string(domain.Nz);
  kv["grid.t_end"] = fmt_real(grid.t_end);
  kv["grid.n_steps"] = std::to_string(grid.n_steps);
  kv["noise.kind"] = to_string(noise_kind);
  kv["noise.d_W"] = std::to_string(noise_d_w);
  {
    std::string s;
    for (double v : noise_sigma) s += fmt_real(v) + " ";
    kv["noise.sigma"] = s;
  }
  kv["noise.saturation"] = fmt_real(noise_saturation);
  kv["solver.enable_B"] = toggles.enable_B ? "true" : "false";
  kv["solver.enable_G"] = toggles.enable_G ? "true" : "false";
  {
    std::string s;
    for (double v : eps_list) s += fmt_real(v) + " ";
    kv["solver.eps"] = s;
  }
  kv["solver.lambda_exponent"] = fmt_real(lambda_exponent);
  kv["solver.record_every"] = std::to_string(record_every);
  kv["solver.c_nl"] = fmt_real(c_nl);
  kv["solver.blowup_guard"] = fmt_real(blowup_guard);
  kv["experiment.paths"] = std::to_string(paths);
  kv["experiment.master_seed"] = std::to_string(master_seed);
  kv["control.energy"] = fmt_real(control_energy);
  auto modes_str = [](const std::vector<ModeAmplitude>& ms) {
    std::string s;
    for (const ModeAmplitude& m : ms)
      s += std::to_string(m.k) + ":" + std::to_string(m.m) + ":" + fmt_real(m.amp) + " ";
    return s;
  };
  kv["init.v"] = modes_str(init_v);
  kv["init.T"] = modes_str(init_T);
  kv["rate.phi_mode"] = std::to_string(rate_phi_mode);
  kv["rate.x"] = fmt_real(rate_x);
  kv["rate.iters"] = std::to_string(rate_iters);
  // experiment.threads and output.* are execution details, not science:
  // they must not change the digest.

  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  auto mix = [&h](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : kv) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

NoiseSpec RunConfig::make_noise_spec() const {
  return NoiseSpec::make(noise_kind, domain, noise_d_w, noise_sigma, noise_saturation);
}

SolverConfig RunConfig::make_solver_config(double eps) const {
  SolverConfig cfg;
  cfg.grid = grid;
  cfg.domain = domain;
  cfg.toggles = toggles;
  cfg.eps = eps;
  cfg.lambda_exponent = lambda_exponent;
  cfg.record_every = record_every;
  cfg.c_nl = c_nl;
  cfg.blowup_guard = blowup_guard;
  return cfg;
}

State RunConfig::make_initial_state() const {
  State y0(domain);
  for (const ModeAmplitude& ma : init_v) y0.v().set_coeff(ma.k, ma.m, ma.amp);
  for (const ModeAmplitude& ma : init_T) y0.T().set_coeff(ma.k, ma.m, ma.amp);
  return y0;
}

ControlPath RunConfig::make_control() const {
  // Constant in time, equal weight across directions, scaled so that
  // energy(h) equals control_energy exactly.
  ControlPath h(grid, noise_d_w);
  if (noise_d_w > 0 && control_energy > 0.0) {
    const double amp = std::sqrt(2.0 * control_energy / (grid.t_end * noise_d_w));
    h.values.setConstant(amp);
  }
  return h;
}

State RunConfig::make_phi() const {
  const NoiseSpec spec = make_noise_spec();
  if (rate_phi_mode >= spec.d_w())
    throw config_error("rate.phi_mode exceeds the number of noise directions");
  const NoiseDirection& d = spec.directions()[rate_phi_mode];
  State phi(domain);
  // Amplitude 1/mass, so <Y, phi> extracts the raw coefficient of the mode.
  if (d.is_v)
    phi.v().set_coeff(d.k, d.m, 1.0 / d.mass);
  else
    phi.T().set_coeff(d.k, d.m, 1.0 / d.mass);
  return phi;
}

}  // namespace spe
