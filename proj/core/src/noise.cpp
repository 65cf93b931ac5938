#include "spe/noise.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace spe {

std::string to_string(NoiseKind k) {
  switch (k) {
    case NoiseKind::additive: return "additive";
    case NoiseKind::bounded_diagonal: return "bounded_diagonal";
    case NoiseKind::linear_diagonal: return "linear_diagonal";
  }
  return "unknown";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "additive") return NoiseKind::additive;
  if (s == "bounded_diagonal") return NoiseKind::bounded_diagonal;
  if (s == "linear_diagonal") return NoiseKind::linear_diagonal;
  throw config_error("unknown noise kind '" + s + "'");
}

namespace {

std::vector<NoiseDirection> enumerate_directions(const DomainSpec& dom, int d_w) {
  // Candidate modes of each family ordered by (lambda, k, m).
  using Key = std::tuple<double, int, int>;
  std::vector<std::pair<Key, NoiseDirection>> v_modes, t_modes;
  const Field vproto(dom, Parity::Sin, Parity::Cos);
  const Field tproto(dom, Parity::Cos, Parity::Cos);
  auto dz_mass = [&dom](const Field& proto, int k, int m) {
    // |d_z phi|^2 for an amplitude-1 mode: (m pi/h)^2 times the mass of
    // the Sin-in-z partner (equal to the Cos mass for m>=1).
    if (m == 0) return 0.0;
    const double w = m * kPi / dom.depth;
    return w * w * proto.mass_x(k) * (dom.depth / 2.0);
  };
  for (int k = 1; k <= dom.Nx; ++k)
    for (int m = 1; m <= dom.Nz; ++m)
      v_modes.push_back({Key{dom.lambda(k, m), k, m},
                         NoiseDirection{true, k, m, vproto.mass(k, m), dz_mass(vproto, k, m)}});
  for (int k = 0; k <= dom.Nx; ++k)
    for (int m = 0; m <= dom.Nz; ++m)
      t_modes.push_back({Key{dom.lambda(k, m), k, m},
                         NoiseDirection{false, k, m, tproto.mass(k, m), dz_mass(tproto, k, m)}});
  std::sort(v_modes.begin(), v_modes.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  std::sort(t_modes.begin(), t_modes.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<NoiseDirection> dirs;
  std::size_t iv = 0, it = 0;
  while (static_cast<int>(dirs.size()) < d_w) {
    const bool want_v = dirs.size() % 2 == 0;
    if (want_v && iv < v_modes.size()) {
      dirs.push_back(v_modes[iv++].second);
    } else if (!want_v && it < t_modes.size()) {
      dirs.push_back(t_modes[it++].second);
    } else if (iv < v_modes.size()) {
      dirs.push_back(v_modes[iv++].second);
    } else if (it < t_modes.size()) {
      dirs.push_back(t_modes[it++].second);
    } else {
      throw config_error("NoiseSpec: d_W exceeds the number of available basis directions");
    }
  }
  return dirs;
}

double mode_coeff(const State& y, const NoiseDirection& d) {
  return d.is_v ? y.v().coeffs()(d.k, d.m) : y.T().coeffs()(d.k, d.m);
}

}  // namespace

NoiseSpec NoiseSpec::make(NoiseKind kind, const DomainSpec& dom, int d_w,
                          std::vector<double> sigma, double saturation) {
  if (d_w < 0) throw config_error("NoiseSpec: d_W must be >= 0");
  if (sigma.size() == 1 && d_w > 1) sigma.assign(d_w, sigma[0]);
  if (static_cast<int>(sigma.size()) != d_w)
    throw config_error("NoiseSpec: sigma list length must equal d_W");
  if (kind == NoiseKind::bounded_diagonal && !(saturation > 0.0))
    throw config_error("NoiseSpec: saturation must be positive");

  NoiseSpec s;
  s.kind_ = kind;
  s.dom_ = dom;
  s.d_w_ = d_w;
  s.sigma_ = std::move(sigma);
  s.saturation_ = saturation;
  s.dirs_ = enumerate_directions(dom, d_w);

  // Closed-form K dominating (A.1), (A.2) and Hypothesis B.
  double sum_mass = 0.0, sum_dz = 0.0, max_sig_sq = 0.0;
  for (int j = 0; j < d_w; ++j) {
    const double s2 = s.sigma_[j] * s.sigma_[j];
    sum_mass += s2 * s.dirs_[j].mass;
    sum_dz += s2 * s.dirs_[j].dz_mass;
    max_sig_sq = std::max(max_sig_sq, s2);
  }
  switch (kind) {
    case NoiseKind::additive:
      s.K_ = std::max(sum_mass, sum_dz);
      break;
    case NoiseKind::bounded_diagonal: {
      const double g2 = (1.0 + saturation) * (1.0 + saturation);
      // tanh is 1-Lipschitz, so the gain difference is bounded by the
      // coefficient difference and max sigma^2 dominates (A.2).
      s.K_ = std::max({g2 * sum_mass, g2 * sum_dz, max_sig_sq});
      break;
    }
    case NoiseKind::linear_diagonal:
      // |c_j|^2 mass_j <= |phi|^2 and |c_j|^2 dz_mass_j <= |d_z phi|^2
      // mode by mode, so max sigma^2 works for all three bounds.
      s.K_ = max_sig_sq;
      break;
  }
  return s;
}

double NoiseSpec::gain(int j, const State& y) const {
  switch (kind_) {
    case NoiseKind::additive:
      return 1.0;
    case NoiseKind::bounded_diagonal:
      return 1.0 + saturation_ * std::tanh(mode_coeff(y, dirs_[j]) / saturation_);
    case NoiseKind::linear_diagonal:
      return mode_coeff(y, dirs_[j]);
  }
  return 0.0;
}

State NoiseSpec::apply(double /*t*/, const State& y, const Eigen::VectorXd& u) const {
  if (y.domain() != dom_) throw shape_error("NoiseSpec::apply: mismatched DomainSpec");
  if (u.size() != d_w_) throw shape_error("NoiseSpec::apply: U-vector has wrong dimension");
  State out(dom_, y.time());
  for (int j = 0; j < d_w_; ++j) {
    const NoiseDirection& d = dirs_[j];
    const double a = sigma_[j] * gain(j, y) * u(j);
    if (d.is_v)
      out.v().coeffs()(d.k, d.m) += a;
    else
      out.T().coeffs()(d.k, d.m) += a;
  }
  return out;
}

Eigen::VectorXd NoiseSpec::apply_adjoint(double /*t*/, const State& y, const State& z) const {
  if (z.domain() != dom_) throw shape_error("NoiseSpec::apply_adjoint: mismatched DomainSpec");
  Eigen::VectorXd u(d_w_);
  for (int j = 0; j < d_w_; ++j) {
    const NoiseDirection& d = dirs_[j];
    u(j) = sigma_[j] * gain(j, y) * mode_coeff(z, d) * d.mass;
  }
  return u;
}

double NoiseSpec::hs_norm_sq(double /*t*/, const State& y) const {
  double sum = 0.0;
  for (int j = 0; j < d_w_; ++j) {
    const double a = sigma_[j] * gain(j, y);
    sum += a * a * dirs_[j].mass;
  }
  return sum;
}

double NoiseSpec::dz_hs_norm_sq(double /*t*/, const State& y) const {
  double sum = 0.0;
  for (int j = 0; j < d_w_; ++j) {
    const double a = sigma_[j] * gain(j, y);
    sum += a * a * dirs_[j].dz_mass;
  }
  return sum;
}

WienerPath sample_path(std::uint64_t master_seed, std::uint64_t path_index, const TimeGrid& grid,
                       int d_w) {
  if (d_w < 0) throw config_error("sample_path: d_W must be >= 0");
  std::uint64_t stream = master_seed;
  (void)splitmix64(stream);
  stream ^= 0x6a09e667f3bcc909ULL + path_index * 0x9e3779b97f4a7c15ULL;
  std::mt19937_64 rng(splitmix64(stream));

  WienerPath p;
  p.grid = grid;
  p.master_seed = master_seed;
  p.path_index = path_index;
  p.increments.resize(grid.n_steps, d_w);
  const double sd = std::sqrt(grid.dt());
  for (int n = 0; n < grid.n_steps; ++n)
    for (int j = 0; j < d_w; ++j) p.increments(n, j) = sd * standard_normal(rng);
  return p;
}

HypothesisReport verify_hypotheses(const NoiseSpec& spec, int trials, std::uint64_t seed) {
  if (trials < 1) throw config_error("verify_hypotheses: trials must be >= 1");
  std::mt19937_64 rng(seed);
  HypothesisReport rep;
  rep.kind = spec.kind();
  rep.stored_K = spec.stored_K();
  const DomainSpec& dom = spec.domain();
  for (int i = 0; i < trials; ++i) {
    // Mix of scales so the suprema probe both small and large states.
    const double scale = std::exp(2.0 * standard_normal(rng));
    State phi1 = random_state(rng, dom, 0.5);
    State phi2 = random_state(rng, dom, 0.5);
    phi1 *= scale;
    phi2 *= scale;

    const double l2_1 = inner(phi1, phi1);
    rep.max_growth_ratio =
        std::max(rep.max_growth_ratio, spec.hs_norm_sq(0.0, phi1) / (1.0 + l2_1));

    double diff_hs = 0.0;
    for (int j = 0; j < spec.d_w(); ++j) {
      const double dg = spec.sigma()[j] * (spec.gain(j, phi1) - spec.gain(j, phi2));
      diff_hs += dg * dg * spec.directions()[j].mass;
    }
    const State d = phi1 - phi2;
    const double dd = inner(d, d);
    if (dd > 0.0) rep.max_lipschitz_ratio = std::max(rep.max_lipschitz_ratio, diff_hs / dd);

    const StateNorms n1 = norms(phi1);
    rep.max_dz_ratio = std::max(
        rep.max_dz_ratio, spec.dz_hs_norm_sq(0.0, phi1) / (1.0 + n1.dz_l2 * n1.dz_l2));
  }
  const double worst =
      std::max({rep.max_growth_ratio, rep.max_lipschitz_ratio, rep.max_dz_ratio});
  rep.pass = worst <= rep.stored_K * (1.0 + 1e-12);
  rep.margin = rep.stored_K - worst;
  return rep;
}

}  // namespace spe
