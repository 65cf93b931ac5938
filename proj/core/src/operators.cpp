#include "spe/operators.hpp"

#include <array>
#include <cmath>

namespace spe {

Operators::Operators(const DomainSpec& dom, double pad) : dom_(dom), grid_(dom, pad) {
  // Projection of the z-antiderivative onto the cosine family:
  //   m>=1: int_0^zeta cos(m pi z'/h) dz' = (h/(m pi)) sin(m pi zeta/h)
  //   m=0:  int_0^zeta dz' = zeta
  // both expand over cos(m' pi zeta/h) with coefficient
  //   4h / (pi^2 (m^2 - m'^2))   for odd m+m', zero otherwise.
  const int nz = dom.Nz;
  g_proj_ = Eigen::MatrixXd::Zero(nz + 1, nz + 1);
  for (int m = 0; m <= nz; ++m) {
    for (int mp = 1; mp <= nz; ++mp) {
      if ((m + mp) % 2 == 1) {
        g_proj_(m, mp) = 4.0 * dom.depth /
                         (kPi * kPi * (static_cast<double>(m) * m - static_cast<double>(mp) * mp));
      }
    }
  }
}

State Operators::apply_A(const State& y) const {
  if (y.domain() != dom_) throw shape_error("apply_A: mismatched DomainSpec");
  State out(dom_, y.time());
  for (int k = 0; k <= dom_.Nx; ++k) {
    for (int m = 0; m <= dom_.Nz; ++m) {
      const double lam = dom_.lambda(k, m);
      out.v().coeffs()(k, m) = lam * y.v().coeffs()(k, m);
      out.T().coeffs()(k, m) = lam * y.T().coeffs()(k, m);
    }
  }
  return out;
}

State Operators::apply_B(const State& y, const State& yt) const {
  if (y.domain() != dom_) throw shape_error("apply_B: mismatched DomainSpec");
  y.require_same_domain(yt);

  const Eigen::MatrixXd vg = grid_.to_grid(y.v());
  const Eigen::MatrixXd thg = grid_.to_grid(phi_of_v(y.v()));
  const Eigen::MatrixXd vx = grid_.to_grid(yt.v().dx());
  const Eigen::MatrixXd vz = grid_.to_grid(yt.v().dz());
  const Eigen::MatrixXd tx = grid_.to_grid(yt.T().dx());
  const Eigen::MatrixXd tz = grid_.to_grid(yt.T().dz());

  Field bv = grid_.from_grid(vg.cwiseProduct(vx) + thg.cwiseProduct(vz), Parity::Sin, Parity::Cos);
  remove_vertical_mean(bv);
  Field bT = grid_.from_grid(vg.cwiseProduct(tx) + thg.cwiseProduct(tz), Parity::Cos, Parity::Cos);
  return State(std::move(bv), std::move(bT), y.time());
}

State Operators::apply_G(const State& y) const {
  if (y.domain() != dom_) throw shape_error("apply_G: mismatched DomainSpec");
  State out(dom_, y.time());
  // -d_x of the T mode (k,m) is +(k pi/L) sin(k pi x/L) cos(m pi zeta/h);
  // the z-antiderivative then projects through g_proj_.
  for (int k = 1; k <= dom_.Nx; ++k) {
    for (int mp = 1; mp <= dom_.Nz; ++mp) {
      double sum = 0.0;
      for (int m = 0; m <= dom_.Nz; ++m) sum += y.T().coeffs()(k, m) * g_proj_(m, mp);
      out.v().coeffs()(k, mp) = (k * kPi / dom_.L) * sum;
    }
  }
  return out;
}

State Operators::forcing(const State& y, const OperatorToggles& tg) const {
  State f(dom_, y.time());
  if (tg.enable_B) f += apply_B(y, y);
  if (tg.enable_G) f += apply_G(y);
  return f;
}

State b_oracle(const State& y, const State& yt, double pad) {
  const DomainSpec& dom = y.domain();
  y.require_same_domain(yt);
  if (dom.Nx * dom.Nz > 64) throw cost_guard_error("b_oracle: band too large (Nx*Nz > 64)");
  if (pad < 4.0) throw config_error("b_oracle: quadrature grid must be at least 4x the band");

  const CollocationGrid grid(dom, pad);
  const Field theta = phi_of_v(y.v());
  const Field vtx = yt.v().dx();
  const Field vtz = yt.v().dz();
  const Field ttx = yt.T().dx();
  const Field ttz = yt.T().dz();

  const int gx = grid.gx(), gz = grid.gz();
  Eigen::MatrixXd prod_v(gx, gz), prod_T(gx, gz);
  for (int i = 0; i < gx; ++i) {
    const double x = grid.node_x(i);
    for (int j = 0; j < gz; ++j) {
      const double z = grid.node_z(j);
      const double vv = y.v().eval(x, z);
      const double th = theta.eval(x, z);
      prod_v(i, j) = vv * vtx.eval(x, z) + th * vtz.eval(x, z);
      prod_T(i, j) = vv * ttx.eval(x, z) + th * ttz.eval(x, z);
    }
  }

  // Quadrature projection of each basis function.
  State out(dom, y.time());
  const double w = grid.quad_weight();
  for (int k = 1; k <= dom.Nx; ++k) {
    for (int m = 1; m <= dom.Nz; ++m) {
      Field e(dom, Parity::Sin, Parity::Cos);
      e.set_coeff(k, m, 1.0);
      double acc = 0.0;
      for (int i = 0; i < gx; ++i)
        for (int j = 0; j < gz; ++j) acc += prod_v(i, j) * e.eval(grid.node_x(i), grid.node_z(j));
      out.v().coeffs()(k, m) = w * acc / e.mass(k, m);
    }
  }
  for (int k = 0; k <= dom.Nx; ++k) {
    for (int m = 0; m <= dom.Nz; ++m) {
      Field e(dom, Parity::Cos, Parity::Cos);
      e.set_coeff(k, m, 1.0);
      double acc = 0.0;
      for (int i = 0; i < gx; ++i)
        for (int j = 0; j < gz; ++j) acc += prod_T(i, j) * e.eval(grid.node_x(i), grid.node_z(j));
      out.T().coeffs()(k, m) = w * acc / e.mass(k, m);
    }
  }
  return out;
}

namespace {

IdentityRow identity_trial(const Operators& ops, int trial, const State& y, const State& yt,
                           const State& yh) {
  IdentityRow row;
  row.trial = trial;

  const State byy = ops.apply_B(y, y);
  const Field dzz_v = y.v().dz().dz();
  const double lhs31 = byy.v().inner(dzz_v);
  const double scale31 =
      std::sqrt(byy.v().l2_sq()) * std::sqrt(dzz_v.l2_sq()) + 1e-300;
  row.res_31 = std::abs(lhs31) / scale31;

  const State byt = ops.apply_B(y, yt);
  const State byh = ops.apply_B(y, yh);
  const double p1 = inner(byt, yh);
  const double p2 = inner(byh, yt);
  const double scale_anti = std::abs(p1) + std::abs(p2) +
                            norms(byt).l2 * norms(yh).l2 + norms(byh).l2 * norms(yt).l2 + 1e-300;
  row.res_antisym = std::abs(p1 + p2) / scale_anti;

  const StateNorms ny = norms(y), nyt = norms(yt), nyh = norms(yh);
  row.res_energy = std::abs(inner(byt, yt)) / (ny.h1 * nyt.h1 * nyt.h1 + 1e-300);

  const double majorant =
      nyt.h1 * std::sqrt(ny.l2 * ny.h1) * std::sqrt(nyh.l2 * nyh.h1) +
      nyt.dz_l2 * ny.h1 * std::sqrt(nyh.l2 * nyh.h1);
  row.ratio_33 = std::abs(p1) / (majorant + 1e-300);
  return row;
}

}  // namespace

IdentityReport identity_suite(std::uint64_t seed, const DomainSpec& dom, int trials,
                              double tol_31, double tol_bilinear) {
  if (trials < 1) throw config_error("identity_suite: trials must be >= 1");
  IdentityReport rep;
  const Operators ops(dom);
  std::mt19937_64 rng(seed);
  bool over_tol = false;
  std::vector<std::array<State, 3>> triples;
  triples.reserve(trials);
  for (int i = 0; i < trials; ++i) {
    triples.push_back({random_state(rng, dom), random_state(rng, dom), random_state(rng, dom)});
    const auto& tr = triples.back();
    IdentityRow row = identity_trial(ops, i, tr[0], tr[1], tr[2]);
    rep.max_res_31 = std::max(rep.max_res_31, row.res_31);
    rep.max_res_antisym = std::max(rep.max_res_antisym, row.res_antisym);
    rep.max_res_energy = std::max(rep.max_res_energy, row.res_energy);
    rep.max_ratio_33 = std::max(rep.max_ratio_33, row.ratio_33);
    over_tol = over_tol || row.res_31 > tol_31 || row.res_antisym > tol_bilinear ||
               row.res_energy > tol_bilinear;
    rep.rows.push_back(row);
  }
  if (over_tol) {
    // Separate aliasing error from logic error: repeat the same states on
    // a pad=2 grid and report both sets of residuals.
    rep.rerun_at_pad2 = true;
    const Operators ops2(dom, 2.0);
    for (int i = 0; i < trials; ++i) {
      const auto& tr = triples[i];
      rep.pad2_rows.push_back(identity_trial(ops2, i, tr[0], tr[1], tr[2]));
    }
  }
  return rep;
}

}  // namespace spe
