#include "conemaflow/elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "conemaflow/initial_data.hpp"
#include "conemaflow/kernels.hpp"
#include "conemaflow/spectral.hpp"

namespace conemaflow {

Field solve_poisson(const ConeGeometry& g, const Field& f) {
  const std::size_t n = f.size();
  const double m = g.mean(f);
  Field rhs(f);
  for (auto& v : rhs) v -= m;
  Field psi(n);
  if (g.is_torus()) {
    TorusSpectral::get(g.N).solve_shifted(0.0, -1.0, rhs.data(), psi.data());
  } else {
    Field lo(n), di(n), up(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      const double w = g.weights[i];
      lo[i] = w * g.tri_lower[i];
      di[i] = w * g.tri_diag[i];
      up[i] = w * g.tri_upper[i];
      b[i] = w * rhs[i];
    }
    // pin psi_0 = 0; the dropped equation follows from compatibility
    di[0] = 1.0;
    up[0] = 0.0;
    b[0] = 0.0;
    solve_tridiag_pivoted(lo, di, up, b, psi);
  }
  const double pm = g.mean(psi);
  for (auto& v : psi) v -= pm;
  return psi;
}

Field ma_rhs_density(const ConeGeometry& g, const ForcingModel& F, const Field& phi, double eps) {
  const Field S = source_field(g, eps);
  Field out(phi.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(-F.eval(phi[i], i) - S[i]);
  return out;
}

EllipticSolution solve_regularized_ma(const ConeGeometry& g, const Field& rhs, bool normalize) {
  for (double v : rhs)
    if (!(v > 0.0)) throw std::runtime_error("RHS nonpositive");
  EllipticSolution sol;
  sol.c_norm = normalize ? g.V0 / g.integrate(rhs) : 1.0;
  Field f(rhs.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = sol.c_norm * rhs[i] - 1.0;
  sol.psi = solve_poisson(g, f);
  const Field lap = g.laplacian(sol.psi);
  const double fm = g.mean(f);
  double r = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) r = std::max(r, std::fabs(lap[i] - (f[i] - fm)));
  sol.residual = r;
  return sol;
}

EllipticSolution solve_regularized_ma(const ConeGeometry& g, const ForcingModel& F, const Field& source, Field psi,
                                      double offset, double tol, int max_iter) {
  const std::size_t n = psi.size();
  auto residual = [&](const Field& u, Field& q, Field& G) -> double {
    q = g.laplacian(u);
    G.resize(n);
    double m = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      q[i] += 1.0;
      if (!(q[i] > 0.0)) return INFINITY;
      G[i] = std::log(q[i]) + F.eval(u[i], i) + source[i] + offset;
      m = std::max(m, std::fabs(G[i]));
    }
    return m;
  };
  EllipticSolution sol;
  Field q, G, qt, Gt, d(n), ut(n);
  double rn = residual(psi, q, G);
  if (!std::isfinite(rn)) throw std::runtime_error("RHS nonpositive");
  for (int it = 0; it < max_iter && rn > tol; ++it) {
    ++sol.newton_iters;
    if (g.is_torus()) {
      // (diag(-q F') - Lap) d = q G, SPD when F' < 0
      Field a(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        a[i] = -q[i] * F.dv(psi[i], i);
        if (!(a[i] > 0.0)) throw std::runtime_error("Newton divergence: torus Newton system is not SPD");
        b[i] = q[i] * G[i];
      }
      pcg_shifted_torus(g, a, 1.0, b, d, std::clamp(rn, 1e-14, 1e-4), 20000);
    } else {
      Field lo(n), di(n), up(n), b(n);
      for (std::size_t i = 0; i < n; ++i) {
        const double w = g.weights[i];
        lo[i] = w * g.tri_lower[i];
        up[i] = w * g.tri_upper[i];
        di[i] = w * (g.tri_diag[i] + q[i] * F.dv(psi[i], i));
        b[i] = -w * q[i] * G[i];
      }
      solve_tridiag_pivoted(lo, di, up, b, d);
    }
    double alpha = 1.0;
    bool ok = false;
    for (int ls = 0; ls < 40; ++ls) {
      for (std::size_t i = 0; i < n; ++i) ut[i] = psi[i] + alpha * d[i];
      const double rt = residual(ut, qt, Gt);
      if (std::isfinite(rt) && rt < rn) {
        psi.swap(ut);
        q.swap(qt);
        G.swap(Gt);
        rn = rt;
        ok = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!ok) break;
  }
  sol.psi = std::move(psi);
  sol.residual = rn;
  if (!(rn <= std::max(tol, 1e-9))) throw std::runtime_error("Newton divergence in elliptic solve");
  return sol;
}

ManufacturedCase manufactured_torus(const ConeGeometry& g, double delta0, double bump_amp) {
  if (!g.is_torus()) throw std::invalid_argument("manufactured case is defined on the torus");
  const double b = g.beta, pi = std::numbers::pi, tp = 2.0 * pi;
  ManufacturedCase mc;
  mc.delta0 = delta0;
  const std::size_t n = g.size();
  mc.phi_star.resize(n);
  mc.f_star.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = g.x1[i], y = g.x2[i], S = g.s2[i];
    const double bump = bump_amp * (std::sin(tp * x) * std::sin(tp * y) + 0.5 * std::cos(tp * x));
    const double lap_bump = bump_amp * (-2.0 * tp * tp * std::sin(tp * x) * std::sin(tp * y) -
                                        0.5 * tp * tp * std::cos(tp * x));
    mc.phi_star[i] = delta0 * chi_eps(0.0, S, b) + bump;
    if (g.is_divisor(i)) {
      // limit of (1 + Lap phi*) |s|^{2(1-beta)} at p
      mc.f_star[i] = (b == 1.0) ? -std::log(1.0 + delta0 * 2.0 * pi * pi + lap_bump)
                                : -std::log(2.0 * pi * pi * delta0);
      continue;
    }
    const double gx = 0.5 * pi * std::sin(tp * x), gy = 0.5 * pi * std::sin(tp * y);
    const double lapS = pi * pi * (std::cos(tp * x) + std::cos(tp * y));
    const double lap_sb = b * std::pow(S, b - 1) * lapS + b * (b - 1) * std::pow(S, b - 2) * (gx * gx + gy * gy);
    const double dens = 1.0 + delta0 * lap_sb / (b * b) + lap_bump;
    if (!(dens > 0.0)) throw std::invalid_argument("manufactured target is not admissible");
    mc.f_star[i] = -std::log(dens) - (1.0 - b) * std::log(S);
  }
  return mc;
}

namespace {

void shift_sup_symmetric(Field& v, const Field& base, double* asym) {
  const double c = sup_symmetric_shift(v, base);
  for (auto& x : v) x += c;
  double a = -INFINITY, bb = -INFINITY;
  for (std::size_t i = 0; i < v.size(); ++i) {
    a = std::max(a, base[i] - v[i]);
    bb = std::max(bb, v[i] - base[i]);
  }
  if (asym) *asym = std::fabs(a - bb);
}

}  // namespace

StationarityReport stationarity_pipeline(const ConeGeometry& g, const Field& phi0, const ForcingModel& F,
                                         const StationarityOptions& opt) {
  StationarityReport rep;
  rep.failed_stage.clear();
  try {
    FlowProblem p0 = make_problem(g, F, 0.0);
    rep.phi0_residual = stationary_residual(p0, phi0);
  } catch (const std::exception& e) {
    rep.failed_stage = std::string("phi0: ") + e.what();
    return rep;
  }
  const double K = F.lipschitz_K;
  std::vector<int> js = opt.j_list;
  if (opt.include_limit_member) js.push_back(-1);
  std::vector<double> eps = opt.eps_list;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  const double eps_min = eps.empty() ? 0.0 : eps.back();

  const Trajectory* limit = nullptr;
  std::vector<Trajectory> keep;
  keep.reserve(eps.size() * js.size());
  for (double e : eps) {
    EllipticSolution pe;
    try {
      pe = solve_regularized_ma(g, ma_rhs_density(g, F, phi0, e), true);
    } catch (const std::exception& ex) {
      rep.failed_stage = std::string("psi_eps: ") + ex.what();
      return rep;
    }
    double asym = 0.0;
    shift_sup_symmetric(pe.psi, phi0, &asym);
    rep.c_eps.push_back(pe.c_norm);
    rep.sym_residual_psi_eps.push_back(asym);
    rep.c_eps_j.emplace_back();
    for (int j : js) {
      try {
        const Field phij = (j < 0) ? phi0 : mollify(g, phi0, mollification_scale(opt.sigma0, j));
        EllipticSolution pj = solve_regularized_ma(g, ma_rhs_density(g, F, phij, e), true);
        shift_sup_symmetric(pj.psi, pe.psi, nullptr);
        rep.c_eps_j.back().push_back(pj.c_norm);
        FlowProblem p = make_problem(g, F, e, -std::log(pj.c_norm) + std::log(pe.c_norm));
        keep.push_back(run(p, pj.psi, opt.T, opt.snapshots, opt.controller, NewtonOptions{}, j));
      } catch (const std::exception& ex) {
        rep.failed_stage = "flow(eps=" + std::to_string(e) + ", j=" + std::to_string(j) + "): " + ex.what();
        return rep;
      }
      const Trajectory& tr = keep.back();
      const double s0 = tr.snaps.front().sup_phidot;
      for (const auto& s : tr.snaps) {
        PhidotRow row{e, j, s.t, s.sup_phidot,
                      std::exp(K * s.t) * s0 * (1.0 + opt.gronwall_rel_tol) + opt.gronwall_abs_tol, true};
        row.pass = row.sup_phidot <= row.bound;
        rep.gronwall_pass = rep.gronwall_pass && row.pass;
        rep.phidot.push_back(row);
      }
      if (e == eps_min && (j < 0 || (!opt.include_limit_member && j == js.back()))) limit = &keep.back();
    }
  }
  if (limit) {
    for (const auto& s : limit->snaps) {
      if (std::fabs(s.t - opt.probe_time) <= 1e-12) rep.limit_phidot_probe = s.sup_phidot;
      if (s.t <= 0.0) continue;
      double d = 0.0, dr = 0.0;
      for (std::size_t i = 0; i < phi0.size(); ++i) {
        d = std::max(d, std::fabs(s.phi[i] - phi0[i]));
        if (opt.reference) dr = std::max(dr, std::fabs(s.phi[i] - (*opt.reference)[i]));
      }
      rep.limit_distance_by_t.emplace_back(s.t, opt.reference ? dr : d);
      rep.limit_max_distance = std::max(rep.limit_max_distance, d);
      if (opt.reference) rep.limit_max_distance_reference = std::max(rep.limit_max_distance_reference, dr);
    }
    rep.phidot_pass = rep.limit_phidot_probe <= opt.tol_phidot;
    const double dist = opt.reference ? rep.limit_max_distance_reference : rep.limit_max_distance;
    rep.stationary_pass = dist <= opt.tol_stationary;
  }
  ConeChart chart = opt.chart;
  chart.beta = g.beta;
  chart.divisor_node = g.divisor_nodes.front();
  const double cap = std::min(1.0, 1.0 / g.beta - 1.0);
  if (cap > 0.0) rep.holder = cone_holder_report(g, phi0, chart, opt.holder_alpha_factor * cap);
  return rep;
}

}  // namespace conemaflow
