#include "conemaflow/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "conemaflow/elliptic.hpp"
#include "conemaflow/holder.hpp"
#include "conemaflow/thread_pool.hpp"

namespace conemaflow {

bool EstimateOptions::is_enabled(const std::string& name) const {
  return enabled.empty() || std::find(enabled.begin(), enabled.end(), name) != enabled.end();
}

bool EstimateReport::pass() const {
  for (const auto& c : checks)
    if (!c.pass && !c.warning) return false;
  return true;
}

const CheckRecord* EstimateReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

ojson EstimateReport::to_json() const {
  ojson j;
  j["pass"] = pass();
  j["checks"] = ojson::array();
  for (const auto& c : checks) {
    ojson r;
    r["name"] = c.name;
    r["measured"] = c.measured;
    r["tolerance"] = c.tolerance;
    r["pass"] = c.pass;
    r["warning"] = c.warning;
    if (!c.message.empty()) r["message"] = c.message;
    r["details"] = c.details;
    j["checks"].push_back(r);
  }
  return j;
}

EstimateContext make_estimate_context(const FamilyRun& fam, double delta, double R_max) {
  const ConeGeometry& g = *fam.geom;
  EstimateContext ctx;
  ctx.delta = delta;
  ctx.gamma = INFINITY;
  double A = 0.0;
  for (double e : fam.spec.eps_list) {
    Field dchi = chi_field(g, e);
    for (auto& v : dchi) v *= delta;
    RegularizationParams reg{e, delta, 0.3};
    Field om = omega_eps_density(g, reg);
    const Field f = f_eps_field(g, reg);
    double sf = 0.0;
    for (double v : f) sf = std::max(sf, std::fabs(v));
    ctx.sup_f.push_back(sf);
    ctx.C_f = std::max(ctx.C_f, sf);
    ctx.gamma = std::min(ctx.gamma, *std::min_element(om.begin(), om.end()));
    for (const auto& init : fam.initial)
      for (std::size_t i = 0; i < init.size(); ++i) A = std::max(A, std::fabs(init[i] - dchi[i]));
    ctx.delta_chi.push_back(std::move(dchi));
    ctx.omega.push_back(std::move(om));
  }
  if (!(R_max > 0.0)) R_max = 4.0 * std::max(A, 1.0);
  ctx.horizon = existence_horizon(*fam.forcing, A, ctx.delta_chi, ctx.C_f, R_max);
  return ctx;
}

std::vector<MemberIndex> members_by_rank(const FamilyRun& fam) {
  std::vector<MemberIndex> m;
  for (std::size_t e = 0; e < fam.n_eps(); ++e)
    for (std::size_t j = 0; j < fam.n_j(); ++j) m.push_back({e, j});
  std::stable_sort(m.begin(), m.end(), [](const MemberIndex& a, const MemberIndex& b) {
    return a.e + a.j < b.e + b.j || (a.e + a.j == b.e + b.j && a.e < b.e);
  });
  return m;
}

namespace {

// max of a per-member constant over the coarse and the fine half of the family
std::pair<double, double> halves(const FamilyRun& fam, const std::vector<std::vector<double>>& c) {
  const auto order = members_by_rank(fam);
  const std::size_t n = order.size(), half = n / 2;
  double lo = 0.0, hi = 0.0;
  for (std::size_t k = 0; k < half; ++k) lo = std::max(lo, c[order[k].e][order[k].j]);
  for (std::size_t k = n - half; k < n; ++k) hi = std::max(hi, c[order[k].e][order[k].j]);
  if (half == 0 && n == 1) lo = hi = c[order[0].e][order[0].j];
  return {lo, hi};
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// (max - min) / median; differences below abs_floor count as zero
double spread(const std::vector<double>& v, double abs_floor = 0.0) {
  if (v.size() < 2) return 0.0;
  const auto [mn, mx] = std::minmax_element(v.begin(), v.end());
  if (*mx - *mn <= abs_floor) return 0.0;
  const double md = median(v);
  if (md == 0.0) return (*mx == *mn) ? 0.0 : INFINITY;
  return (*mx - *mn) / std::fabs(md);
}

Field density_of(const ConeGeometry& g, const Field& phi) {
  Field d = g.laplacian(phi);
  for (auto& v : d) v += 1.0;
  return d;
}

std::vector<double> times_from(const FamilyRun& fam, double eta) {
  std::vector<double> out;
  for (double t : fam.times())
    if (t >= eta * (1.0 - 1e-12) && t > 0.0) out.push_back(t);
  return out;
}

template <class Fn>
void for_members(const FamilyRun& fam, Fn&& f) {
  const std::size_t nj = fam.n_j();
  parallel_for(fam.n_eps() * nj, [&](std::size_t idx) { f(idx / nj, idx % nj); });
}

using Grid = std::vector<std::vector<double>>;
using Rows = std::vector<std::vector<double>>;
Grid grid_of(const FamilyRun& fam, double v = 0.0) { return Grid(fam.n_eps(), std::vector<double>(fam.n_j(), v)); }

}  // namespace

CheckRecord uniform_linf_check(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt) {
  CheckRecord r;
  r.name = "uniform_linf";
  r.tolerance = opt.linf_drift;
  Grid c = grid_of(fam);
  bool under_G = true;
  double worst = INFINITY;
  for (std::size_t e = 0; e < fam.n_eps(); ++e)
    for (std::size_t j = 0; j < fam.n_j(); ++j)
      for (const auto& s : fam.traj[e][j].snaps) {
        double hi = -INFINITY, lo = INFINITY;
        for (std::size_t i = 0; i < s.phi.size(); ++i) {
          const double v = s.phi[i] - ctx.delta_chi[e][i];
          hi = std::max(hi, v);
          lo = std::min(lo, v);
        }
        c[e][j] = std::max({c[e][j], std::fabs(hi), std::fabs(lo)});
        const double up = ctx.horizon.upper(s.t), dn = ctx.horizon.lower(s.t);
        worst = std::min({worst, up - hi, lo - dn});
        if (hi > up + 1e-12 || lo < dn - 1e-12) under_G = false;
        r.table.push_back({s.t, fam.spec.eps_list[e], double(fam.spec.j_list[j]), std::max(std::fabs(hi), std::fabs(lo))});
      }
  const auto [coarse, fine] = halves(fam, c);
  r.measured = coarse > 0.0 ? fine / coarse : 1.0;
  const bool drift_ok = fine <= opt.linf_drift * coarse || fine == coarse;
  r.pass = drift_ok && under_G;
  r.details = {{"C_coarse", coarse}, {"C_fine", fine}, {"G_T", ctx.horizon.upper(fam.spec.T)},
               {"Tbar", ctx.horizon.Tbar}, {"min_margin_to_G", worst}, {"bounded_by_G", under_G}};
  if (!under_G) r.message = "sup phi exceeds G(t)";
  return r;
}

CheckRecord det_ratio_check(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt) {
  CheckRecord r;
  r.name = "det_ratio";
  r.tolerance = opt.uniform_tol;
  Grid c = grid_of(fam);
  std::vector<std::vector<Rows>> rows(fam.n_eps(), std::vector<Rows>(fam.n_j()));
  for_members(fam, [&](std::size_t e, std::size_t j) {
    for (const auto& s : fam.traj[e][j].snaps) {
      if (s.t <= 0.0) continue;
      const Field d = density_of(*fam.geom, s.phi);
      double qmin = INFINITY, qmax = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double q = d[i] / ctx.omega[e][i];
        qmin = std::min(qmin, q);
        qmax = std::max(qmax, q);
      }
      // q >= t / C and q <= e^{C/t}
      const double C = std::max(s.t / qmin, s.t * std::log(std::max(qmax, 1.0)));
      c[e][j] = std::max(c[e][j], C);
      rows[e][j].push_back({s.t, fam.spec.eps_list[e], double(fam.spec.j_list[j]), C});
    }
  });
  for (auto& re : rows)
    for (auto& rj : re) r.table.insert(r.table.end(), rj.begin(), rj.end());
  const auto [coarse, fine] = halves(fam, c);
  r.measured = (coarse > 0.0) ? std::fabs(fine - coarse) / coarse : 0.0;
  r.pass = r.measured <= opt.uniform_tol;
  r.details = {{"C_coarse", coarse}, {"C_fine", fine}, {"relative_difference", r.measured}};
  return r;
}

CheckRecord gradient_check(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt) {
  CheckRecord r;
  r.name = "gradient";
  r.tolerance = opt.gradient_spread;
  const auto ts = times_from(fam, opt.eta);
  std::vector<Grid> val(ts.size(), grid_of(fam));
  for_members(fam, [&](std::size_t e, std::size_t j) {
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const Field& phi = fam.traj[e][j].at(ts[k]).phi;
      Field v(phi.size());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] = phi[i] - ctx.delta_chi[e][i];
      const Field gr = fam.geom->grad_norm_sq(v);
      double m = 0.0;
      for (std::size_t i = 0; i < gr.size(); ++i) m = std::max(m, gr[i] / ctx.omega[e][i]);
      val[k][e][j] = m;
    }
  });
  double worst = 0.0, C = 0.0;
  ojson per_t = ojson::array();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    std::vector<double> flat;
    for (std::size_t e = 0; e < fam.n_eps(); ++e)
      for (std::size_t j = 0; j < fam.n_j(); ++j) {
        flat.push_back(val[k][e][j]);
        r.table.push_back({ts[k], fam.spec.eps_list[e], double(fam.spec.j_list[j]), val[k][e][j]});
      }
    const double sp = spread(flat);
    worst = std::max(worst, sp);
    const double mx = *std::max_element(flat.begin(), flat.end());
    // |grad| <= exp(exp(C/t))
    C = std::max(C, ts[k] * std::log(std::log(std::max(std::sqrt(mx), std::exp(1.0)))));
    per_t.push_back({{"t", ts[k]}, {"median", median(flat)}, {"spread", sp}});
  }
  r.measured = worst;
  r.pass = worst <= opt.gradient_spread && std::isfinite(C);
  r.details = {{"per_t", per_t}, {"envelope_C", C}};
  return r;
}

CheckRecord metric_equivalence_check(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt) {
  CheckRecord r;
  r.name = "metric_equivalence";
  r.tolerance = opt.uniform_tol;
  const ConeGeometry& g = *fam.geom;
  const auto ts = times_from(fam, opt.eta);
  std::vector<Grid> qmax(ts.size(), grid_of(fam)), qinv(ts.size(), grid_of(fam));
  for_members(fam, [&](std::size_t e, std::size_t j) {
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const Field d = density_of(g, fam.traj[e][j].at(ts[k]).phi);
      double lo = INFINITY, hi = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        const double q = d[i] / ctx.omega[e][i];
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
      qmax[k][e][j] = hi;
      qinv[k][e][j] = 1.0 / lo;
    }
  });
  double worst = 0.0;
  ojson per_t = ojson::array();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    std::vector<double> a, b;
    for (std::size_t e = 0; e < fam.n_eps(); ++e)
      for (std::size_t j = 0; j < fam.n_j(); ++j) {
        a.push_back(qmax[k][e][j]);
        b.push_back(qinv[k][e][j]);
        r.table.push_back({ts[k], fam.spec.eps_list[e], double(fam.spec.j_list[j]), std::max(qmax[k][e][j], qinv[k][e][j])});
      }
    worst = std::max({worst, spread(a), spread(b)});
    per_t.push_back({{"t", ts[k]}, {"max_q", *std::max_element(a.begin(), a.end())},
                     {"max_inv_q", *std::max_element(b.begin(), b.end())}});
  }
  // smallest eps against the model cone density on dist >= 0.25, two largest j
  const std::size_t el = fam.n_eps() - 1;
  const Field model = model_cone_density(g, ctx.delta);
  auto cone_C = [&](std::size_t j) {
    double C = 1.0;
    for (double t : ts) {
      const Field d = density_of(g, fam.traj[el][j].at(t).phi);
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (g.dist[i] < 0.25 || !(model[i] > 0.0)) continue;
        const double ratio = d[i] / model[i];
        C = std::max({C, ratio, 1.0 / ratio});
      }
    }
    return C;
  };
  const double C_hi = cone_C(fam.n_j() - 1);
  const double C_mid = fam.n_j() > 1 ? cone_C(fam.n_j() - 2) : C_hi;
  const bool cone_ok = std::isfinite(C_hi) && std::fabs(C_hi - C_mid) <= opt.uniform_tol * C_mid;
  r.measured = worst;
  r.pass = worst <= opt.uniform_tol && cone_ok;
  r.details = {{"per_t", per_t}, {"family_spread", worst}, {"cone_C", C_hi}, {"cone_C_previous_j", C_mid}};
  return r;
}

CheckRecord phidot_derivative_check(const FamilyRun& fam, const EstimateOptions& opt) {
  CheckRecord r;
  r.name = "phidot_derivatives";
  r.tolerance = opt.phidot_spread;
  const ConeGeometry& g = *fam.geom;
  const auto ts = times_from(fam, opt.eta);
  std::vector<Grid> gr(ts.size(), grid_of(fam)), lp(ts.size(), grid_of(fam));
  for_members(fam, [&](std::size_t e, std::size_t j) {
    const FlowProblem p = make_problem(g, *fam.forcing, fam.spec.eps_list[e]);
    for (std::size_t k = 0; k < ts.size(); ++k) {
      Field dens;
      const Field fd = flow_rhs(p, fam.traj[e][j].at(ts[k]).phi, &dens);
      const Field g2 = g.grad_norm_sq(fd);
      const Field l2 = g.laplacian(fd);
      double a = 0.0, b = 0.0;
      for (std::size_t i = 0; i < fd.size(); ++i) {
        a = std::max(a, g2[i] / dens[i]);
        b = std::max(b, std::fabs(l2[i]) / dens[i]);
      }
      gr[k][e][j] = a;
      lp[k][e][j] = b;
    }
  });
  double worst = 0.0, worst_lap = 0.0;
  ojson per_t = ojson::array();
  for (std::size_t k = 0; k < ts.size(); ++k) {
    std::vector<double> a, b;
    for (std::size_t e = 0; e < fam.n_eps(); ++e)
      for (std::size_t j = 0; j < fam.n_j(); ++j) {
        a.push_back(gr[k][e][j]);
        b.push_back(lp[k][e][j]);
        r.table.push_back({ts[k], fam.spec.eps_list[e], double(fam.spec.j_list[j]), gr[k][e][j]});
      }
    // phidot at solver-tolerance scale carries no spread information
    const double sa = spread(a, 1e-10), sb = spread(b, 1e-8);
    worst = std::max(worst, sa);
    worst_lap = std::max(worst_lap, sb);
    per_t.push_back({{"t", ts[k]}, {"grad_median", median(a)}, {"grad_spread", sa},
                     {"lap_median", median(b)}, {"lap_spread", sb}});
  }
  r.measured = worst;
  r.pass = worst <= opt.phidot_spread && worst_lap <= opt.phidot_spread;
  r.details = {{"per_t", per_t}, {"grad_spread", worst}, {"lap_spread", worst_lap}};
  return r;
}

CheckRecord holder_check(const FamilyRun& fam, const EstimateOptions& opt) {
  CheckRecord r;
  r.name = "holder";
  const auto ts = times_from(fam, opt.eta);
  const Trajectory& lim = fam.traj[fam.n_eps() - 1][fam.n_j() - 1];
  r.tolerance = 0.05;
  bool stable = true;
  double m = 0.0, change = 0.0;
  ojson per_t = ojson::array();
  for (double t : ts) {
    const HolderResult h = holder_seminorm(*fam.geom, lim.at(t).phi, opt.holder_alpha);
    stable = stable && h.stable;
    m = std::max(m, h.seminorm);
    const std::size_t k = h.per_sample.size();
    if (k >= 2 && h.per_sample[k - 1] > 0.0)
      change = std::max(change, std::fabs(h.per_sample[k - 1] - h.per_sample[k - 2]) / h.per_sample[k - 1]);
    per_t.push_back({{"t", t}, {"seminorm", h.seminorm}, {"per_sample", h.per_sample}, {"stable", h.stable}});
    r.table.push_back({t, lim.eps, double(lim.j), h.seminorm});
  }
  r.measured = change;
  r.pass = stable && std::isfinite(m);
  r.details = {{"alpha", opt.holder_alpha}, {"seminorm", m}, {"per_t", per_t}};
  return r;
}

double barrier_h(double t, double K, double phi0_sup, double u_sup, double Chat) {
  if (t <= 0.0) return 0.0;
  double h = -t * phi0_sup - t * u_sup + (t * std::log(t) - t) * std::exp(-K * t);
  if (K != 0.0) {
    auto f = [K](double s) { return s > 0.0 ? std::exp(-K * s) * s * std::log(s) : 0.0; };
    h += K * boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, 0.0, t, 10, 1e-13);
    h += Chat * (-std::expm1(-K * t)) / K;
  } else {
    h += Chat * t;
  }
  return h;
}

CheckRecord barrier_check(const FamilyRun& fam, const EstimateOptions& opt) {
  CheckRecord r;
  r.name = "barrier";
  r.tolerance = opt.barrier_tol;
  const ConeGeometry& g = *fam.geom;
  const ForcingModel& F = *fam.forcing;
  const double K = fam.K;
  Grid margin = grid_of(fam, INFINITY);
  Grid chat = grid_of(fam);
  std::vector<std::vector<Rows>> rows(fam.n_eps(), std::vector<Rows>(fam.n_j()));
  for_members(fam, [&](std::size_t e, std::size_t j) {
    const Field& p0 = fam.initial[j];
    const Field S = source_field(g, fam.spec.eps_list[e]);
    Field rhs(p0.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = std::exp(-F.eval(0.0, i) - K * p0[i] - S[i]);
    const EllipticSolution u = solve_regularized_ma(g, rhs, true);
    const double Chat = std::log(u.c_norm);
    chat[e][j] = Chat;
    double p0s = 0.0, us = 0.0;
    for (double v : p0) p0s = std::max(p0s, std::fabs(v));
    for (double v : u.psi) us = std::max(us, std::fabs(v));
    for (const auto& s : fam.traj[e][j].snaps) {
      if (s.t > opt.barrier_t_max * (1.0 + 1e-12)) continue;
      const double t = s.t, ek = std::exp(K * t);
      const double shift = barrier_h(t, K, p0s, us, Chat) * ek - opt.barrier_m * p0s * t - opt.barrier_l * std::fabs(Chat) * t;
      double m = INFINITY;
      for (std::size_t i = 0; i < p0.size(); ++i) {
        const double psi = (1.0 - t * ek) * p0[i] + t * ek * u.psi[i] + shift;
        m = std::min(m, s.phi[i] - psi);
      }
      margin[e][j] = std::min(margin[e][j], m);
      rows[e][j].push_back({t, fam.spec.eps_list[e], double(fam.spec.j_list[j]), m});
    }
  });
  double worst = INFINITY;
  for (std::size_t e = 0; e < fam.n_eps(); ++e)
    for (std::size_t j = 0; j < fam.n_j(); ++j) {
      worst = std::min(worst, margin[e][j]);
      r.table.insert(r.table.end(), rows[e][j].begin(), rows[e][j].end());
    }
  r.measured = worst;
  r.pass = worst >= -opt.barrier_tol;
  r.details = {{"min_margin", worst}, {"m", opt.barrier_m}, {"l", opt.barrier_l}, {"t_max", opt.barrier_t_max},
               {"Chat", chat}};
  if (!r.pass) r.message = "barrier violated, min margin " + std::to_string(worst);
  return r;
}

CheckRecord jeffres_uniqueness_diag(const ConeGeometry& g, const Trajectory& a, const Trajectory& b, double K,
                                    const EstimateOptions& opt) {
  CheckRecord r;
  r.name = "jeffres_uniqueness";
  r.tolerance = std::max(5.0 * opt.discretization_error, 1e-10);
  double d = 0.0;
  double d_min = 2.0 * g.h;
  double closest = INFINITY;
  for (const auto& sa : a.snaps) {
    if (sa.t < opt.eta * (1.0 - 1e-12)) continue;
    const Snapshot* sb = nullptr;
    for (const auto& s : b.snaps)
      if (std::fabs(s.t - sa.t) <= 1e-12 * std::max(1.0, sa.t)) sb = &s;
    if (!sb) continue;
    d = std::max(d, sup_distance(sa.phi, sb->phi));
    double best = -INFINITY;
    std::size_t arg = 0;
    const double w = std::exp(-K * sa.t);
    for (std::size_t i = 0; i < sa.phi.size(); ++i) {
      const double v = w * (sa.phi[i] + opt.jeffres_a * std::pow(g.s2[i], opt.jeffres_q) - sb->phi[i]);
      if (v > best) {
        best = v;
        arg = i;
      }
    }
    closest = std::min(closest, g.dist[arg]);
    r.table.push_back({sa.t, a.eps, double(a.j), g.dist[arg]});
  }
  r.measured = d;
  r.pass = d <= r.tolerance;
  r.warning = r.pass && closest < d_min;
  if (!r.pass) r.message = "limit trajectories differ by " + std::to_string(d);
  else if (r.warning) r.message = "perturbed maximum attained within " + std::to_string(d_min) + " of D";
  r.details = {{"distance", d}, {"tol_unique", r.tolerance}, {"a", opt.jeffres_a}, {"q", opt.jeffres_q},
               {"min_argmax_distance_to_D", closest}, {"d_min", d_min}};
  return r;
}

Field gauss_curvature(const ConeGeometry& g, const Field& q) {
  Field lq(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) lq[i] = std::log(q[i]);
  Field out = g.laplacian(lq);
  const double K0 = g.is_torus() ? 0.0 : 1.0;
  for (std::size_t i = 0; i < q.size(); ++i) out[i] = (K0 - 0.5 * out[i]) / q[i];
  return out;
}

Field third_order_proxy(const ConeGeometry& g, const Field& q) {
  Field out = g.grad_norm_sq(q);
  for (std::size_t i = 0; i < q.size(); ++i) out[i] /= q[i] * q[i] * q[i];
  return out;
}

CheckRecord local_curvature_check(const FamilyRun& fam, const EstimateOptions& opt) {
  CheckRecord r;
  r.name = "local_curvature";
  r.tolerance = opt.uniform_tol;
  const ConeGeometry& g = *fam.geom;
  const auto ts = times_from(fam, opt.eta);
  auto radii = opt.curvature_annuli;
  std::sort(radii.begin(), radii.end());
  const std::size_t na = radii.size();
  // constants per annulus, member
  std::vector<Grid> Rm(na, grid_of(fam)), S(na, grid_of(fam));
  for_members(fam, [&](std::size_t e, std::size_t j) {
    for (double t : ts) {
      const Field q = density_of(g, fam.traj[e][j].at(t).phi);
      const Field kc = gauss_curvature(g, q);
      const Field s3 = third_order_proxy(g, q);
      for (std::size_t a = 0; a < na; ++a)
        for (std::size_t i = 0; i < q.size(); ++i) {
          if (g.is_divisor(i) || g.dist[i] < radii[a] || g.dist[i] >= 2.0 * radii[a]) continue;
          Rm[a][e][j] = std::max(Rm[a][e][j], std::fabs(kc[i]));
          S[a][e][j] = std::max(S[a][e][j], s3[i]);
        }
    }
  });
  bool uniform = true, scaling = true;
  double drift = 0.0;
  ojson ann = ojson::array();
  std::vector<double> rm_c, s_c;
  for (std::size_t a = 0; a < na; ++a) {
    const auto [rc, rf] = halves(fam, Rm[a]);
    const auto [sc, sf] = halves(fam, S[a]);
    uniform = uniform && rf <= (1.0 + opt.uniform_tol) * rc + 1e-12 && sf <= (1.0 + opt.uniform_tol) * sc + 1e-12;
    if (rc > 0.0) drift = std::max(drift, rf / rc - 1.0);
    if (sc > 0.0) drift = std::max(drift, sf / sc - 1.0);
    rm_c.push_back(std::max(rc, rf));
    s_c.push_back(std::max(sc, sf));
    ann.push_back({{"r", radii[a]}, {"Rm_coarse", rc}, {"Rm_fine", rf}, {"S_coarse", sc}, {"S_fine", sf}});
    for (std::size_t e = 0; e < fam.n_eps(); ++e)
      for (std::size_t j = 0; j < fam.n_j(); ++j)
        r.table.push_back({radii[a], fam.spec.eps_list[e], double(fam.spec.j_list[j]), Rm[a][e][j]});
  }
  double worst = 0.0;
  for (std::size_t a = 0; a + 1 < na; ++a) {
    const double ratio = radii[a + 1] / radii[a];
    const double rr = rm_c[a + 1] > 0.0 ? rm_c[a] / rm_c[a + 1] : 0.0;
    const double sr = s_c[a + 1] > 0.0 ? s_c[a] / s_c[a + 1] : 0.0;
    worst = std::max(worst, rr / std::pow(ratio, 4));
    if (rr > 1.2 * std::pow(ratio, 4) || sr > 1.2 * std::pow(ratio, 2)) scaling = false;
  }
  r.measured = drift;
  r.pass = uniform && scaling;
  r.details = {{"annuli", ann}, {"uniform", uniform}, {"scaling", scaling}, {"scaling_worst", worst}};
  return r;
}

EstimateReport verify_estimates(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt) {
  EstimateReport rep;
  if (opt.is_enabled("uniform_linf")) rep.checks.push_back(uniform_linf_check(fam, ctx, opt));
  if (opt.is_enabled("det_ratio")) rep.checks.push_back(det_ratio_check(fam, ctx, opt));
  if (opt.is_enabled("gradient")) rep.checks.push_back(gradient_check(fam, ctx, opt));
  if (opt.is_enabled("metric_equivalence")) rep.checks.push_back(metric_equivalence_check(fam, ctx, opt));
  if (opt.is_enabled("phidot_derivatives")) rep.checks.push_back(phidot_derivative_check(fam, opt));
  if (opt.is_enabled("holder")) rep.checks.push_back(holder_check(fam, opt));
  if (opt.is_enabled("barrier")) rep.checks.push_back(barrier_check(fam, opt));
  if (opt.is_enabled("jeffres_uniqueness")) {
    const std::size_t e = fam.n_eps() - 1, j = fam.n_j() - 1;
    const Trajectory& a = fam.traj[e][j];
    ControllerOptions c = fam.spec.controller;
    c.kind = ControllerKind::Adaptive;
    const FlowProblem p = make_problem(*fam.geom, *fam.forcing, a.eps);
    const Trajectory b = run(p, fam.initial[j], fam.spec.T, fam.spec.snapshots, c, fam.spec.newton, a.j);
    EstimateOptions o = opt;
    if (!(o.discretization_error > 0.0)) o.discretization_error = a.local_error_budget + b.local_error_budget;
    rep.checks.push_back(jeffres_uniqueness_diag(*fam.geom, a, b, fam.K, o));
  }
  if (opt.is_enabled("local_curvature")) rep.checks.push_back(local_curvature_check(fam, opt));
  return rep;
}

}  // namespace conemaflow
