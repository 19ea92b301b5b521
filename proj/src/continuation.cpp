#include "conemaflow/continuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "conemaflow/initial_data.hpp"
#include "conemaflow/thread_pool.hpp"

namespace conemaflow {

std::vector<double> FamilyRun::times() const {
  if (traj.empty() || traj[0].empty()) return {};
  return traj[0][0].times();
}

FamilyRun run_family(const ConeGeometry& g, const ForcingModel& F, const Field& phi0, const FamilySpec& spec) {
  for (std::size_t i = 1; i < spec.eps_list.size(); ++i)
    if (!(spec.eps_list[i] < spec.eps_list[i - 1])) throw std::invalid_argument("eps-list must be strictly decreasing");
  for (std::size_t i = 1; i < spec.j_list.size(); ++i)
    if (!(spec.j_list[i] > spec.j_list[i - 1])) throw std::invalid_argument("j-list must be strictly increasing");
  FamilyRun fam;
  fam.geom = &g;
  fam.forcing = &F;
  fam.spec = spec;
  fam.phi0 = phi0;
  fam.K = F.lipschitz_K;
  const std::size_t ne = spec.eps_list.size(), nj = spec.j_list.size();
  fam.initial.resize(nj);
  parallel_for(
      nj, [&](std::size_t k) { fam.initial[k] = mollify(g, phi0, mollification_scale(spec.sigma0, spec.j_list[k])); },
      spec.threads);
  fam.traj.assign(ne, std::vector<Trajectory>(nj));
  parallel_for(
      ne * nj,
      [&](std::size_t idx) {
        const std::size_t e = idx / nj, k = idx % nj;
        const FlowProblem p = make_problem(g, F, spec.eps_list[e]);
        fam.traj[e][k] = run(p, fam.initial[k], spec.T, spec.snapshots, spec.controller, spec.newton, spec.j_list[k]);
      },
      spec.threads);
  return fam;
}

double sup_distance(const Field& a, const Field& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

double trajectory_distance(const Trajectory& a, const Trajectory& b) {
  double d = 0.0;
  const std::size_t n = std::min(a.snaps.size(), b.snaps.size());
  for (std::size_t k = 0; k < n; ++k) d = std::max(d, sup_distance(a.snaps[k].phi, b.snaps[k].phi));
  return d;
}

JLimitReport j_limit(const FamilyRun& fam, std::size_t e, double tol) {
  if (fam.n_j() < 3) throw std::invalid_argument("j_limit needs at least 3 members");
  JLimitReport rep;
  rep.eps = fam.spec.eps_list[e];
  const double growth = std::exp(fam.K * fam.spec.T);
  const std::size_t nj = fam.n_j();
  for (std::size_t a = 0; a < nj; ++a)
    for (std::size_t b = a + 1; b < nj; ++b) {
      CauchyRow r;
      r.eps = rep.eps;
      r.j = fam.spec.j_list[a];
      r.l = fam.spec.j_list[b];
      r.initial_distance = sup_distance(fam.initial[a], fam.initial[b]);
      r.bound = growth * r.initial_distance * (1.0 + tol);
      r.measured = trajectory_distance(fam.traj[e][a], fam.traj[e][b]);
      // exact ties (identical members) pass
      r.pass = r.measured <= r.bound || r.measured == 0.0;
      if (!r.pass && rep.contraction_pass) {
        rep.contraction_pass = false;
        rep.failure = "contraction violated for (j, l) = (" + std::to_string(r.j) + ", " + std::to_string(r.l) +
                      ") at eps = " + std::to_string(rep.eps);
      }
      rep.rows.push_back(r);
    }
  double prev = INFINITY;
  for (std::size_t a = 0; a + 1 < nj; ++a) {
    const double d = trajectory_distance(fam.traj[e][a], fam.traj[e][nj - 1]);
    if (d > prev * (1.0 + 1e-12)) rep.decay_pass = false;
    prev = d;
  }
  rep.limit_index = nj - 1;
  return rep;
}

namespace {

double c2_distance(const ConeGeometry& g, const Field& a, const Field& b, double r) {
  Field u(a.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = a[i] - b[i];
  const Field gr = g.grad_norm_sq(u);
  const Field lap = g.laplacian(u);
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (g.dist[i] < r) continue;
    s0 = std::max(s0, std::fabs(u[i]));
    s1 = std::max(s1, std::sqrt(gr[i]));
    s2 = std::max(s2, std::fabs(lap[i]));
  }
  return s0 + s1 + s2;
}

}  // namespace

EpsLimitReport eps_limit(const FamilyRun& fam, const std::vector<double>& probes, double tol_mono, double r) {
  const std::size_t ne = fam.n_eps();
  if (ne < 3) throw std::invalid_argument("eps_limit needs at least 3 eps values");
  const std::size_t jl = fam.n_j() - 1;
  const ConeGeometry& g = *fam.geom;
  EpsLimitReport rep;
  rep.tol_mono = tol_mono;
  for (std::size_t e = 0; e + 1 < ne; ++e) {
    // eps_list is decreasing: member e+1 has the smaller eps
    const Trajectory& big = fam.traj[e][jl];
    const Trajectory& small = fam.traj[e + 1][jl];
    for (double t : probes) {
      const Field& a = small.at(t).phi;
      const Field& b = big.at(t).phi;
      double m = INFINITY;
      for (std::size_t i = 0; i < a.size(); ++i) m = std::min(m, b[i] - a[i]);
      MonotonicityRow row{fam.spec.eps_list[e + 1], fam.spec.eps_list[e], t, m, m >= -tol_mono};
      if (!row.pass && rep.monotone_pass) {
        rep.monotone_pass = false;
        rep.failure = "monotonicity violated between eps = " + std::to_string(row.eps1) + " and " +
                      std::to_string(row.eps2) + " at t = " + std::to_string(t);
      }
      rep.rows.push_back(row);
      rep.annulus.push_back({row.eps1, row.eps2, t, c2_distance(g, a, b, r)});
    }
    rep.gaps.push_back(trajectory_distance(big, small));
  }
  // annulus C^2 distances must shrink along the eps sequence at each probe time
  const std::size_t np = probes.size();
  for (std::size_t e = 1; e + 1 < ne; ++e)
    for (std::size_t k = 0; k < np; ++k)
      if (!(rep.annulus[e * np + k].c2_distance < rep.annulus[(e - 1) * np + k].c2_distance)) rep.c2_decay_pass = false;
  // dropping the last eps moves the proxy by the last gap, which must be below the previous one
  if (rep.gaps.size() >= 2) rep.consistency_pass = rep.gaps.back() < rep.gaps[rep.gaps.size() - 2];
  return rep;
}

double richardson_error(const ConeGeometry& g, const ForcingModel& F, const Trajectory& coarse, const Field& initial,
                        const FamilySpec& spec) {
  ControllerOptions c = spec.controller;
  c.refine *= 2;
  const FlowProblem p = make_problem(g, F, coarse.eps);
  const Trajectory fine = run(p, initial, spec.T, spec.snapshots, c, spec.newton, coarse.j);
  // backward Euler is first order: err(dt) ~ 2 |phi_dt - phi_{dt/2}|
  return 2.0 * trajectory_distance(coarse, fine);
}

ModulusReport initial_continuity(const Trajectory& limit, const Field& phi0) {
  ModulusReport rep;
  const Field& init = limit.snaps.front().phi;
  for (const auto& s : limit.snaps) {
    if (s.t <= 0.0) continue;
    rep.table.emplace_back(s.t, sup_distance(s.phi, init));
    rep.to_phi0.push_back(sup_distance(s.phi, phi0));
  }
  if (rep.table.empty()) return rep;
  rep.t_lo = rep.table.front().first;
  const double d_lo = rep.table.front().second;
  for (const auto& [t, d] : rep.table)
    if (t >= 100.0 * rep.t_lo * (1.0 - 1e-12)) {
      rep.t_hi = t;
      rep.ratio = (d_lo > 0.0) ? d / d_lo : (d > 0.0 ? INFINITY : 1.0);
      break;
    }
  rep.pass = rep.t_hi > 0.0 && (rep.ratio >= 10.0 || (d_lo == 0.0 && rep.ratio == 1.0));
  return rep;
}

}  // namespace conemaflow
