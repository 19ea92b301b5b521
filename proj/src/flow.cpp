#include "conemaflow/flow.hpp"

#include <algorithm>
#include <cmath>

#include "conemaflow/kernels.hpp"
#include "conemaflow/spectral.hpp"

namespace conemaflow {

FlowProblem make_problem(const ConeGeometry& g, const ForcingModel& F, double eps, double offset) {
  FlowProblem p;
  p.geom = &g;
  p.forcing = &F;
  p.source = source_field(g, eps);
  p.offset = offset;
  p.eps = eps;
  return p;
}

FlowState make_state(const FlowProblem& p, Field phi, int j, double t) {
  FlowState s;
  s.t = t;
  s.density = p.geom->laplacian(phi);
  for (auto& v : s.density) v += 1.0;
  s.phi = std::move(phi);
  s.eps = p.eps;
  s.j = j;
  return s;
}

Field flow_rhs(const FlowProblem& p, const Field& phi, Field* density) {
  Field q = p.geom->laplacian(phi);
  Field out(phi.size());
  for (std::size_t i = 0; i < phi.size(); ++i) {
    q[i] += 1.0;
    out[i] = std::log(q[i]) + p.forcing->eval(phi[i], i) + p.source[i] + p.offset;
  }
  if (density) *density = std::move(q);
  return out;
}

double stationary_residual(const FlowProblem& p, const Field& phi) {
  return kernels::max_abs(flow_rhs(p, phi));
}

namespace {

// R = u - phi_n - dt * rhs(u); returns max|R|, or +inf if the density is not positive.
double residual(const FlowProblem& p, const Field& u, const Field& phin, double dt, double floor, Field& q,
                Field& R) {
  const auto& g = *p.geom;
  q.resize(u.size());
  R.resize(u.size());
  g.laplacian(u.data(), q.data());
  double m = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    q[i] += 1.0;
    if (!(q[i] > floor)) return INFINITY;
    R[i] = u[i] - phin[i] - dt * (std::log(q[i]) + p.forcing->eval(u[i], i) + p.source[i] + p.offset);
    m = std::max(m, std::fabs(R[i]));
  }
  return m;
}

void solve_radial(const ConeGeometry& g, const Field& a, double dt, const Field& b, Field& x) {
  const std::size_t n = b.size();
  Field lo(n), di(n), up(n), rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = g.weights[i];
    lo[i] = -dt * w * g.tri_lower[i];
    up[i] = -dt * w * g.tri_upper[i];
    di[i] = w * (a[i] - dt * g.tri_diag[i]);
    rhs[i] = w * b[i];
  }
  solve_tridiag(lo, di, up, rhs, x);
}

bool backward_euler(const FlowProblem& p, const Field& phin, double dt, const NewtonOptions& o, Field& u,
                    StepInfo& info) {
  const auto& g = *p.geom;
  const std::size_t n = phin.size();
  Field q, R, qt, Rt, a(n), b(n), d(n), ut(n);
  // explicit predictor when it stays admissible
  {
    Field dens;
    Field f = flow_rhs(p, phin, &dens);
    u = phin;
    kernels::axpy(dt, f, u);
    if (!std::isfinite(residual(p, u, phin, dt, o.density_floor, q, R))) u = phin;
  }
  double rn = residual(p, u, phin, dt, o.density_floor, q, R);
  if (!std::isfinite(rn)) return false;
  for (int it = 0; it < o.max_newton; ++it) {
    if (rn <= o.newton_tol) {
      info.residual = rn;
      return true;
    }
    ++info.newton_iters;
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = q[i] * (1.0 - dt * p.forcing->dv(u[i], i));
      if (!(a[i] > 0.0)) return false;
      b[i] = -q[i] * R[i];
    }
    if (g.is_torus()) {
      const double rtol = std::clamp(rn, 1e-13, 1e-4);
      info.linear_iters += pcg_shifted_torus(g, a, dt, b, d, rtol, o.cg_max);
    } else {
      solve_radial(g, a, dt, b, d);
      info.linear_iters += 1;
    }
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls) {
      for (std::size_t i = 0; i < n; ++i) ut[i] = u[i] + alpha * d[i];
      const double rt = residual(p, ut, phin, dt, o.density_floor, qt, Rt);
      if (std::isfinite(rt) && (rt < rn || rt <= o.newton_tol)) {
        u.swap(ut);
        q.swap(qt);
        R.swap(Rt);
        rn = rt;
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      // stagnation at round-off level counts as converged
      if (rn <= 1e3 * o.newton_tol) {
        info.residual = rn;
        return true;
      }
      return false;
    }
  }
  info.residual = rn;
  return rn <= o.newton_tol;
}

void advance(const FlowProblem& p, Field& phi, double dt, const NewtonOptions& o, StepInfo& info, int depth) {
  Field u;
  if (backward_euler(p, phi, dt, o, u, info)) {
    phi.swap(u);
    return;
  }
  if (depth >= o.max_halvings) throw SolverError("positivity breakdown: step failed at minimal dt");
  ++info.halvings;
  advance(p, phi, 0.5 * dt, o, info, depth + 1);
  advance(p, phi, 0.5 * dt, o, info, depth + 1);
}

}  // namespace

FlowState step(const FlowState& state, const FlowProblem& p, double dt, const NewtonOptions& opts, StepInfo* info) {
  if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be positive");
  StepInfo local;
  Field phi = state.phi;
  advance(p, phi, dt, opts, local, 0);
  FlowState out = make_state(p, std::move(phi), state.j, state.t + dt);
  double lo, hi;
  kernels::table().minmax(out.density.data(), out.density.size(), &lo, &hi);
  if (!(lo > opts.density_floor)) throw SolverError("positivity breakdown");
  out.dt_last = dt;
  if (info) *info = local;
  return out;
}

std::vector<double> schedule_times(double T, const std::vector<double>& snapshots, const ControllerOptions& c) {
  std::vector<double> snaps;
  for (double s : snapshots)
    if (s > 0.0 && s < T) snaps.push_back(s);
  snaps.push_back(T);
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());
  std::vector<double> grid{0.0};
  if (T <= 0.0) return grid;
  double t = 0.0;
  std::size_t next = 0;
  for (int k = 0; next < snaps.size(); ++k) {
    double dt = std::min(c.dt_max, c.dt0 * std::pow(c.growth, k));
    const double target = snaps[next];
    if (t + dt >= target || target - (t + dt) < 0.25 * dt) {
      t = target;
      ++next;
    } else {
      t += dt;
    }
    grid.push_back(t);
  }
  if (c.refine > 1) {
    std::vector<double> fine{0.0};
    for (std::size_t i = 1; i < grid.size(); ++i)
      for (int s = 1; s <= c.refine; ++s)
        fine.push_back(s == c.refine ? grid[i] : grid[i - 1] + (grid[i] - grid[i - 1]) * s / c.refine);
    grid.swap(fine);
  }
  return grid;
}

Snapshot make_snapshot(const FlowProblem& p, const FlowState& s) {
  Snapshot out;
  out.t = s.t;
  out.phi = s.phi;
  Field dens;
  const Field f = flow_rhs(p, s.phi, &dens);
  out.sup_phidot = kernels::max_abs(f);
  const auto& K = kernels::table();
  K.minmax(dens.data(), dens.size(), &out.min_density, &out.max_density);
  K.minmax(s.phi.data(), s.phi.size(), &out.inf_phi, &out.sup_phi);
  return out;
}

const Snapshot& Trajectory::at(double t) const {
  for (const auto& s : snaps)
    if (std::fabs(s.t - t) <= 1e-12 * std::max(1.0, std::fabs(t))) return s;
  throw std::out_of_range("trajectory has no snapshot at t = " + std::to_string(t));
}

std::vector<double> Trajectory::times() const {
  std::vector<double> out;
  for (const auto& s : snaps) out.push_back(s.t);
  return out;
}

Trajectory run(const FlowProblem& p, const Field& initial, double T, const std::vector<double>& snapshot_times,
               const ControllerOptions& c, const NewtonOptions& opts, int j) {
  Trajectory traj;
  traj.eps = p.eps;
  traj.j = j;
  FlowState s = make_state(p, initial, j, 0.0);
  traj.snaps.push_back(make_snapshot(p, s));
  if (T <= 0.0) return traj;

  std::vector<double> snaps;
  for (double x : snapshot_times)
    if (x > 0.0 && x <= T) snaps.push_back(x);
  if (snaps.empty() || snaps.back() < T) snaps.push_back(T);
  std::sort(snaps.begin(), snaps.end());
  snaps.erase(std::unique(snaps.begin(), snaps.end()), snaps.end());

  Field fdot_prev = flow_rhs(p, s.phi);
  auto take = [&](double dt) {
    StepInfo info;
    s = step(s, p, dt, opts, &info);
    ++traj.steps;
    traj.newton_total += info.newton_iters;
    traj.halvings += info.halvings;
    Field fdot = flow_rhs(p, s.phi);
    double err = 0.0;
    for (std::size_t i = 0; i < fdot.size(); ++i) err = std::max(err, std::fabs(fdot[i] - fdot_prev[i]));
    err *= 0.5 * dt;
    traj.local_error_budget += err;
    fdot_prev.swap(fdot);
    return std::make_pair(info, err);
  };

  if (c.kind == ControllerKind::Schedule) {
    const auto grid = schedule_times(T, snaps, c);
    std::size_t next = 0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
      take(grid[k] - grid[k - 1]);
      s.t = grid[k];
      while (next < snaps.size() && std::fabs(snaps[next] - s.t) <= 1e-14 * std::max(1.0, s.t)) {
        traj.snaps.push_back(make_snapshot(p, s));
        traj.snaps.back().t = snaps[next];
        ++next;
      }
    }
    return traj;
  }

  // PI control on the local error estimate and the Newton iteration count
  double dt = c.dt0, err_prev = c.adaptive_tol;
  std::size_t next = 0;
  while (next < snaps.size()) {
    const double target = snaps[next];
    double h = std::min(dt, c.dt_max);
    bool hits = false;
    if (s.t + h >= target || target - (s.t + h) < 0.25 * h) {
      h = target - s.t;
      hits = true;
    }
    const auto [info, err] = take(h);
    if (hits) {
      s.t = target;
      traj.snaps.push_back(make_snapshot(p, s));
      ++next;
    }
    const double e = std::max(err, 1e-16);
    double fac = 0.9 * std::pow(c.adaptive_tol / e, 0.35) * std::pow(err_prev / e, 0.2);
    if (info.newton_iters > 8) fac = std::min(fac, 0.7);
    if (info.halvings > 0) fac = std::min(fac, 0.5);
    fac = std::clamp(fac, 0.3, 2.0);
    if (!hits || h >= 0.5 * dt) dt = h * fac;
    err_prev = e;
  }
  return traj;
}

double HorizonEstimate::upper(double time) const {
  if (t.empty()) return A;
  if (time <= t.front()) return G.front();
  auto it = std::upper_bound(t.begin(), t.end(), time);
  if (it == t.end()) return G.back();
  const std::size_t k = std::size_t(it - t.begin());
  const double u = (time - t[k - 1]) / (t[k] - t[k - 1]);
  return G[k - 1] + u * (G[k] - G[k - 1]);
}

double HorizonEstimate::lower(double time) const {
  if (t.empty()) return -A;
  if (time <= t.front()) return G_lo.front();
  auto it = std::upper_bound(t.begin(), t.end(), time);
  if (it == t.end()) return G_lo.back();
  const std::size_t k = std::size_t(it - t.begin());
  const double u = (time - t[k - 1]) / (t[k] - t[k - 1]);
  return G_lo[k - 1] + u * (G_lo[k] - G_lo[k - 1]);
}

HorizonEstimate existence_horizon(const ForcingModel& F, double A, const std::vector<Field>& delta_chi, double C_f,
                                  double R_max, double t_max) {
  HorizonEstimate h;
  h.A = A;
  h.C_f = C_f;
  h.R_max = R_max;
  std::vector<Field> dchi = delta_chi;
  if (dchi.empty()) dchi.push_back(Field{0.0});
  // affine forcing: Fbar(s) = slope s + const
  double off_hi = -INFINITY, off_lo = INFINITY;
  if (F.affine()) {
    for (const auto& f : dchi)
      for (std::size_t z = 0; z < f.size(); ++z) {
        const double v = F.eval(f[z], z);
        off_hi = std::max(off_hi, v);
        off_lo = std::min(off_lo, v);
      }
  }
  auto fbar = [&](double s) {
    if (F.affine()) return F.slope() * s + off_hi + C_f;
    double m = -INFINITY;
    for (const auto& f : dchi)
      for (std::size_t z = 0; z < f.size(); ++z) m = std::max(m, F.eval(s + f[z], z));
    return m + C_f;
  };
  auto flow_ = [&](double s) {
    if (F.affine()) return F.slope() * s + off_lo - C_f;
    double m = INFINITY;
    for (const auto& f : dchi)
      for (std::size_t z = 0; z < f.size(); ++z) m = std::min(m, F.eval(s + f[z], z));
    return m - C_f;
  };
  auto rk4 = [](auto& fn, double y, double dt) {
    const double k1 = fn(y), k2 = fn(y + 0.5 * dt * k1), k3 = fn(y + 0.5 * dt * k2), k4 = fn(y + dt * k3);
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  };
  double t = 0.0, G = A, L = -A;
  h.t.push_back(t);
  h.G.push_back(G);
  h.G_lo.push_back(L);
  while (t < t_max) {
    const double dt_base = std::max(1e-3, 1e-2 * t);
    const double rate = std::max(std::fabs(fbar(G)), std::fabs(flow_(L)));
    const double scale = std::max({1.0, std::fabs(G), std::fabs(L)});
    double dt = std::min(dt_base, rate > 0 ? 0.01 * scale / rate : dt_base);
    dt = std::max(dt, 1e-14);
    dt = std::min(dt, t_max - t);
    const double Gn = rk4(fbar, G, dt), Ln = rk4(flow_, L, dt);
    const double over = std::max(std::fabs(Gn), std::fabs(Ln));
    if (!(over <= R_max)) {
      // linear interpolation of the crossing inside the last step
      double frac = 1.0;
      if (std::isfinite(Gn) && std::fabs(Gn) > R_max && std::fabs(Gn) != std::fabs(G))
        frac = std::min(frac, (R_max - std::fabs(G)) / (std::fabs(Gn) - std::fabs(G)));
      if (std::isfinite(Ln) && std::fabs(Ln) > R_max && std::fabs(Ln) != std::fabs(L))
        frac = std::min(frac, (R_max - std::fabs(L)) / (std::fabs(Ln) - std::fabs(L)));
      if (!std::isfinite(Gn) || !std::isfinite(Ln)) frac = 0.0;
      h.Tbar = t + std::clamp(frac, 0.0, 1.0) * dt;
      h.reached_limit = true;
      return h;
    }
    t += dt;
    G = Gn;
    L = Ln;
    h.t.push_back(t);
    h.G.push_back(G);
    h.G_lo.push_back(L);
    if (h.t.size() > 2000000) break;
  }
  h.Tbar = t;
  return h;
}

}  // namespace conemaflow
