#pragma once

#include <string>
#include <vector>

#include "conemaflow/flow.hpp"
#include "conemaflow/forcing.hpp"
#include "conemaflow/geometry.hpp"

namespace conemaflow {

struct FamilySpec {
  std::vector<double> eps_list{0.2, 0.1, 0.05};  // strictly decreasing
  std::vector<int> j_list{3, 5, 7};               // strictly increasing
  double T = 0.5;
  std::vector<double> snapshots;                 // in (0, T]
  double sigma0 = 1.0;
  ControllerOptions controller;
  NewtonOptions newton;
  unsigned threads = 0;  // 0: worker_count()
};

// Trajectories of the (eps, j) matrix from the mollified family of phi0.
struct FamilyRun {
  const ConeGeometry* geom = nullptr;
  const ForcingModel* forcing = nullptr;
  FamilySpec spec;
  Field phi0;
  std::vector<Field> initial;                  // phi_{0,j} per j
  std::vector<std::vector<Trajectory>> traj;   // [eps index][j index]
  double K = 0.0;                              // Lipschitz constant of F

  std::size_t n_eps() const { return spec.eps_list.size(); }
  std::size_t n_j() const { return spec.j_list.size(); }
  const Trajectory& member(std::size_t e, std::size_t j) const { return traj[e][j]; }
  // snapshot times including t = 0
  std::vector<double> times() const;
};

// Mollifies phi0 at every j and runs all members concurrently.
FamilyRun run_family(const ConeGeometry& g, const ForcingModel& F, const Field& phi0, const FamilySpec& spec);

double sup_distance(const Field& a, const Field& b);
// max over shared snapshots of sup |a(t) - b(t)|
double trajectory_distance(const Trajectory& a, const Trajectory& b);

struct CauchyRow {
  double eps;
  int j, l;
  double initial_distance;  // ||phi_{0,j} - phi_{0,l}||
  double bound;             // e^{KT} initial_distance (1 + tol)
  double measured;          // ||phi_{eps,j} - phi_{eps,l}||_{L^inf([0,T] x M)} on snapshots
  bool pass;
};

struct JLimitReport {
  double eps = 0.0;
  std::vector<CauchyRow> rows;
  bool contraction_pass = true;
  bool decay_pass = true;  // d(j_k, j_last) nonincreasing in k
  std::string failure;     // names the first violating pair
  std::size_t limit_index = 0;
};

// Cauchy table at one eps; the largest-j member is the limit proxy.
JLimitReport j_limit(const FamilyRun& fam, std::size_t eps_index, double tol_contraction = 0.02);

struct MonotonicityRow {
  double eps1, eps2;  // eps1 < eps2
  double t;
  double min_margin;  // min_x (phi_{eps2} - phi_{eps1})
  bool pass;          // min_margin >= -tol_mono
};

struct AnnulusRow {
  double eps1, eps2, t;
  double c2_distance;  // sup|u| + sup|grad u| + sup|Lap u| on dist >= r, u the difference
};

struct EpsLimitReport {
  double tol_mono = 0.0;
  std::vector<MonotonicityRow> rows;
  std::vector<AnnulusRow> annulus;
  std::vector<double> gaps;  // sup distance between consecutive members over [0,T]
  bool monotone_pass = true;
  bool c2_decay_pass = true;
  bool consistency_pass = true;
  std::string failure;
};

// eps-monotonicity at the largest j on the given probe times, plus annulus C^2 decay.
EpsLimitReport eps_limit(const FamilyRun& fam, const std::vector<double>& probes, double tol_mono,
                         double annulus_r = 0.25);

// Richardson estimate of the time-discretization error of a member: rerun with refine x2,
// 2 sup_t |phi_dt - phi_{dt/2}| (backward Euler is first order).
double richardson_error(const ConeGeometry& g, const ForcingModel& F, const Trajectory& coarse,
                        const Field& initial, const FamilySpec& spec);

struct ModulusReport {
  std::vector<std::pair<double, double>> table;  // t -> ||phi(t) - phi_init||
  std::vector<double> to_phi0;                   // ||phi(t) - phi0|| per row
  double ratio = 0.0;                            // d(t_hi) / d(t_lo), t_hi >= 100 t_lo
  double t_lo = 0.0, t_hi = 0.0;
  bool pass = false;
};

// t -> ||phi(t) - phi(0)|| along the limit proxy; passes when the distance drops by >= 10x
// over two decades of t.
ModulusReport initial_continuity(const Trajectory& limit, const Field& phi0);

}  // namespace conemaflow
