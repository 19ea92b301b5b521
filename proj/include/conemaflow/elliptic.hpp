#pragma once

#include <string>
#include <vector>

#include "conemaflow/flow.hpp"
#include "conemaflow/forcing.hpp"
#include "conemaflow/geometry.hpp"
#include "conemaflow/holder.hpp"

namespace conemaflow {

struct EllipticSolution {
  Field psi;
  double c_norm = 1.0;
  double residual = 0.0;
  int newton_iters = 0;
};

// Lap psi = f - mean(f), mean-zero gauge.
Field solve_poisson(const ConeGeometry& g, const Field& f);

// e^{-F(phi(z), z)} (eps^2 + |s|^2)^{beta-1}, with the same divisor-cell source as the flow.
Field ma_rhs_density(const ConeGeometry& g, const ForcingModel& F, const Field& phi, double eps);

// 1 + Lap psi = c RHS with RHS independent of psi. normalize: c = V0 / int RHS; otherwise c = 1
// and RHS must already have total mass V0 up to quadrature.
EllipticSolution solve_regularized_ma(const ConeGeometry& g, const Field& rhs_density, bool normalize = true);

// log(1 + Lap psi) + F(psi, z) + source + offset = 0 by damped Newton from psi0.
EllipticSolution solve_regularized_ma(const ConeGeometry& g, const ForcingModel& F, const Field& source,
                                      Field psi0, double offset = 0.0, double tol = 1e-12, int max_iter = 60);

struct StationarityOptions {
  std::vector<double> eps_list{1e-2, 1e-4, 1e-6};
  std::vector<int> j_list{4, 6, 8};
  bool include_limit_member = true;  // j = infinity (no mollification)
  double sigma0 = 1.0;
  double T = 0.5;
  std::vector<double> snapshots{0.01, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  double probe_time = 0.1;
  double tol_phidot = 1e-6;
  double tol_stationary = 1e-5;
  double gronwall_rel_tol = 1e-2;
  double gronwall_abs_tol = 1e-8;  // backward Euler Newton tolerance over the smallest steps
  ControllerOptions controller{ControllerKind::Schedule, 1e-4, 1.5, 5e-3, 1, 1e-4};
  double holder_alpha_factor = 0.5;
  ConeChart chart;  // beta and divisor node filled in by the pipeline
  const Field* reference = nullptr;  // optional comparison field (manufactured phi*)
};

struct PhidotRow {
  double eps;
  int j;  // -1 encodes the limit member
  double t;
  double sup_phidot;
  double bound;
  bool pass;
};

struct StationarityReport {
  std::vector<PhidotRow> phidot;
  std::vector<double> c_eps;                // per eps
  std::vector<std::vector<double>> c_eps_j;  // [eps][j]
  std::vector<double> sym_residual_psi_eps;  // asymmetry after the sup-symmetric shift
  double phi0_residual = 0.0;               // discrete stationarity of phi0
  double limit_phidot_probe = 0.0;          // sup|phi'| at the probe time, limit member
  double limit_max_distance = 0.0;          // sup_t ||phi(t) - phi0||
  double limit_max_distance_reference = -1.0;
  std::vector<std::pair<double, double>> limit_distance_by_t;
  bool gronwall_pass = true;
  bool phidot_pass = false;
  bool stationary_pass = false;
  ConeHolderReport holder;
  std::string failed_stage;
};

// phi0 must solve the discrete conical equation log(1 + Lap phi0) + F(phi0) + S_0 = 0.
StationarityReport stationarity_pipeline(const ConeGeometry& g, const Field& phi0, const ForcingModel& F,
                                         const StationarityOptions& opt);

// Manufactured torus target: phi* = delta0 chi_0(|s|^2) + bump, F* closed form.
struct ManufacturedCase {
  Field phi_star;
  Field f_star;
  double delta0;
};
ManufacturedCase manufactured_torus(const ConeGeometry& g, double delta0, double bump_amp = 0.005);

}  // namespace conemaflow
