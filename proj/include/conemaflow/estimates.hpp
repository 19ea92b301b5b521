#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "conemaflow/continuation.hpp"
#include "conemaflow/flow.hpp"
#include "conemaflow/geometry.hpp"

namespace conemaflow {

using ojson = nlohmann::ordered_json;

// Regularization data shared by the checks, one entry per eps of the family.
struct EstimateContext {
  double delta = 0.1;
  double gamma = 0.0;
  std::vector<Field> delta_chi;  // delta chi_eps
  std::vector<Field> omega;      // omega_eps density
  double C_f = 0.0;              // max sup |f_eps|
  std::vector<double> sup_f;     // sup |f_eps| per eps
  HorizonEstimate horizon;
};

// A = max_{eps,j} ||phi_{0,j} - delta chi_eps||; R_max <= 0 selects 4 max(A, 1).
EstimateContext make_estimate_context(const FamilyRun& fam, double delta, double R_max = 0.0);

struct EstimateOptions {
  double eta = 0.05;
  double uniform_tol = 0.10;    // fine-half constant <= (1 + tol) coarse-half constant
  double linf_drift = 1.05;
  double gradient_spread = 0.10;
  double phidot_spread = 0.15;
  double barrier_m = 2.0, barrier_l = 2.0;
  double barrier_tol = 1e-8;
  double barrier_t_max = 0.01;
  double jeffres_a = 1e-3, jeffres_q = 0.5;
  double discretization_error = 0.0;  // Richardson estimate, scales tol_unique
  std::vector<double> curvature_annuli{0.125, 0.25};
  double holder_alpha = 0.5;
  // empty: everything enabled
  std::vector<std::string> enabled;

  bool is_enabled(const std::string& name) const;
};

// One verdict per check. table rows are (t, eps, j, value).
struct CheckRecord {
  std::string name;
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  bool warning = false;
  std::string message;
  ojson details = ojson::object();
  std::vector<std::vector<double>> table;
};

struct EstimateReport {
  std::vector<CheckRecord> checks;
  bool pass() const;
  const CheckRecord* find(const std::string& name) const;
  ojson to_json() const;
};

// Members ordered by refinement rank (eps index + j index); the first half is "coarse".
struct MemberIndex {
  std::size_t e, j;
};
std::vector<MemberIndex> members_by_rank(const FamilyRun& fam);

CheckRecord uniform_linf_check(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt);
CheckRecord det_ratio_check(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt);
CheckRecord gradient_check(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt);
CheckRecord metric_equivalence_check(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt);
CheckRecord phidot_derivative_check(const FamilyRun& fam, const EstimateOptions& opt);
CheckRecord holder_check(const FamilyRun& fam, const EstimateOptions& opt);
CheckRecord barrier_check(const FamilyRun& fam, const EstimateOptions& opt);
CheckRecord jeffres_uniqueness_diag(const ConeGeometry& g, const Trajectory& a, const Trajectory& b, double K,
                                    const EstimateOptions& opt);
CheckRecord local_curvature_check(const FamilyRun& fam, const EstimateOptions& opt);

// Gauss curvature (K0 - Lap0 log q / 2) / q of q omega_0, K0 = 0 on the torus and 1 on the sphere,
// and the third-order proxy |grad q|^2 q^{-3}.
Field gauss_curvature(const ConeGeometry& g, const Field& q);
Field third_order_proxy(const ConeGeometry& g, const Field& q);

// Barrier profile h(t) with n = 1.
double barrier_h(double t, double K, double phi0_sup, double u_sup, double Chat);

// Runs every enabled check. The Jeffres diagnostic reruns the limit member with the adaptive controller.
EstimateReport verify_estimates(const FamilyRun& fam, const EstimateContext& ctx, const EstimateOptions& opt);

}  // namespace conemaflow
