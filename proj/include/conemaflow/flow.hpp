#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "conemaflow/forcing.hpp"
#include "conemaflow/geometry.hpp"

namespace conemaflow {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Right-hand side data of phi' = log(1 + Lap phi) + F(phi, z) + S + offset.
struct FlowProblem {
  const ConeGeometry* geom = nullptr;
  const ForcingModel* forcing = nullptr;
  Field source;          // S_eps, see source_field()
  double offset = 0.0;   // spatially constant extra term
  double eps = 0.0;
};

FlowProblem make_problem(const ConeGeometry& g, const ForcingModel& F, double eps, double offset = 0.0);

struct NewtonOptions {
  double density_floor = 1e-8;
  int max_newton = 50;
  double newton_tol = 1e-11;
  int max_halvings = 30;
  int cg_max = 4000;
};

struct FlowState {
  double t = 0.0;
  Field phi;
  Field density;  // 1 + Lap phi
  double eps = 0.0;
  int j = 0;
  double dt_last = 0.0;
};

FlowState make_state(const FlowProblem& p, Field phi, int j = 0, double t = 0.0);

// Analytic time derivative; optionally returns the density 1 + Lap phi.
Field flow_rhs(const FlowProblem& p, const Field& phi, Field* density = nullptr);
// sup |phi'| assembled exactly as the flow right-hand side.
double stationary_residual(const FlowProblem& p, const Field& phi);

struct StepInfo {
  int newton_iters = 0;
  int linear_iters = 0;
  int halvings = 0;
  double residual = 0.0;
};

// One backward Euler step of size dt, halving internally on failure (the returned state
// is always at state.t + dt). Throws SolverError on positivity breakdown or non-convergence.
FlowState step(const FlowState& state, const FlowProblem& p, double dt, const NewtonOptions& opts = {},
               StepInfo* info = nullptr);

enum class ControllerKind { Schedule, Adaptive };

struct ControllerOptions {
  ControllerKind kind = ControllerKind::Schedule;
  double dt0 = 1e-6;
  double growth = 1.25;
  double dt_max = 2.5e-3;
  int refine = 1;              // substeps per scheduled step (Richardson reruns)
  double adaptive_tol = 1e-4;  // local error target for the adaptive controller
};

// Deterministic step grid of the schedule controller; contains every snapshot time and ends at T.
std::vector<double> schedule_times(double T, const std::vector<double>& snapshots, const ControllerOptions& c);

struct Snapshot {
  double t = 0.0;
  Field phi;
  double sup_phidot = 0.0;
  double min_density = 0.0;
  double max_density = 0.0;
  double sup_phi = 0.0;
  double inf_phi = 0.0;
};

struct Trajectory {
  double eps = 0.0;
  int j = 0;
  std::vector<Snapshot> snaps;  // snaps[0] is t = 0
  int steps = 0;
  int newton_total = 0;
  int halvings = 0;
  double local_error_budget = 0.0;  // sum of (dt/2) |phi'_{n+1} - phi'_n|

  const Snapshot& at(double t) const;
  std::vector<double> times() const;
};

Snapshot make_snapshot(const FlowProblem& p, const FlowState& s);

Trajectory run(const FlowProblem& p, const Field& initial, double T, const std::vector<double>& snapshot_times,
               const ControllerOptions& c = {}, const NewtonOptions& opts = {}, int j = 0);

struct HorizonEstimate {
  double A = 0.0;
  double C_f = 0.0;
  double R_max = 0.0;
  double Tbar = 0.0;
  bool reached_limit = false;  // |G| crossed R_max before t_max
  std::vector<double> t, G, G_lo;

  double upper(double time) const;
  double lower(double time) const;
};

// G' = Fbar(G), G(0) = A, with Fbar(s) = max_{eps, z} F(s + delta chi_eps(z), z) + C_f, and the mirror
// lower solution. delta_chi holds delta * chi_eps per eps of the family.
HorizonEstimate existence_horizon(const ForcingModel& F, double A, const std::vector<Field>& delta_chi, double C_f,
                                  double R_max, double t_max = 1e3);

}  // namespace conemaflow
