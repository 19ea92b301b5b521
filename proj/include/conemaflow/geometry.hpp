#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace conemaflow {

using Field = std::vector<double>;

enum class SurfaceKind { Torus, FootballRadial };

std::string to_string(SurfaceKind k);
SurfaceKind surface_from_string(const std::string& s);

// Model surface on a grid.
//
// Torus: nodes (i/N, j/N), i,j in [0,N), row-major with i along x1. Divisor at
// the node (0,0). Flat metric, V0 = 1.
//
// FootballRadial: rotationally invariant functions on the sphere in the
// compactified coordinate x = tanh(rho/2) in [-1,1], nodes x_i = -1 + 2i/(N-1).
// Divisor at both end nodes. The background Laplacian is d/dx((1-x^2) d/dx),
// volume dx/2, V0 = 1.
struct ConeGeometry {
  SurfaceKind kind = SurfaceKind::Torus;
  double beta = 0.5;
  int N = 0;
  double h = 0.0;
  double V0 = 1.0;

  Field x1, x2;                 // node coordinates (x2 unused on the radial model)
  Field s2;                     // |s|^2_h at nodes
  Field weights;                // quadrature weights of omega_0, sum = V0
  Field dist;                   // omega_0 geodesic distance to D
  std::vector<std::size_t> divisor_nodes;

  // Radial operator: face coefficients a_{i+1/2} = 1 - x_{i+1/2}^2, i in [0,N-1).
  Field face;
  Field tri_lower, tri_diag, tri_upper;  // cached radial_tridiag()

  static ConeGeometry make(SurfaceKind kind, double beta, int N);

  std::size_t size() const { return kind == SurfaceKind::Torus ? std::size_t(N) * N : std::size_t(N); }
  bool is_torus() const { return kind == SurfaceKind::Torus; }
  bool is_divisor(std::size_t i) const;

  void laplacian(const double* in, double* out) const;
  Field laplacian(const Field& u) const;
  // |grad u|^2 in the omega_0 metric (central differences).
  Field grad_norm_sq(const Field& u) const;
  // Tridiagonal coefficients of the radial Laplacian.
  void radial_tridiag(Field& lower, Field& diag, Field& upper) const;

  double integrate(const Field& u) const;
  double mean(const Field& u) const { return integrate(u) / V0; }
  // Distance in omega_0 between two nodes (periodic on the torus, arc length on the sphere).
  double node_distance(std::size_t a, std::size_t b) const;
  // Distance from a node to an arbitrary point (x1,x2) (radial: x2 ignored).
  double distance_to_point(std::size_t a, double px1, double px2) const;
};

// Closed-form model fields used by tests and diagnostics.
double section_norm_sq_torus(double x1, double x2);
double section_norm_sq_radial(double x);
double section_norm_sq(const ConeGeometry& g, std::size_t node);

// chi(eps, r, beta) = (1/beta) int_0^r ((eps^2+u)^beta - eps^(2 beta)) / u du.
double chi_eps(double eps, double r, double beta);
// d chi / d r
double chi_eps_dr(double eps, double r, double beta);

// Cubic Hermite table of chi over y = log(eps^2 + r), r in [0, r_max].
class ChiTable {
 public:
  ChiTable(double eps, double beta, double r_max = 1.0, int points = 2048);
  double operator()(double r) const;
  double eps() const { return eps_; }
  double beta() const { return beta_; }

 private:
  double eps_, beta_, r_max_;
  double y0_, dy_;
  Field val_, der_;  // chi and d chi / dy at the nodes
};

struct RegularizationParams {
  double eps = 0.1;
  double delta = 0.1;
  double rho = 0.3;
};

// chi(eps^2 + |s|^2) sampled on the grid.
Field chi_field(const ConeGeometry& g, double eps);
// 1 + delta * Lap(chi field); throws std::runtime_error("delta too large") if not positive.
Field omega_eps_density(const ConeGeometry& g, const RegularizationParams& reg);
// (1-beta) log(eps^2 + |s|^2), cell-averaged on divisor nodes so that eps = 0 is finite.
Field source_field(const ConeGeometry& g, double eps);
// log(omega_eps density) + source
Field f_eps_field(const ConeGeometry& g, const RegularizationParams& reg);

// Halves delta from delta0 until the omega_eps density is >= gamma_min for every eps.
struct DeltaChoice {
  double delta;
  double gamma;  // min density over the family
  int halvings;
};
DeltaChoice choose_delta(const ConeGeometry& g, const std::vector<double>& eps_list, double delta0,
                         double gamma_min = 0.05);

// Density of the model cone metric omega_0 + delta ddbar |s|^{2 beta}, closed form, off D.
Field model_cone_density(const ConeGeometry& g, double delta);

// Cell average of log(eps^2 + |s|^2) over the control volume of a divisor node.
double divisor_cell_log_average(const ConeGeometry& g, double eps);

}  // namespace conemaflow
