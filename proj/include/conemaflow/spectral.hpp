#pragma once

#include <complex>
#include <cstddef>
#include <memory>

#include "conemaflow/geometry.hpp"

namespace conemaflow {

// FFT diagonalization of the periodic 5-point Laplacian on an N x N torus grid.
// One instance per N is shared; execution is thread-safe.
class TorusSpectral {
 public:
  static const TorusSpectral& get(int N);

  int N() const { return n_; }
  // Eigenvalue of the 5-point Laplacian for half-spectrum index (k1, k2), k2 in [0, N/2].
  double symbol(int k1, int k2) const { return lambda_[std::size_t(k1) * (n_ / 2 + 1) + k2]; }

  // Solves (a - c Lap) u = f with a >= 0, c >= 0. For a == 0 the zero mode of u is set
  // to zero and the zero mode of f is ignored.
  void solve_shifted(double a, double c, const double* f, double* u) const;
  // u = exp(tau Lap) f
  void heat(double tau, const double* f, double* u) const;

  explicit TorusSpectral(int N);
  ~TorusSpectral();
  TorusSpectral(const TorusSpectral&) = delete;
  TorusSpectral& operator=(const TorusSpectral&) = delete;

 private:
  template <class Mult>
  void apply_multiplier(Mult&& m, const double* f, double* u) const;

  int n_;
  Field lambda_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
};

// (diag(a) - dt Lap) x = b on the torus by CG preconditioned with (abar - dt Lap)^{-1},
// abar the geometric mean of a > 0. Returns the iteration count.
int pcg_shifted_torus(const ConeGeometry& g, const Field& a, double dt, const Field& b, Field& x, double rtol,
                      int max_it);

// Thomas algorithm; requires a diagonally dominant or SPD system. Overwrites nothing.
// lower[0] and upper[n-1] are ignored.
void solve_tridiag(const Field& lower, const Field& diag, const Field& upper, const Field& rhs, Field& x);

// LAPACK dgtsv (partial pivoting) for general tridiagonal systems. Throws on singularity.
void solve_tridiag_pivoted(const Field& lower, const Field& diag, const Field& upper, const Field& rhs,
                           Field& x);

// Discrete heat semigroup exp(tau Lap_h) on the torus; m implicit Euler substeps on the radial model.
Field heat_semigroup(const ConeGeometry& g, double tau, const Field& u, int radial_substeps = 16);

}  // namespace conemaflow
