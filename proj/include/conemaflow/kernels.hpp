#pragma once

// Data-parallel inner loops used by the flow and elliptic solvers.
//
// Every kernel has a scalar reference implementation and an AVX2/FMA variant.
// The active table is chosen once at startup from cpuid; CONEMAFLOW_SIMD=scalar
// forces the reference path. Both tables are deterministic for a fixed ISA, so
// digests are reproducible run to run on the same machine.

#include <cstddef>
#include <span>

namespace conemaflow::kernels {

enum class Isa { Scalar, Avx2 };

struct KernelTable {
  // out = 5-point periodic Laplacian of an n x n row-major field, scaled by inv_h2.
  void (*laplacian_torus)(const double* in, double* out, int n, double inv_h2);
  // y[i] = lower[i]*x[i-1] + diag[i]*x[i] + upper[i]*x[i+1] (lower[0], upper[n-1] ignored).
  void (*tridiag_apply)(const double* lower, const double* diag, const double* upper,
                        const double* x, double* y, std::size_t n);
  // y += a*x
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y = x + a*y
  void (*xpay)(const double* x, double a, double* y, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*max_abs)(const double* x, std::size_t n);
  void (*minmax)(const double* x, std::size_t n, double* lo, double* hi);
  // out = a*b (elementwise)
  void (*mul)(const double* a, const double* b, double* out, std::size_t n);
  // out = 1 + in
  void (*add_one)(const double* in, double* out, std::size_t n);
};

const KernelTable& scalar_table();
const KernelTable& avx2_table();

bool cpu_has_avx2();
Isa active_isa();
// Overrides the runtime choice; used by equivalence tests and benchmarks.
void set_isa(Isa isa);
const char* isa_name(Isa isa);
const KernelTable& table();

// Span conveniences over the active table.
inline double dot(std::span<const double> x, std::span<const double> y) {
  return table().dot(x.data(), y.data(), x.size());
}
inline double max_abs(std::span<const double> x) { return table().max_abs(x.data(), x.size()); }
inline void axpy(double a, std::span<const double> x, std::span<double> y) {
  table().axpy(a, x.data(), y.data(), x.size());
}
inline void xpay(std::span<const double> x, double a, std::span<double> y) {
  table().xpay(x.data(), a, y.data(), x.size());
}

}  // namespace conemaflow::kernels
