#include "conemaflow/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace conemaflow::kernels {
namespace {

void laplacian_torus(const double* in, double* out, int n, double inv_h2) {
  for (int i = 0; i < n; ++i) {
    const double* row = in + static_cast<std::size_t>(i) * n;
    const double* up = in + static_cast<std::size_t>((i + n - 1) % n) * n;
    const double* dn = in + static_cast<std::size_t>((i + 1) % n) * n;
    double* o = out + static_cast<std::size_t>(i) * n;
    for (int j = 0; j < n; ++j) {
      const int jm = (j == 0) ? n - 1 : j - 1;
      const int jp = (j == n - 1) ? 0 : j + 1;
      o[j] = ((up[j] + dn[j]) + (row[jm] + row[jp]) - 4.0 * row[j]) * inv_h2;
    }
  }
}

void tridiag_apply(const double* lower, const double* diag, const double* upper,
                   const double* x, double* y, std::size_t n) {
  if (n == 0) return;
  if (n == 1) {
    y[0] = diag[0] * x[0];
    return;
  }
  y[0] = diag[0] * x[0] + upper[0] * x[1];
  for (std::size_t i = 1; i + 1 < n; ++i)
    y[i] = lower[i] * x[i - 1] + diag[i] * x[i] + upper[i] * x[i + 1];
  y[n - 1] = lower[n - 1] * x[n - 2] + diag[n - 1] * x[n - 1];
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void xpay(const double* x, double a, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + a * y[i];
}

double dot(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) m = std::max(m, std::fabs(x[i]));
  return m;
}

void minmax(const double* x, std::size_t n, double* lo, double* hi) {
  double a = x[0], b = x[0];
  for (std::size_t i = 1; i < n; ++i) {
    a = std::min(a, x[i]);
    b = std::max(b, x[i]);
  }
  *lo = a;
  *hi = b;
}

void mul(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void add_one(const double* in, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 + in[i];
}

}  // namespace

const KernelTable& scalar_table() {
  static const KernelTable t{laplacian_torus, tridiag_apply, axpy, xpay, dot,
                             max_abs,         minmax,        mul,  add_one};
  return t;
}

}  // namespace conemaflow::kernels
