#include "conemaflow/kernels.hpp"

#include <immintrin.h>

#include <algorithm>
#include <cmath>

#define CMF_AVX2 __attribute__((target("avx2,fma")))

namespace conemaflow::kernels {
namespace {

CMF_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

CMF_AVX2 inline double hmax(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_max_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_max_sd(lo, sh));
}

CMF_AVX2 inline double hmin(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_min_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_min_sd(lo, sh));
}

CMF_AVX2 void laplacian_torus(const double* in, double* out, int n, double inv_h2) {
  const __m256d four = _mm256_set1_pd(4.0);
  const __m256d s = _mm256_set1_pd(inv_h2);
  for (int i = 0; i < n; ++i) {
    const double* row = in + static_cast<std::size_t>(i) * n;
    const double* up = in + static_cast<std::size_t>((i + n - 1) % n) * n;
    const double* dn = in + static_cast<std::size_t>((i + 1) % n) * n;
    double* o = out + static_cast<std::size_t>(i) * n;
    // wrap columns handled in scalar, interior vectorized
    auto scalar_at = [&](int j) {
      const int jm = (j == 0) ? n - 1 : j - 1;
      const int jp = (j == n - 1) ? 0 : j + 1;
      o[j] = ((up[j] + dn[j]) + (row[jm] + row[jp]) - 4.0 * row[j]) * inv_h2;
    };
    if (n < 6) {
      for (int j = 0; j < n; ++j) scalar_at(j);
      continue;
    }
    scalar_at(0);
    int j = 1;
    for (; j + 4 <= n - 1; j += 4) {
      __m256d c = _mm256_loadu_pd(row + j);
      __m256d l = _mm256_loadu_pd(row + j - 1);
      __m256d r = _mm256_loadu_pd(row + j + 1);
      __m256d u = _mm256_loadu_pd(up + j);
      __m256d d = _mm256_loadu_pd(dn + j);
      __m256d acc = _mm256_add_pd(_mm256_add_pd(u, d), _mm256_add_pd(l, r));
      acc = _mm256_sub_pd(acc, _mm256_mul_pd(four, c));
      _mm256_storeu_pd(o + j, _mm256_mul_pd(acc, s));
    }
    for (; j < n; ++j) scalar_at(j);
  }
}

CMF_AVX2 void tridiag_apply(const double* lower, const double* diag, const double* upper,
                            const double* x, double* y, std::size_t n) {
  if (n == 0) return;
  if (n == 1) {
    y[0] = diag[0] * x[0];
    return;
  }
  y[0] = diag[0] * x[0] + upper[0] * x[1];
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) {
    __m256d a = _mm256_mul_pd(_mm256_loadu_pd(lower + i), _mm256_loadu_pd(x + i - 1));
    __m256d b = _mm256_mul_pd(_mm256_loadu_pd(diag + i), _mm256_loadu_pd(x + i));
    __m256d c = _mm256_mul_pd(_mm256_loadu_pd(upper + i), _mm256_loadu_pd(x + i + 1));
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_add_pd(a, b), c));
  }
  for (; i + 1 < n; ++i) y[i] = lower[i] * x[i - 1] + diag[i] * x[i] + upper[i] * x[i + 1];
  y[n - 1] = lower[n - 1] * x[n - 2] + diag[n - 1] * x[n - 1];
}

CMF_AVX2 void axpy(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) y[i] += a * x[i];
}

CMF_AVX2 void xpay(const double* x, double a, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) y[i] = x[i] + a * y[i];
}

CMF_AVX2 double dot(const double* x, const double* y, std::size_t n) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    a0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), a0);
    a1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), a1);
  }
  double s = hsum(_mm256_add_pd(a0, a1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

CMF_AVX2 double max_abs(const double* x, std::size_t n) {
  const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
  __m256d m = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_and_pd(mask, _mm256_loadu_pd(x + i)));
  double r = hmax(m);
  for (; i < n; ++i) r = std::max(r, std::fabs(x[i]));
  return r;
}

CMF_AVX2 void minmax(const double* x, std::size_t n, double* lo, double* hi) {
  double a = x[0], b = x[0];
  std::size_t i = 0;
  if (n >= 4) {
    __m256d vlo = _mm256_loadu_pd(x), vhi = vlo;
    for (i = 4; i + 4 <= n; i += 4) {
      __m256d v = _mm256_loadu_pd(x + i);
      vlo = _mm256_min_pd(vlo, v);
      vhi = _mm256_max_pd(vhi, v);
    }
    a = hmin(vlo);
    b = hmax(vhi);
  }
  for (; i < n; ++i) {
    a = std::min(a, x[i]);
    b = std::max(b, x[i]);
  }
  *lo = a;
  *hi = b;
}

CMF_AVX2 void mul(const double* a, const double* b, double* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

CMF_AVX2 void add_one(const double* in, double* out, std::size_t n) {
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_add_pd(one, _mm256_loadu_pd(in + i)));
  for (; i < n; ++i) out[i] = 1.0 + in[i];
}

}  // namespace

const KernelTable& avx2_table() {
  static const KernelTable t{laplacian_torus, tridiag_apply, axpy, xpay, dot,
                             max_abs,         minmax,        mul,  add_one};
  return t;
}

}  // namespace conemaflow::kernels
