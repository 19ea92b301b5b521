#include "conemaflow/spectral.hpp"

#include "conemaflow/kernels.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

extern "C" void dgtsv_(const int* n, const int* nrhs, double* dl, double* d, double* du, double* b,
                       const int* ldb, int* info);

namespace conemaflow {

namespace {
std::mutex& fftw_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct TorusSpectral::Plans {
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;
};

TorusSpectral::TorusSpectral(int N) : n_(N), plans_(std::make_unique<Plans>()) {
  const int nh = N / 2 + 1;
  lambda_.resize(std::size_t(N) * nh);
  const double h = 1.0 / N;
  for (int k1 = 0; k1 < N; ++k1)
    for (int k2 = 0; k2 < nh; ++k2) {
      const double s1 = std::sin(std::numbers::pi * k1 / N), s2 = std::sin(std::numbers::pi * k2 / N);
      lambda_[std::size_t(k1) * nh + k2] = -4.0 / (h * h) * (s1 * s1 + s2 * s2);
    }
  std::lock_guard<std::mutex> lock(fftw_mutex());
  double* r = fftw_alloc_real(std::size_t(N) * N);
  fftw_complex* c = fftw_alloc_complex(std::size_t(N) * nh);
  plans_->fwd = fftw_plan_dft_r2c_2d(N, N, r, c, FFTW_ESTIMATE | FFTW_UNALIGNED);
  plans_->bwd = fftw_plan_dft_c2r_2d(N, N, c, r, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(r);
  fftw_free(c);
  if (!plans_->fwd || !plans_->bwd) throw std::runtime_error("FFTW planning failed");
}

TorusSpectral::~TorusSpectral() {
  std::lock_guard<std::mutex> lock(fftw_mutex());
  if (plans_->fwd) fftw_destroy_plan(plans_->fwd);
  if (plans_->bwd) fftw_destroy_plan(plans_->bwd);
}

const TorusSpectral& TorusSpectral::get(int N) {
  static std::mutex m;
  static std::map<int, std::unique_ptr<TorusSpectral>> cache;
  std::lock_guard<std::mutex> lock(m);
  auto& slot = cache[N];
  if (!slot) slot = std::make_unique<TorusSpectral>(N);
  return *slot;
}

template <class Mult>
void TorusSpectral::apply_multiplier(Mult&& mult, const double* f, double* u) const {
  const int N = n_, nh = N / 2 + 1;
  const std::size_t nr = std::size_t(N) * N, nc = std::size_t(N) * nh;
  thread_local std::vector<double> rbuf;
  thread_local std::vector<std::complex<double>> cbuf;
  rbuf.assign(f, f + nr);
  cbuf.resize(nc);
  fftw_execute_dft_r2c(plans_->fwd, rbuf.data(), reinterpret_cast<fftw_complex*>(cbuf.data()));
  const double scale = 1.0 / double(nr);
  for (std::size_t k = 0; k < nc; ++k) cbuf[k] *= mult(k, lambda_[k]) * scale;
  fftw_execute_dft_c2r(plans_->bwd, reinterpret_cast<fftw_complex*>(cbuf.data()), u);
}

void TorusSpectral::solve_shifted(double a, double c, const double* f, double* u) const {
  apply_multiplier(
      [&](std::size_t k, double lam) {
        const double den = a - c * lam;
        if (k == 0 && a == 0.0) return 0.0;
        return 1.0 / den;
      },
      f, u);
}

void TorusSpectral::heat(double tau, const double* f, double* u) const {
  apply_multiplier([&](std::size_t, double lam) { return std::exp(tau * lam); }, f, u);
}

int pcg_shifted_torus(const ConeGeometry& g, const Field& a, double dt, const Field& b, Field& x, double rtol,
              int max_it) {
  const auto& K = kernels::table();
  const auto& sp = TorusSpectral::get(g.N);
  const std::size_t n = b.size();
  double abar = 0.0;
  for (double v : a) abar += std::log(v);
  abar = std::exp(abar / double(n));
  x.assign(n, 0.0);
  Field r(b), z(n), pdir(n), Ap(n), lap(n);
  sp.solve_shifted(abar, dt, r.data(), z.data());
  pdir = z;
  double rz = K.dot(r.data(), z.data(), n);
  const double bnorm = std::sqrt(K.dot(b.data(), b.data(), n));
  if (bnorm == 0.0) return 0;
  for (int it = 1; it <= max_it; ++it) {
    g.laplacian(pdir.data(), lap.data());
    K.mul(a.data(), pdir.data(), Ap.data(), n);
    K.axpy(-dt, lap.data(), Ap.data(), n);
    const double pAp = K.dot(pdir.data(), Ap.data(), n);
    const double alpha = rz / pAp;
    K.axpy(alpha, pdir.data(), x.data(), n);
    K.axpy(-alpha, Ap.data(), r.data(), n);
    if (std::sqrt(K.dot(r.data(), r.data(), n)) <= rtol * bnorm) return it;
    sp.solve_shifted(abar, dt, r.data(), z.data());
    const double rz_new = K.dot(r.data(), z.data(), n);
    K.xpay(z.data(), rz_new / rz, pdir.data(), n);
    rz = rz_new;
  }
  return max_it;
}

void solve_tridiag(const Field& lower, const Field& diag, const Field& upper, const Field& rhs, Field& x) {
  const std::size_t n = diag.size();
  Field c(n), d(n);
  x.resize(n);
  double b = diag[0];
  if (b == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
  c[0] = (n > 1 ? upper[0] : 0.0) / b;
  d[0] = rhs[0] / b;
  for (std::size_t i = 1; i < n; ++i) {
    b = diag[i] - lower[i] * c[i - 1];
    if (b == 0.0) throw std::runtime_error("tridiagonal solve: zero pivot");
    c[i] = (i + 1 < n ? upper[i] : 0.0) / b;
    d[i] = (rhs[i] - lower[i] * d[i - 1]) / b;
  }
  x[n - 1] = d[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
}

void solve_tridiag_pivoted(const Field& lower, const Field& diag, const Field& upper, const Field& rhs,
                           Field& x) {
  const int n = static_cast<int>(diag.size());
  Field dl(lower.begin() + 1, lower.end()), d(diag), du(upper.begin(), upper.end() - 1);
  x = rhs;
  const int nrhs = 1;
  int info = 0;
  dgtsv_(&n, &nrhs, dl.data(), d.data(), du.data(), x.data(), &n, &info);
  if (info != 0) throw std::runtime_error("tridiagonal solve: singular system");
}

Field heat_semigroup(const ConeGeometry& g, double tau, const Field& u, int radial_substeps) {
  Field out(u.size());
  if (tau == 0.0) return u;
  if (g.is_torus()) {
    TorusSpectral::get(g.N).heat(tau, u.data(), out.data());
    return out;
  }
  // (I - (tau/m) Lap)^{-m}, symmetrized with the quadrature weights
  const double step = tau / radial_substeps;
  const std::size_t n = u.size();
  Field lo(n), di(n), up(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double w = g.weights[i];
    lo[i] = -step * w * g.tri_lower[i];
    up[i] = -step * w * g.tri_upper[i];
    di[i] = w * (1.0 - step * g.tri_diag[i]);
  }
  Field cur = u, rhs(n);
  for (int s = 0; s < radial_substeps; ++s) {
    for (std::size_t i = 0; i < n; ++i) rhs[i] = g.weights[i] * cur[i];
    solve_tridiag(lo, di, up, rhs, cur);
  }
  return cur;
}

}  // namespace conemaflow
