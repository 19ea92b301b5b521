#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "conemaflow/geometry.hpp"

using namespace conemaflow;

namespace {

double sup_abs(const Field& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace

// high precision quadrature, mpmath at 30 digits
TEST_CASE("chi against independent quadrature") {
  CHECK(chi_eps(0.1, 0.5, 0.5) == doctest::Approx(1.8950439847446595592).epsilon(1e-13));
  CHECK(chi_eps(0.05, 1.0, 0.5) == doctest::Approx(3.3344840222874782757).epsilon(1e-13));
  CHECK(chi_eps(0.3, 0.2, 0.75) == doctest::Approx(0.33153420904509289171).epsilon(1e-13));
}

TEST_CASE("chi closed forms") {
  for (double e : {0.0, 0.01, 0.3})
    for (double b : {0.25, 0.5, 1.0}) CHECK(chi_eps(e, 0.0, b) == 0.0);
  for (double e : {0.0, 0.05, 0.2})
    for (double r : {0.1, 0.7}) CHECK(chi_eps(e, r, 1.0) == doctest::Approx(r).epsilon(1e-14));
  for (double b : {0.25, 0.5, 0.75})
    for (double r : {0.01, 0.3, 1.0})
      CHECK(chi_eps(0.0, r, b) == doctest::Approx(std::pow(r, b) / (b * b)).epsilon(1e-13));
  // d/dr by central difference
  const double e = 0.05, b = 0.5, r = 0.3, dr = 1e-5;
  const double fd = (chi_eps(e, r + dr, b) - chi_eps(e, r - dr, b)) / (2 * dr);
  CHECK(chi_eps_dr(e, r, b) == doctest::Approx(fd).epsilon(1e-8));
}

TEST_CASE("chi table interpolation error") {
  for (double e : {0.2, 1e-3, 1e-6}) {
    ChiTable t(e, 0.5, 1.0);
    double err = 0.0;
    for (int k = 0; k <= 997; ++k) {
      const double r = std::pow(k / 997.0, 3);
      err = std::max(err, std::fabs(t(r) - chi_eps(e, r, 0.5)));
    }
    CAPTURE(e);
    CHECK(err <= 1e-10);
  }
}

TEST_CASE("section norm") {
  CHECK(section_norm_sq_torus(0.0, 0.0) == 0.0);
  CHECK(section_norm_sq_torus(0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(section_norm_sq_radial(0.0) == doctest::Approx(0.25).epsilon(1e-15));
  for (auto kind : {SurfaceKind::Torus, SurfaceKind::FootballRadial}) {
    const auto g = ConeGeometry::make(kind, 0.5, kind == SurfaceKind::Torus ? 64 : 257);
    double lo = INFINITY, hi = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (g.is_divisor(i)) {
        CHECK(g.s2[i] == 0.0);
        continue;
      }
      CHECK(g.s2[i] > 0.0);
      if (g.dist[i] < 0.2) {
        const double q = g.s2[i] / (g.dist[i] * g.dist[i]);
        lo = std::min(lo, q);
        hi = std::max(hi, q);
      }
    }
    // first order zero of s
    CHECK(lo > 0.1);
    CHECK(hi < 10.0);
    Field one(g.size(), 1.0);
    CHECK(g.integrate(one) == doctest::Approx(g.V0).epsilon(1e-13));
  }
}

TEST_CASE("radial model is mirror symmetric") {
  const auto g = ConeGeometry::make(SurfaceKind::FootballRadial, 0.75, 101);
  for (int i = 0; i < g.N; ++i) {
    CHECK(g.x1[i] == -g.x1[g.N - 1 - i]);
    CHECK(g.s2[i] == g.s2[g.N - 1 - i]);
  }
}

TEST_CASE("laplacian of a Fourier mode") {
  const int N = 64;
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, N);
  Field u(g.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = std::sin(2 * M_PI * g.x1[i]);
  const Field l = g.laplacian(u);
  const double sym = -4.0 * N * N * std::pow(std::sin(M_PI / N), 2);
  for (std::size_t i = 0; i < u.size(); ++i) CHECK(l[i] == doctest::Approx(sym * u[i]).epsilon(1e-10).scale(1));
  // one-mode gradient: sup |grad u|^2 = (2 pi a)^2 up to O(h^2)
  const Field gr = g.grad_norm_sq(u);
  CHECK(*std::max_element(gr.begin(), gr.end()) == doctest::Approx(4 * M_PI * M_PI).epsilon(5e-3));
}

TEST_CASE("radial laplacian is the sphere laplacian") {
  // Legendre P2 is an eigenfunction with eigenvalue -6
  const auto g = ConeGeometry::make(SurfaceKind::FootballRadial, 0.5, 401);
  Field u(g.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.5 * (3 * g.x1[i] * g.x1[i] - 1);
  const Field l = g.laplacian(u);
  double err = 0.0;
  for (std::size_t i = 1; i + 1 < u.size(); ++i) err = std::max(err, std::fabs(l[i] + 6 * u[i]));
  CHECK(err < 1e-3);
  // the pole rows are half cells, first order
  CHECK(std::fabs(l[0] + 6 * u[0]) < 5 * g.h);
  CHECK(std::fabs(l.back() + 6 * u.back()) < 5 * g.h);
}

TEST_CASE("omega_eps trivial cases") {
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, 32);
  const Field d0 = omega_eps_density(g, {0.1, 0.0, 0.3});
  for (double v : d0) CHECK(v == 1.0);
  const auto g1 = ConeGeometry::make(SurfaceKind::Torus, 1.0, 32);
  const Field d1 = omega_eps_density(g1, {0.1, 0.04, 0.3});
  const Field ls = g1.laplacian(g1.s2);
  for (std::size_t i = 0; i < d1.size(); ++i) CHECK(d1[i] == doctest::Approx(1 + 0.04 * ls[i]).epsilon(1e-9));
}

TEST_CASE("omega_eps second order under refinement") {
  // compare N = 128, 256 against N = 1024 on the shared nodes
  const RegularizationParams reg{0.05, 0.025, 0.3};
  const auto gf = ConeGeometry::make(SurfaceKind::Torus, 0.5, 1024);
  const Field fine = omega_eps_density(gf, reg);
  double err[2];
  int k = 0;
  for (int N : {128, 256}) {
    const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, N);
    const Field d = omega_eps_density(g, reg);
    const int s = 1024 / N;
    double e = 0.0;
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        e = std::max(e, std::fabs(d[std::size_t(i) * N + j] - fine[std::size_t(i * s) * 1024 + j * s]));
    err[k++] = e;
  }
  CAPTURE(err[0]);
  CAPTURE(err[1]);
  CHECK(err[0] / err[1] > 3.5);
  CHECK(*std::min_element(fine.begin(), fine.end()) > 0.0);
}

TEST_CASE("f_eps trivial cases and family bound") {
  const auto g1 = ConeGeometry::make(SurfaceKind::Torus, 1.0, 32);
  CHECK(sup_abs(f_eps_field(g1, {0.1, 0.0, 0.3})) == 0.0);
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, 128);
  const Field f = f_eps_field(g, {0.1, 0.0, 0.3});
  for (std::size_t i = 1; i < g.size(); ++i) CHECK(f[i] == doctest::Approx(0.5 * std::log(0.01 + g.s2[i])));
  // sup table over the family stays bounded
  double lo = INFINITY, hi = 0.0;
  for (double e : {0.2, 0.1, 0.05, 0.025}) {
    const double s = sup_abs(f_eps_field(g, {e, 0.025, 0.3}));
    lo = std::min(lo, s);
    hi = std::max(hi, s);
  }
  CHECK(std::isfinite(hi));
  CHECK(hi < 3.0 * lo);
}

TEST_CASE("delta choice reaches gamma") {
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, 128);
  const DeltaChoice dc = choose_delta(g, {0.2, 0.1, 0.05}, 0.1, 0.05);
  CHECK(dc.gamma >= 0.05);
  CHECK(dc.delta <= 0.1);
  const Field d = omega_eps_density(g, {0.05, dc.delta, 0.3});
  CHECK(*std::min_element(d.begin(), d.end()) >= 0.05);
}

TEST_CASE("divisor cell average of log") {
  // eps = 1: log(1 + s2) ~ pi^2 (x^2 + y^2) / 2 averages to pi^2 h^2 / 12
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, 256);
  CHECK(divisor_cell_log_average(g, 1.0) == doctest::Approx(M_PI * M_PI * g.h * g.h / 12).epsilon(1e-3));
  CHECK(std::isfinite(divisor_cell_log_average(g, 0.0)));
  const Field S = source_field(g, 0.0);
  CHECK(std::isfinite(S[0]));
}
