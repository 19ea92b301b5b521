#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "conemaflow/holder.hpp"
#include "conemaflow/initial_data.hpp"

using namespace conemaflow;

namespace {

double sup_dist(const Field& a, const Field& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

double sup_of(const Field& a, const Field& b, double sign) {
  double m = -INFINITY;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, sign * (a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("zero amplitude cone bump") {
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, 32);
  InitialParams p;
  p.c = 0.0;
  const auto d = make_test_potential(g, p);
  for (double v : d.phi0) CHECK(v == 0.0);
  for (double v : d.density_f) CHECK(v == 1.0);
}

TEST_CASE("default cone bump is admissible") {
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, 128);
  const auto d = make_test_potential(g, InitialParams{});
  CHECK(*std::min_element(d.density_f.begin(), d.density_f.end()) >= 0.0);
  CHECK(g.integrate(d.density_f) == doctest::Approx(g.V0).epsilon(1e-12));
  CHECK(std::isfinite(d.lp_norm));
  CHECK(d.p_exponent > 1.0);
  for (int j : {3, 5, 7}) {
    const Field pj = mollify(g, d, j);
    const Field l = g.laplacian(pj);
    CHECK(1.0 + *std::min_element(l.begin(), l.end()) > 0.0);
    CHECK(sup_of(d.phi0, pj, 1.0) == doctest::Approx(sup_of(d.phi0, pj, -1.0)).epsilon(1e-12).scale(1e-12));
  }
}

TEST_CASE("random Fourier data is reproducible") {
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, 128);
  InitialParams p;
  p.kind = InitialKind::RandomFourierClipped;
  p.amplitude = 0.05;
  p.seed = 42;
  const auto a = make_test_potential(g, p);
  const auto b = make_test_potential(g, p);
  CHECK(*std::min_element(a.density_f.begin(), a.density_f.end()) > 0.0);
  CHECK(lp_norm(g, a.density_f, 2.0) == lp_norm(g, b.density_f, 2.0));
  CHECK(a.phi0 == b.phi0);
  p.seed = 43;
  CHECK(make_test_potential(g, p).phi0 != a.phi0);
}

TEST_CASE("kinked bump is Lipschitz but not better") {
  InitialParams p;
  p.kind = InitialKind::KinkedBump;
  p.r0 = 0.25;
  p.core = 0.1;
  p.c = 0.02;
  double lip[2], over[2];
  int k = 0;
  for (int N : {128, 256}) {
    const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, N);
    const auto d = make_test_potential(g, p);
    HolderOptions o;
    o.sample_sizes = {20000};
    lip[k] = holder_seminorm(g, d.phi0, 1.0, nullptr, o, true).seminorm;
    over[k] = holder_seminorm(g, d.phi0, 1.5, nullptr, o, true).seminorm;
    ++k;
  }
  CAPTURE(lip[0]);
  CAPTURE(lip[1]);
  CHECK(lip[1] / lip[0] == doctest::Approx(1.0).epsilon(0.1));
  CHECK(over[1] / over[0] > 1.3);
}

TEST_CASE("mollification") {
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, 128);
  SUBCASE("constants are fixed") {
    const Field c(g.size(), 0.7);
    for (int j : {2, 4, 6}) CHECK(sup_dist(mollify(g, c, mollification_scale(1.0, j)), c) <= 1e-13);
  }
  SUBCASE("smooth data converges monotonically") {
    Field u(g.size());
    for (std::size_t i = 0; i < u.size(); ++i) u[i] = 0.01 * std::cos(2 * M_PI * g.x1[i]) * std::sin(2 * M_PI * g.x2[i]);
    double prev = INFINITY;
    for (int j = 1; j <= 6; ++j) {
      const double d = sup_dist(mollify(g, u, mollification_scale(1.0, j)), u);
      CHECK(d < prev);
      prev = d;
    }
    CHECK(prev < 1e-4);
  }
  SUBCASE("cone bump, finer j is closer") {
    const auto d = make_test_potential(g, InitialParams{});
    CHECK(sup_dist(mollify(g, d, 6), d.phi0) < sup_dist(mollify(g, d, 3), d.phi0));
  }
  SUBCASE("under-resolved scale is refused") {
    CHECK_THROWS(mollify(g, Field(g.size(), 0.0), 0.5 * g.h));
  }
}

TEST_CASE("football potential") {
  // closed form: (1/beta) log(1 + e^{beta rho}) - log(1 + e^rho); symmetric in rho
  for (double b : {0.5, 0.75})
    for (double x : {0.1, 0.5, 0.9}) CHECK(football_potential(x, b) == doctest::Approx(football_potential(-x, b)));
  const double rho = 1.0, b = 0.5, x = std::tanh(rho / 2);
  const double expect = std::log1p(std::exp(b * rho)) / b - std::log1p(std::exp(rho));
  CHECK(football_potential(x, b) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(football_potential(0.3, 1.0) == doctest::Approx(0.0).scale(1));
}
