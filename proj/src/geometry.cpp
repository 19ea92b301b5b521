#include "conemaflow/geometry.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "conemaflow/kernels.hpp"

namespace conemaflow {

namespace {

constexpr double kPi = std::numbers::pi;

// integrand of chi in t = log(1 + u/eps^2): (1/beta) eps^{2beta} expm1(beta t) e^t / expm1(t)
double chi_integrand_t(double t, double eps, double beta) {
  if (t <= 0.0) return std::pow(eps, 2.0 * beta);  // limit: eps^{2beta} * beta / beta
  const double e2b = std::pow(eps, 2.0 * beta);
  if (t > 700.0) return e2b * std::exp((beta + 1.0) * t - t) / beta;
  return e2b * std::expm1(beta * t) * std::exp(t) / (std::expm1(t) * beta);
}

double periodic_delta(double a) {
  a = std::fabs(a);
  a -= std::floor(a);
  return std::min(a, 1.0 - a);
}

}  // namespace

std::string to_string(SurfaceKind k) { return k == SurfaceKind::Torus ? "torus" : "football"; }

SurfaceKind surface_from_string(const std::string& s) {
  if (s == "torus") return SurfaceKind::Torus;
  if (s == "football" || s == "football_radial" || s == "FootballRadial") return SurfaceKind::FootballRadial;
  throw std::invalid_argument("unknown surface kind '" + s + "'");
}

double section_norm_sq_torus(double x1, double x2) {
  const double a = std::sin(kPi * x1), b = std::sin(kPi * x2);
  return 0.5 * (a * a + b * b);
}

double section_norm_sq_radial(double x) { return std::max(0.0, 0.25 * (1.0 - x) * (1.0 + x)); }

double section_norm_sq(const ConeGeometry& g, std::size_t node) { return g.s2.at(node); }

ConeGeometry ConeGeometry::make(SurfaceKind kind, double beta, int N) {
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("beta must lie in (0,1]");
  ConeGeometry g;
  g.kind = kind;
  g.beta = beta;
  g.N = N;
  g.V0 = 1.0;
  if (kind == SurfaceKind::Torus) {
    if (N < 4) throw std::invalid_argument("torus grid needs N >= 4");
    g.h = 1.0 / N;
    const std::size_t n = std::size_t(N) * N;
    g.x1.resize(n);
    g.x2.resize(n);
    g.s2.resize(n);
    g.weights.assign(n, g.h * g.h);
    g.dist.resize(n);
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j) {
        const std::size_t k = std::size_t(i) * N + j;
        g.x1[k] = i * g.h;
        g.x2[k] = j * g.h;
        g.s2[k] = (i == 0 && j == 0) ? 0.0 : section_norm_sq_torus(g.x1[k], g.x2[k]);
        g.dist[k] = std::hypot(periodic_delta(g.x1[k]), periodic_delta(g.x2[k]));
      }
    g.divisor_nodes = {0};
  } else {
    if (N < 5) throw std::invalid_argument("radial grid needs N >= 5");
    g.h = 2.0 / (N - 1);
    g.x1.resize(N);
    g.x2.assign(N, 0.0);
    g.s2.resize(N);
    g.weights.assign(N, 0.5 * g.h);
    g.weights.front() = g.weights.back() = 0.25 * g.h;
    g.dist.resize(N);
    for (int i = 0; i < N; ++i) {
      // symmetric construction keeps x -> -x exact in floating point
      const int m = N - 1 - i;
      g.x1[i] = (i <= m) ? -1.0 + i * g.h : 1.0 - m * g.h;
      if (2 * i == N - 1) g.x1[i] = 0.0;
    }
    for (int i = 0; i < N; ++i) {
      g.s2[i] = (i == 0 || i == N - 1) ? 0.0 : section_norm_sq_radial(g.x1[i]);
      g.dist[i] = (i == 0 || i == N - 1) ? 0.0 : std::acos(std::fabs(g.x1[i]));
    }
    g.face.resize(N - 1);
    for (int i = 0; i + 1 < N; ++i) {
      const double xm = 0.5 * (g.x1[i] + g.x1[i + 1]);
      g.face[i] = (1.0 - xm) * (1.0 + xm);
    }
    // exact mirror
    for (int i = 0; i + 1 < N; ++i) g.face[N - 2 - i] = g.face[i] = std::min(g.face[i], g.face[N - 2 - i]);
    g.divisor_nodes = {0, std::size_t(N - 1)};
    g.radial_tridiag(g.tri_lower, g.tri_diag, g.tri_upper);
  }
  return g;
}

bool ConeGeometry::is_divisor(std::size_t i) const {
  return std::find(divisor_nodes.begin(), divisor_nodes.end(), i) != divisor_nodes.end();
}

void ConeGeometry::radial_tridiag(Field& lower, Field& diag, Field& upper) const {
  const std::size_t n = N;
  lower.assign(n, 0.0);
  diag.assign(n, 0.0);
  upper.assign(n, 0.0);
  const double ih2 = 1.0 / (h * h);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    lower[i] = face[i - 1] * ih2;
    upper[i] = face[i] * ih2;
    diag[i] = -(lower[i] + upper[i]);
  }
  upper[0] = 2.0 * face[0] * ih2;
  diag[0] = -upper[0];
  lower[n - 1] = 2.0 * face[n - 2] * ih2;
  diag[n - 1] = -lower[n - 1];
}

void ConeGeometry::laplacian(const double* in, double* out) const {
  if (kind == SurfaceKind::Torus) {
    kernels::table().laplacian_torus(in, out, N, 1.0 / (h * h));
    return;
  }
  kernels::table().tridiag_apply(tri_lower.data(), tri_diag.data(), tri_upper.data(), in, out,
                                 std::size_t(N));
}

Field ConeGeometry::laplacian(const Field& u) const {
  Field out(u.size());
  laplacian(u.data(), out.data());
  return out;
}

Field ConeGeometry::grad_norm_sq(const Field& u) const {
  Field out(u.size(), 0.0);
  const double i2h = 0.5 / h;
  if (kind == SurfaceKind::Torus) {
    for (int i = 0; i < N; ++i) {
      const int ip = (i + 1) % N, im = (i + N - 1) % N;
      for (int j = 0; j < N; ++j) {
        const int jp = (j + 1) % N, jm = (j + N - 1) % N;
        const double gx = (u[std::size_t(ip) * N + j] - u[std::size_t(im) * N + j]) * i2h;
        const double gy = (u[std::size_t(i) * N + jp] - u[std::size_t(i) * N + jm]) * i2h;
        out[std::size_t(i) * N + j] = gx * gx + gy * gy;
      }
    }
  } else {
    for (int i = 1; i + 1 < N; ++i) {
      const double gx = (u[i + 1] - u[i - 1]) * i2h;
      out[i] = (1.0 - x1[i]) * (1.0 + x1[i]) * gx * gx;
    }
  }
  return out;
}

double ConeGeometry::integrate(const Field& u) const {
  return kernels::table().dot(u.data(), weights.data(), u.size());
}

double ConeGeometry::node_distance(std::size_t a, std::size_t b) const {
  if (kind == SurfaceKind::Torus) return std::hypot(periodic_delta(x1[a] - x1[b]), periodic_delta(x2[a] - x2[b]));
  return std::fabs(std::acos(std::clamp(x1[a], -1.0, 1.0)) - std::acos(std::clamp(x1[b], -1.0, 1.0)));
}

double ConeGeometry::distance_to_point(std::size_t a, double px1, double px2) const {
  if (kind == SurfaceKind::Torus) return std::hypot(periodic_delta(x1[a] - px1), periodic_delta(x2[a] - px2));
  return std::fabs(std::acos(std::clamp(x1[a], -1.0, 1.0)) - std::acos(std::clamp(px1, -1.0, 1.0)));
}

double chi_eps(double eps, double r, double beta) {
  if (eps < 0.0 || r < 0.0) throw std::invalid_argument("chi_eps: negative input");
  if (!(beta > 0.0 && beta <= 1.0)) throw std::invalid_argument("chi_eps: beta must lie in (0,1]");
  if (r == 0.0) return 0.0;
  if (beta == 1.0) return r;
  if (eps == 0.0) return std::pow(r, beta) / (beta * beta);
  const double T = std::log1p(r / (eps * eps));
  auto g = [&](double t) { return chi_integrand_t(t, eps, beta); };
  // split at a few points so the adaptive rule sees the e^{beta t} growth in pieces
  double total = 0.0;
  const int pieces = std::max(1, static_cast<int>(std::ceil(T / 4.0)));
  for (int k = 0; k < pieces; ++k) {
    const double a = T * k / pieces, b = T * (k + 1) / pieces;
    total += boost::math::quadrature::gauss_kronrod<double, 31>::integrate(g, a, b, 15, 1e-14);
  }
  return total;
}

double chi_eps_dr(double eps, double r, double beta) {
  if (eps < 0.0 || r < 0.0) throw std::invalid_argument("chi_eps_dr: negative input");
  if (beta == 1.0) return 1.0;
  if (eps == 0.0) return r == 0.0 ? INFINITY : std::pow(r, beta - 1.0) / beta;
  const double e2 = eps * eps;
  if (r == 0.0) return std::pow(e2, beta - 1.0);
  return std::pow(e2, beta) * std::expm1(beta * std::log1p(r / e2)) / (beta * r);
}

ChiTable::ChiTable(double eps, double beta, double r_max, int points)
    : eps_(eps), beta_(beta), r_max_(r_max) {
  if (eps <= 0.0) {
    y0_ = dy_ = 0.0;
    return;  // closed form branch
  }
  const double e2 = eps * eps;
  const double T = std::log1p(r_max / e2);
  y0_ = 0.0;
  dy_ = T / (points - 1);
  val_.assign(points, 0.0);
  der_.assign(points, 0.0);
  auto g = [&](double t) { return chi_integrand_t(t, eps, beta); };
  der_[0] = g(0.0);
  for (int k = 1; k < points; ++k) {
    const double a = (k - 1) * dy_, b = k * dy_;
    val_[k] = val_[k - 1] + boost::math::quadrature::gauss<double, 15>::integrate(g, a, b);
    der_[k] = g(b);
  }
}

double ChiTable::operator()(double r) const {
  if (r < 0.0) throw std::invalid_argument("ChiTable: negative r");
  if (eps_ <= 0.0) return chi_eps(0.0, r, beta_);
  if (beta_ == 1.0) return r;
  if (r > r_max_ * (1.0 + 1e-12)) throw std::out_of_range("ChiTable: r beyond table range");
  const double t = std::log1p(r / (eps_ * eps_));
  const double s = t / dy_;
  int k = static_cast<int>(s);
  k = std::clamp(k, 0, static_cast<int>(val_.size()) - 2);
  const double u = s - k;
  const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
  const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
  return h00 * val_[k] + h10 * dy_ * der_[k] + h01 * val_[k + 1] + h11 * dy_ * der_[k + 1];
}

Field chi_field(const ConeGeometry& g, double eps) {
  const double rmax = *std::max_element(g.s2.begin(), g.s2.end());
  ChiTable tab(eps, g.beta, std::max(rmax, 1e-300));
  Field out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = tab(g.s2[i]);
  return out;
}

Field omega_eps_density(const ConeGeometry& g, const RegularizationParams& reg) {
  Field out(g.size(), 1.0);
  if (reg.delta == 0.0) return out;
  const Field lap = g.laplacian(chi_field(g, reg.eps));
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = 1.0 + reg.delta * lap[i];
    if (!(out[i] > 0.0)) throw std::runtime_error("delta too large");
  }
  return out;
}

namespace {

using GL16 = boost::math::quadrature::gauss<double, 16>;

// Average of f over [0,a]^2 where f may be log-singular at the origin.
template <class F>
double corner_square_integral(F&& f, double a, int depth) {
  double total = 0.0;
  double scale = a;
  for (int d = 0; d < depth; ++d) {
    const double m = 0.5 * scale;
    auto sq = [&](double x0, double y0, double w) {
      return GL16::integrate(
          [&](double x) { return GL16::integrate([&](double y) { return f(x, y); }, y0, y0 + w); }, x0, x0 + w);
    };
    total += sq(m, 0.0, m) + sq(0.0, m, m) + sq(m, m, m);
    scale = m;
  }
  // remaining corner [0,scale]^2: midpoint value
  total += scale * scale * f(0.5 * scale, 0.5 * scale);
  return total;
}

template <class F>
double corner_interval_integral(F&& f, double a, int depth) {
  double total = 0.0;
  double scale = a;
  for (int d = 0; d < depth; ++d) {
    const double m = 0.5 * scale;
    total += GL16::integrate(f, m, scale);
    scale = m;
  }
  total += scale * f(0.5 * scale);
  return total;
}

}  // namespace

double divisor_cell_log_average(const ConeGeometry& g, double eps) {
  const double e2 = eps * eps;
  if (g.kind == SurfaceKind::Torus) {
    const double a = 0.5 * g.h;
    auto f = [&](double x, double y) { return std::log(e2 + section_norm_sq_torus(x, y)); };
    return corner_square_integral(f, a, 48) / (a * a);
  }
  const double a = 0.5 * g.h;
  auto f = [&](double v) { return std::log(e2 + 0.25 * v * (2.0 - v)); };
  return corner_interval_integral(f, a, 60) / a;
}

Field source_field(const ConeGeometry& g, double eps) {
  Field out(g.size(), 0.0);
  if (g.beta == 1.0) return out;
  const double c = 1.0 - g.beta, e2 = eps * eps;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = c * std::log(e2 + g.s2[i]);
  const double avg = c * divisor_cell_log_average(g, eps);
  for (auto k : g.divisor_nodes) out[k] = avg;
  return out;
}

Field f_eps_field(const ConeGeometry& g, const RegularizationParams& reg) {
  Field dens = omega_eps_density(g, reg);
  const Field src = source_field(g, reg.eps);
  for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = std::log(dens[i]) + src[i];
  return dens;
}

DeltaChoice choose_delta(const ConeGeometry& g, const std::vector<double>& eps_list, double delta0,
                         double gamma_min) {
  std::vector<Field> lap;
  for (double e : eps_list) lap.push_back(g.laplacian(chi_field(g, e)));
  double delta = delta0;
  for (int k = 0; k <= 40; ++k) {
    double gmin = INFINITY;
    for (const auto& l : lap) {
      double lo, hi;
      kernels::table().minmax(l.data(), l.size(), &lo, &hi);
      gmin = std::min(gmin, 1.0 + delta * lo);
    }
    if (lap.empty()) gmin = 1.0;
    if (gmin >= gamma_min) return {delta, gmin, k};
    delta *= 0.5;
  }
  throw std::runtime_error("delta too large");
}

Field model_cone_density(const ConeGeometry& g, double delta) {
  const double b = g.beta;
  Field out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double S = g.s2[i];
    double lap;
    if (S == 0.0) {
      lap = (b == 1.0) ? (g.is_torus() ? 2.0 * kPi * kPi : -2.0) : INFINITY;
    } else if (g.is_torus()) {
      const double x = g.x1[i], y = g.x2[i];
      const double gx = 0.5 * kPi * std::sin(2 * kPi * x), gy = 0.5 * kPi * std::sin(2 * kPi * y);
      const double lapS = kPi * kPi * (std::cos(2 * kPi * x) + std::cos(2 * kPi * y));
      lap = b * std::pow(S, b - 1) * lapS + b * (b - 1) * std::pow(S, b - 2) * (gx * gx + gy * gy);
    } else {
      const double x = g.x1[i];
      lap = -2.0 * b * std::pow(S, b) + b * b * x * x * std::pow(S, b - 1);
    }
    out[i] = 1.0 + delta * lap;
  }
  return out;
}

}  // namespace conemaflow
