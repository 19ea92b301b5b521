#include "conemaflow/holder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace conemaflow {

namespace {

double wrap_half(double a) {
  a -= std::floor(a + 0.5);
  return a;  // in [-0.5, 0.5)
}

// Kronecker sequence in [0,1)^2 (plastic-number constants)
struct R2 {
  double a1 = 0.7548776662466927, a2 = 0.5698402909980532;
  double s1 = 0.5, s2 = 0.5;
  explicit R2(std::uint64_t seed) {
    s1 = std::fmod(0.5 + 0.6180339887498949 * double(seed % 1000003), 1.0);
    s2 = std::fmod(0.5 + 0.4142135623730950 * double(seed % 999983), 1.0);
  }
  std::pair<double, double> at(std::size_t k) const {
    return {std::fmod(s1 + a1 * double(k + 1), 1.0), std::fmod(s2 + a2 * double(k + 1), 1.0)};
  }
};

template <class Dist>
double pair_quotient(const Field& u, std::size_t a, std::size_t b, double alpha, Dist&& dist) {
  const double d = dist(a, b);
  if (!(d > 0.0)) return 0.0;
  return std::fabs(u[a] - u[b]) / std::pow(d, alpha);
}

// Local grid pairs plus quasi-random pairs among `nodes`.
template <class Dist>
HolderResult sampled_seminorm(const ConeGeometry& g, const Field& u, double alpha, const std::vector<char>& in,
                              const std::vector<std::size_t>& nodes, const HolderOptions& opt, Dist&& dist) {
  HolderResult res;
  double m = 0.0;
  const int r = opt.local_radius;
  if (g.is_torus()) {
    const int N = g.N;
    for (std::size_t a : nodes) {
      const int i = int(a / N), j = int(a % N);
      for (int di = 0; di <= r; ++di)
        for (int dj = -r; dj <= r; ++dj) {
          if (di == 0 && dj <= 0) continue;
          if (di * di + dj * dj > r * r) continue;
          const std::size_t b = std::size_t((i + di) % N) * N + std::size_t(((j + dj) % N + N) % N);
          if (!in[b]) continue;
          m = std::max(m, pair_quotient(u, a, b, alpha, dist));
        }
    }
  } else {
    for (std::size_t a : nodes)
      for (int d = 1; d <= r; ++d) {
        const std::size_t b = a + d;
        if (b >= u.size() || !in[b]) continue;
        m = std::max(m, pair_quotient(u, a, b, alpha, dist));
      }
  }
  R2 seq(opt.seed);
  std::size_t k = 0;
  const std::size_t n = nodes.size();
  for (std::size_t target : opt.sample_sizes) {
    for (; k < target && n > 1; ++k) {
      const auto [x, y] = seq.at(k);
      const std::size_t a = nodes[std::min(n - 1, std::size_t(x * n))];
      const std::size_t b = nodes[std::min(n - 1, std::size_t(y * n))];
      if (a == b) continue;
      m = std::max(m, pair_quotient(u, a, b, alpha, dist));
    }
    res.per_sample.push_back(m);
  }
  res.seminorm = m;
  if (res.per_sample.size() >= 2) {
    const double last = res.per_sample.back(), prev = res.per_sample[res.per_sample.size() - 2];
    res.stable = last == 0.0 || std::fabs(last - prev) <= 0.05 * last;
  }
  return res;
}

}  // namespace

HolderResult holder_seminorm(const ConeGeometry& g, const Field& u, double alpha, const std::vector<char>* region,
                             const HolderOptions& opt, bool allow_any_alpha) {
  if (!(alpha > 0.0) || (!allow_any_alpha && !(alpha < 1.0)))
    throw std::invalid_argument("holder exponent alpha out of range");
  std::vector<char> in = region ? *region : std::vector<char>(u.size(), 1);
  std::vector<std::size_t> nodes;
  for (std::size_t i = 0; i < u.size(); ++i)
    if (in[i]) nodes.push_back(i);
  return sampled_seminorm(g, u, alpha, in, nodes, opt,
                          [&](std::size_t a, std::size_t b) { return g.node_distance(a, b); });
}

namespace {

// chart coordinate z of a node relative to the chart's divisor point
std::pair<double, double> chart_z(const ConeGeometry& g, std::size_t i, const ConeChart& c) {
  if (g.is_torus()) return {wrap_half(g.x1[i] - g.x1[c.divisor_node]), wrap_half(g.x2[i] - g.x2[c.divisor_node])};
  // |z|^2 = (1+x)/(1-x) around x = -1; mirrored for the other pole
  const double x = (c.divisor_node == 0) ? g.x1[i] : -g.x1[i];
  if (x >= 1.0) return {INFINITY, 0.0};
  return {std::sqrt((1.0 + x) / (1.0 - x)), 0.0};
}

}  // namespace

double cone_radius(const ConeGeometry& g, std::size_t i, const ConeChart& c) {
  const auto [a, b] = chart_z(g, i, c);
  return std::pow(std::hypot(a, b), c.beta);
}

double cone_distance(const ConeGeometry& g, std::size_t a, std::size_t b, const ConeChart& c) {
  const auto [a1, a2] = chart_z(g, a, c);
  const auto [b1, b2] = chart_z(g, b, c);
  const double ra = std::pow(std::hypot(a1, a2), c.beta), rb = std::pow(std::hypot(b1, b2), c.beta);
  double dth = std::atan2(a2, a1) - std::atan2(b2, b1);
  dth = std::remainder(dth, 2.0 * std::numbers::pi);
  const double d2 = ra * ra + rb * rb - 2.0 * ra * rb * std::cos(c.beta * dth);
  return std::sqrt(std::max(0.0, d2));
}

Field cone_laplacian(const ConeGeometry& g, const Field& phi, const ConeChart& c) {
  const std::size_t n = phi.size();
  Field v(n, 0.0);
  if (g.is_torus()) {
    const Field lap = g.laplacian(phi);
    for (std::size_t i = 0; i < n; ++i) {
      if (g.is_divisor(i)) continue;
      const auto [a, b] = chart_z(g, i, c);
      const double r = std::hypot(a, b);
      v[i] = std::pow(r, 2.0 - 2.0 * c.beta) * lap[i] / (c.beta * c.beta);
    }
    return v;
  }
  // radial: flat w-plane Laplacian of a radial function, phi_rr + phi_r / r, by non-uniform
  // three-point differences in r = |w| along the ray.
  const bool south = c.divisor_node == 0;
  auto at = [&](std::size_t k) { return south ? k : n - 1 - k; };
  for (std::size_t k = 1; k + 1 < n; ++k) {
    const std::size_t im = at(k - 1), i0 = at(k), ip = at(k + 1);
    const double r0 = cone_radius(g, im, c), r1 = cone_radius(g, i0, c), r2 = cone_radius(g, ip, c);
    if (!std::isfinite(r2)) break;
    const double h1 = r1 - r0, h2 = r2 - r1;
    const double d1 = phi[i0] - phi[im], d2 = phi[ip] - phi[i0];
    const double prr = 2.0 * (d2 / h2 - d1 / h1) / (h1 + h2);
    const double pr = (h1 * h1 * d2 + h2 * h2 * d1) / (h1 * h2 * (h1 + h2));
    v[i0] = prr + pr / r1;
  }
  return v;
}

ConeHolderReport cone_holder_report(const ConeGeometry& g, const Field& phi, const ConeChart& c, double alpha,
                                    bool witness) {
  const double cap = std::min(1.0, 1.0 / c.beta - 1.0);
  ConeHolderReport rep;
  rep.alpha = alpha;
  rep.alpha_admissible = alpha > 0.0 && alpha < cap;
  if (!witness && !rep.alpha_admissible) throw std::invalid_argument("holder exponent alpha out of range");
  if (!(alpha > 0.0)) throw std::invalid_argument("holder exponent alpha out of range");
  const Field v = cone_laplacian(g, phi, c);
  const std::size_t n = phi.size();
  Field rad(n);
  for (std::size_t i = 0; i < n; ++i) rad[i] = cone_radius(g, i, c);
  auto dist = [&](std::size_t a, std::size_t b) { return cone_distance(g, a, b, c); };
  for (int k = 0; k < c.annuli; ++k) {
    ConeAnnulus an;
    an.r_hi = c.r_out * std::ldexp(1.0, -k);
    an.r_lo = 0.5 * an.r_hi;
    std::vector<char> in(n, 0);
    std::vector<std::size_t> nodes;
    for (std::size_t i = 0; i < n; ++i)
      if (!g.is_divisor(i) && rad[i] > an.r_lo && rad[i] <= an.r_hi) {
        // radial model: only the chart's own hemisphere
        if (!g.is_torus() && ((c.divisor_node == 0) ? g.x1[i] >= 0.0 : g.x1[i] <= 0.0)) continue;
        in[i] = 1;
        nodes.push_back(i);
      }
    an.nodes = nodes.size();
    if (!g.is_torus()) {
      // exhaustive pairs on the ray
      double m = 0.0;
      for (std::size_t a = 0; a < nodes.size(); ++a)
        for (std::size_t b = a + 1; b < nodes.size(); ++b)
          m = std::max(m, pair_quotient(v, nodes[a], nodes[b], alpha, dist));
      an.seminorm = m;
    } else if (nodes.size() > 1) {
      an.seminorm = sampled_seminorm(g, v, alpha, in, nodes, HolderOptions{}, dist).seminorm;
    }
    rep.seminorm = std::max(rep.seminorm, an.seminorm);
    rep.annuli.push_back(an);
  }
  return rep;
}

}  // namespace conemaflow
