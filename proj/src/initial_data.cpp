#include "conemaflow/initial_data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "conemaflow/kernels.hpp"
#include "conemaflow/spectral.hpp"

namespace conemaflow {

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::Zero: return "zero";
    case InitialKind::Constant: return "constant";
    case InitialKind::ConeBump: return "cone_bump";
    case InitialKind::KinkedBump: return "kinked_bump";
    case InitialKind::RandomFourierClipped: return "random_fourier";
    case InitialKind::Football: return "football";
  }
  return "?";
}

InitialKind initial_kind_from_string(const std::string& s) {
  if (s == "zero") return InitialKind::Zero;
  if (s == "constant") return InitialKind::Constant;
  if (s == "cone_bump") return InitialKind::ConeBump;
  if (s == "kinked_bump") return InitialKind::KinkedBump;
  if (s == "random_fourier") return InitialKind::RandomFourierClipped;
  if (s == "football") return InitialKind::Football;
  throw std::invalid_argument("unknown initial data kind '" + s + "'");
}

namespace {

double softplus(double a) { return std::max(a, 0.0) + std::log1p(std::exp(-std::fabs(a))); }

double uniform_pm1(std::mt19937_64& rng) {
  return double(rng() >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

Field profile(const ConeGeometry& g, const InitialParams& p, double amp) {
  const std::size_t n = g.size();
  Field phi(n, 0.0);
  switch (p.kind) {
    case InitialKind::Zero: break;
    case InitialKind::Constant: std::fill(phi.begin(), phi.end(), amp); break;
    case InitialKind::ConeBump:
      for (std::size_t i = 0; i < n; ++i) {
        const double d = g.distance_to_point(i, p.center1, p.center2);
        phi[i] = amp * std::pow(std::max(0.0, p.r0 * p.r0 - d * d), p.gamma);
      }
      break;
    case InitialKind::KinkedBump: {
      const double R = std::sqrt(p.r0 * p.r0 + p.core * p.core);
      for (std::size_t i = 0; i < n; ++i) {
        const double d = g.distance_to_point(i, p.center1, p.center2);
        phi[i] = amp * std::max(0.0, R - std::sqrt(d * d + p.core * p.core));
      }
      break;
    }
    case InitialKind::RandomFourierClipped: {
      std::mt19937_64 rng(p.seed);
      if (g.is_torus()) {
        const double tp = 2.0 * std::numbers::pi;
        for (int k1 = -p.modes; k1 <= p.modes; ++k1)
          for (int k2 = 0; k2 <= p.modes; ++k2) {
            if (k2 == 0 && k1 <= 0) continue;
            const double a = uniform_pm1(rng), b = uniform_pm1(rng);
            const double damp = 1.0 / (1.0 + k1 * k1 + k2 * k2);
            for (std::size_t i = 0; i < n; ++i) {
              const double arg = tp * (k1 * g.x1[i] + k2 * g.x2[i]);
              phi[i] += damp * (a * std::cos(arg) + b * std::sin(arg));
            }
          }
      } else {
        std::vector<double> coef(p.modes + 1);
        for (int l = 1; l <= p.modes; ++l) coef[l] = uniform_pm1(rng) / (1.0 + l * l);
        for (std::size_t i = 0; i < n; ++i) {
          const double x = g.x1[i];
          double pm = 1.0, pc = x;
          double s = coef.size() > 1 ? coef[1] * pc : 0.0;
          for (int l = 2; l <= p.modes; ++l) {
            const double pn = ((2 * l - 1) * x * pc - (l - 1) * pm) / l;
            pm = pc;
            pc = pn;
            s += coef[l] * pc;
          }
          phi[i] = s;
        }
      }
      const double m = kernels::max_abs(phi);
      if (m > 0)
        for (auto& v : phi) v *= amp / m;
      break;
    }
    case InitialKind::Football:
      if (g.is_torus()) throw std::invalid_argument("football potential needs the radial surface");
      for (std::size_t i = 0; i < n; ++i) phi[i] = football_potential(g.x1[i], g.beta);
      break;
  }
  return phi;
}

}  // namespace

double football_potential(double x, double beta) {
  if (x <= -1.0 || x >= 1.0) return 0.0;
  const double rho = std::log1p(x) - std::log1p(-x);
  return softplus(beta * rho) / beta - softplus(rho);
}

double lp_norm(const ConeGeometry& g, const Field& f, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += g.weights[i] * std::pow(std::fabs(f[i]), p);
  return std::pow(s, 1.0 / p);
}

double estimate_p_exponent(const ConeGeometry& g, const Field& f, double p_cap) {
  Field sorted(f);
  std::sort(sorted.begin(), sorted.end());
  const double med = sorted[sorted.size() / 2], top = sorted.back();
  if (!(top > 4.0 * std::max(med, 1e-300))) return p_cap;
  std::vector<double> lx, ly;
  for (double lam = 2.0 * med; lam <= 0.5 * top; lam *= std::sqrt(2.0)) {
    double mu = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i)
      if (f[i] > lam) mu += g.weights[i];
    if (mu <= 0) break;
    lx.push_back(std::log(lam));
    ly.push_back(std::log(mu));
  }
  if (lx.size() < 3) return p_cap;
  const double n = double(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sx += lx[k];
    sy += ly[k];
    sxx += lx[k] * lx[k];
    sxy += lx[k] * ly[k];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return std::clamp(-slope, 1.0, p_cap);
}

InitialData make_test_potential(const ConeGeometry& g, const InitialParams& p) {
  InitialData d;
  d.sigma0 = p.sigma0;
  double amp = (p.kind == InitialKind::RandomFourierClipped) ? p.amplitude : p.c;
  for (int k = 0;; ++k) {
    d.phi0 = profile(g, p, amp);
    d.density_f = g.laplacian(d.phi0);
    for (auto& v : d.density_f) v += 1.0;
    double lo, hi;
    kernels::table().minmax(d.density_f.data(), d.density_f.size(), &lo, &hi);
    const bool strict = p.kind == InitialKind::RandomFourierClipped;
    if (strict ? lo > 0.0 : lo >= 0.0) break;
    if (k == 40) throw std::runtime_error("positivity projection failed after 40 halvings");
    amp *= 0.5;
    d.halvings = k + 1;
  }
  d.amplitude_used = amp;
  d.p_exponent = estimate_p_exponent(g, d.density_f);
  d.lp_norm = lp_norm(g, d.density_f, d.p_exponent);
  return d;
}

double mollification_scale(double sigma0, int j) { return std::ldexp(sigma0, -j); }

double sup_symmetric_shift(const Field& v, const Field& base) {
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = v[i] - base[i];
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  return -0.5 * (lo + hi);
}

Field mollify(const ConeGeometry& g, const Field& phi0, double sigma) {
  if (sigma == 0.0) return phi0;
  if (sigma < g.h) throw std::runtime_error("mollification under-resolved");
  Field out = heat_semigroup(g, 0.5 * sigma * sigma, phi0);
  const double c = sup_symmetric_shift(out, phi0);
  for (auto& v : out) v += c;
  return out;
}

Field mollify(const ConeGeometry& g, const InitialData& data, int j) {
  if (j < 1) throw std::invalid_argument("mollification index must be >= 1");
  return mollify(g, data.phi0, mollification_scale(data.sigma0, j));
}

}  // namespace conemaflow
