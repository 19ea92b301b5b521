#include "conemaflow/forcing.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace conemaflow {

std::string to_string(ForcingKind k) {
  switch (k) {
    case ForcingKind::Zero: return "zero";
    case ForcingKind::Linear: return "linear";
    case ForcingKind::Manufactured: return "manufactured";
    case ForcingKind::Custom: return "custom";
  }
  return "?";
}

ForcingModel ForcingModel::zero() { return ForcingModel{}; }

ForcingModel ForcingModel::linear(double mu, Field hfield) {
  ForcingModel f;
  f.kind = ForcingKind::Linear;
  f.mu = mu;
  f.hfield = std::move(hfield);
  f.lipschitz_K = std::fabs(mu);
  return f;
}

ForcingModel ForcingModel::linear_const(double mu, double h0, std::size_t n) {
  return linear(mu, Field(n, h0));
}

ForcingModel ForcingModel::manufactured(Field target, Field fstar, double lambda) {
  if (target.size() != fstar.size()) throw std::invalid_argument("manufactured forcing: size mismatch");
  ForcingModel f;
  f.kind = ForcingKind::Manufactured;
  f.target = std::move(target);
  f.fstar = std::move(fstar);
  f.lambda = lambda;
  f.lipschitz_K = std::fabs(lambda);
  return f;
}

ForcingModel ForcingModel::tabulated(Field vs, Field Fs) {
  if (vs.size() != Fs.size() || vs.size() < 2) throw std::invalid_argument("tabulated forcing: bad table");
  if (!std::is_sorted(vs.begin(), vs.end())) throw std::invalid_argument("tabulated forcing: unsorted");
  auto tab = std::make_shared<std::pair<Field, Field>>(std::move(vs), std::move(Fs));
  auto locate = [tab](double v) {
    const auto& x = tab->first;
    if (v < x.front() || v > x.back()) throw std::out_of_range("forcing evaluated outside its table");
    auto it = std::upper_bound(x.begin(), x.end(), v);
    std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - x.begin(), 1) - 1, x.size() - 2);
    return k;
  };
  ForcingModel f;
  f.kind = ForcingKind::Custom;
  f.custom = [tab, locate](double v, std::size_t) {
    const std::size_t k = locate(v);
    const auto& x = tab->first;
    const auto& y = tab->second;
    const double u = (v - x[k]) / (x[k + 1] - x[k]);
    return y[k] + u * (y[k + 1] - y[k]);
  };
  f.custom_dv = [tab, locate](double v, std::size_t) {
    const std::size_t k = locate(v);
    const auto& x = tab->first;
    const auto& y = tab->second;
    return (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
  };
  return f;
}

ForcingModel ForcingModel::callable(std::function<double(double, std::size_t)> fn,
                                    std::function<double(double, std::size_t)> df) {
  ForcingModel f;
  f.kind = ForcingKind::Custom;
  f.custom = std::move(fn);
  f.custom_dv = std::move(df);
  return f;
}

double ForcingModel::eval(double v, std::size_t z) const {
  switch (kind) {
    case ForcingKind::Zero: return 0.0;
    case ForcingKind::Linear: return mu * v + (hfield.empty() ? 0.0 : hfield[z]);
    case ForcingKind::Manufactured: return fstar[z] - lambda * (v - target[z]);
    case ForcingKind::Custom: return custom(v, z);
  }
  return 0.0;
}

double ForcingModel::dv(double v, std::size_t z) const {
  switch (kind) {
    case ForcingKind::Zero: return 0.0;
    case ForcingKind::Linear: return mu;
    case ForcingKind::Manufactured: return -lambda;
    case ForcingKind::Custom: return custom_dv(v, z);
  }
  return 0.0;
}

double ForcingModel::slope() const {
  switch (kind) {
    case ForcingKind::Linear: return mu;
    case ForcingKind::Manufactured: return -lambda;
    default: return 0.0;
  }
}

double ForcingModel::estimate_lipschitz(double R, std::size_t nodes) {
  if (affine()) {
    lipschitz_K = std::fabs(slope());
    return lipschitz_K;
  }
  double K = 0.0;
  const int samples = 257;
  for (std::size_t z = 0; z < nodes; ++z)
    for (int s = 0; s < samples; ++s) {
      const double v = -R + 2.0 * R * s / (samples - 1);
      K = std::max(K, std::fabs(custom_dv(v, z)));
    }
  lipschitz_K = K;
  return K;
}

}  // namespace conemaflow
