#pragma once

#include <functional>
#include <string>

#include "conemaflow/geometry.hpp"

namespace conemaflow {

enum class ForcingKind { Zero, Linear, Manufactured, Custom };

std::string to_string(ForcingKind k);

// F(v, z) as a function of the potential value v at node z.
//   Linear:       mu v + hfield(z)
//   Manufactured: fstar(z) - lambda (v - target(z))
//   Custom:       user callables (tabulated builders below)
struct ForcingModel {
  ForcingKind kind = ForcingKind::Zero;
  double mu = 0.0;
  Field hfield;  // Linear; empty means zero
  double lambda = 1.0;
  Field target, fstar;  // Manufactured
  std::function<double(double, std::size_t)> custom, custom_dv;
  double lipschitz_K = 0.0;

  static ForcingModel zero();
  static ForcingModel linear(double mu, Field hfield);
  static ForcingModel linear_const(double mu, double h0, std::size_t n);
  static ForcingModel manufactured(Field target, Field fstar, double lambda);
  // Piecewise-linear in v, independent of z. Evaluation outside [vs.front(), vs.back()] throws.
  static ForcingModel tabulated(Field vs, Field Fs);
  static ForcingModel callable(std::function<double(double, std::size_t)> f,
                               std::function<double(double, std::size_t)> df);

  double eval(double v, std::size_t z) const;
  double dv(double v, std::size_t z) const;
  // true when F is affine in v with a z-independent slope
  bool affine() const { return kind != ForcingKind::Custom; }
  double slope() const;

  // Max |dF/dv| over sampled v in [-R, R] and all nodes; stored in lipschitz_K.
  double estimate_lipschitz(double R, std::size_t nodes);
};

}  // namespace conemaflow
