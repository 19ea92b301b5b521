#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "conemaflow/geometry.hpp"

namespace conemaflow {

enum class InitialKind { Zero, Constant, ConeBump, KinkedBump, RandomFourierClipped, Football };

std::string to_string(InitialKind k);
InitialKind initial_kind_from_string(const std::string& s);

struct InitialParams {
  InitialKind kind = InitialKind::ConeBump;
  double c = 0.25;       // amplitude of the bump profiles / value for Constant
  double r0 = 0.35;      // support radius (ConeBump), kink radius (KinkedBump)
  double gamma = 1.5;    // ConeBump exponent
  double core = 0.1;     // KinkedBump core smoothing length
  double center1 = 0.5;  // torus: (center1, center2); radial: x-coordinate of the center
  double center2 = 0.5;
  double amplitude = 0.05;  // RandomFourierClipped sup-norm before projection
  std::uint64_t seed = 1;
  int modes = 4;
  double sigma0 = 1.0;  // mollification scale at j = 0
};

struct InitialData {
  Field phi0;
  Field density_f;  // 1 + Lap phi0
  double p_exponent = 0.0;
  double lp_norm = 0.0;
  double amplitude_used = 0.0;  // after positivity projection
  int halvings = 0;
  double sigma0 = 1.0;
};

// Closed form football potential relative to omega_0 at x = tanh(rho/2).
double football_potential(double x, double beta);

InitialData make_test_potential(const ConeGeometry& g, const InitialParams& p);

// sigma_j = sigma0 2^{-j}; sigma = 0 returns phi0 itself.
double mollification_scale(double sigma0, int j);
// Heat-kernel mollification at scale sigma followed by the sup-symmetric shift.
Field mollify(const ConeGeometry& g, const Field& phi0, double sigma);
Field mollify(const ConeGeometry& g, const InitialData& data, int j);

// Sup-symmetric additive shift: returns c with sup(base - (v+c)) == sup((v+c) - base).
double sup_symmetric_shift(const Field& v, const Field& base);

double lp_norm(const ConeGeometry& g, const Field& f, double p);
// Largest p for which the density tail suggests integrability (tail fit), capped at p_cap.
double estimate_p_exponent(const ConeGeometry& g, const Field& f, double p_cap = 8.0);

}  // namespace conemaflow
