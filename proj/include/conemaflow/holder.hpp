#pragma once

#include <cstdint>
#include <vector>

#include "conemaflow/geometry.hpp"

namespace conemaflow {

struct HolderOptions {
  std::vector<std::size_t> sample_sizes{4000, 16000, 64000};
  int local_radius = 3;  // grid offsets checked exhaustively around every node
  std::uint64_t seed = 0x5eed;
};

struct HolderResult {
  double seminorm = 0.0;
  std::vector<double> per_sample;  // running max after each sample size
  bool stable = true;              // last two sample sizes agree to 5%
};

// max |u(x)-u(y)| / d(x,y)^alpha over local grid pairs and quasi-random global pairs.
// region (optional) masks admissible nodes. alpha in (0,1) unless allow_any_alpha.
HolderResult holder_seminorm(const ConeGeometry& g, const Field& u, double alpha,
                             const std::vector<char>* region = nullptr, const HolderOptions& opt = {},
                             bool allow_any_alpha = false);

// Cone chart at a divisor point: w = z^beta.
struct ConeChart {
  std::size_t divisor_node = 0;
  double beta = 0.5;
  // annuli in |w|: (2^{-k-1} r_out, 2^{-k} r_out], k = 0..count-1
  double r_out = 0.5;
  int annuli = 4;
};

struct ConeAnnulus {
  double r_lo = 0.0, r_hi = 0.0;
  std::size_t nodes = 0;
  double seminorm = 0.0;
};

struct ConeHolderReport {
  double alpha = 0.0;
  double seminorm = 0.0;  // max over annuli
  std::vector<ConeAnnulus> annuli;
  bool alpha_admissible = true;  // alpha < min(1, 1/beta - 1)
};

// Cone-coordinate Laplacian v = beta^{-2} |z|^{2-2beta} Lap_flat(phi) off D, for the chart at the
// first divisor node.
Field cone_laplacian(const ConeGeometry& g, const Field& phi, const ConeChart& chart);
// |w| of every node in the chart, and the cone distance between two nodes.
double cone_radius(const ConeGeometry& g, std::size_t i, const ConeChart& chart);
double cone_distance(const ConeGeometry& g, std::size_t a, std::size_t b, const ConeChart& chart);

// C^{2,alpha,beta} proxy. Throws for alpha outside (0, min(1, 1/beta-1)) unless witness is set.
ConeHolderReport cone_holder_report(const ConeGeometry& g, const Field& phi, const ConeChart& chart, double alpha,
                                    bool witness = false);

}  // namespace conemaflow
