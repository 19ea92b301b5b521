#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "conemaflow/continuation.hpp"
#include "conemaflow/elliptic.hpp"
#include "conemaflow/estimates.hpp"
#include "conemaflow/forcing.hpp"
#include "conemaflow/geometry.hpp"
#include "conemaflow/initial_data.hpp"

namespace conemaflow {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeometryConfig {
  SurfaceKind surface = SurfaceKind::Torus;
  double beta = 0.5;
  int N = 128;
  double delta = 0.1;  // starting value, halved until the omega_eps density is >= gamma_min
  double gamma_min = 0.05;
  double rho = 0.3;
};

// zero | linear | manufactured | football | table
struct ForcingConfig {
  std::string kind = "zero";
  double mu = 0.0;
  double h0 = 0.0;
  double lambda = 1.0;
  double delta0 = 1e-3;
  double bump_amp = 0.005;
  std::vector<double> table_v, table_F;
  double R_max = 0.0;  // working range; 0 selects 4 max(A, 1)
};

struct FamilyConfig {
  std::vector<double> eps_list{0.2, 0.1, 0.05};
  std::vector<int> j_list{3, 5, 7};
  double T = 0.5;
  std::vector<double> snapshots{1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 0.025, 0.05, 0.1, 0.2, 0.25, 0.5};
  double eta = 0.05;
  std::string controller = "schedule";
  double dt0 = 1e-6, growth = 1.25, dt_max = 2.5e-3, adaptive_tol = 1e-4;
  bool enforce_horizon = true;
  NewtonOptions newton;
};

struct ContinuationConfig {
  double tol_contraction = 0.02;
  std::vector<double> probes{0.1, 0.25, 0.5};
  double annulus_r = 0.25;
  double tol_mono_factor = 10.0;  // tol_mono = factor x Richardson estimate
};

struct EstimatesConfig {
  bool enabled = true;
  EstimateOptions options;
};

struct StationarityConfig {
  bool enabled = false;
  StationarityOptions options;
};

struct OutputConfig {
  std::string dir = "out";
  bool csv = true;
  bool raw = true;
};

struct RunConfig {
  GeometryConfig geometry;
  InitialParams initial;
  ForcingConfig forcing;
  FamilyConfig family;
  ContinuationConfig continuation;
  EstimatesConfig estimates;
  StationarityConfig stationarity;
  OutputConfig output;
  std::vector<std::string> warnings;

  FamilySpec family_spec() const;
};

RunConfig parse_config(const std::string& path);
RunConfig parse_config_string(const std::string& toml_text);
// Throws ConfigError naming the offending key.
void validate(RunConfig& cfg);
// Fully materialized config; key order is fixed, so the dump hashes stably.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace conemaflow
