#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "conemaflow/config.hpp"
#include "conemaflow/elliptic.hpp"
#include "conemaflow/forcing.hpp"
#include "conemaflow/geometry.hpp"

namespace conemaflow {

namespace fs = std::filesystem;

inline constexpr const char* kVersion = "0.4.0";

enum ExitCode { kExitOk = 0, kExitConfig = 1, kExitSolver = 2, kExitEstimate = 3 };

struct FileDigest {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct StageRecord {
  std::string name;
  std::string status;  // done | skipped | failed
  double wall_seconds = 0.0;
  std::vector<FileDigest> files;
  std::string message;
};

struct RunManifest {
  std::string config_hash;
  std::string version = kVersion;
  nlohmann::ordered_json config;
  std::vector<std::string> warnings;
  std::vector<StageRecord> stages;
  std::string verdict;  // pass | estimate failure | solver failure | nothing to run
  int exit_code = kExitOk;

  const StageRecord* stage(const std::string& name) const;
  // every file of every stage, sorted by path
  std::vector<FileDigest> inventory() const;
  nlohmann::ordered_json to_json() const;
};

// Which stages to execute; later stages pull earlier ones in.
enum class Target { Family, Continuation, Estimates, Stationarity, All };

struct OrchestrateOptions {
  Target target = Target::All;
  bool resume = true;
  bool quiet = false;
};

// Runs the configured pipeline into out/, writing manifest.json last (also on failure).
// Stages whose outputs are already on disk with matching digests under the same config hash are skipped.
RunManifest orchestrate(const RunConfig& cfg, const fs::path& out, const OrchestrateOptions& opt = {});

// F from the forcing section, Lipschitz constant estimated. Fills mc for the manufactured case.
ForcingModel build_forcing(const RunConfig& cfg, const ConeGeometry& g, ManufacturedCase* mc = nullptr);

// A discrete stationary potential for the stationarity pipeline. Slope-zero forcing has no
// stationary point unless the Monge-Ampere constant is absorbed: F is then shifted by log c in place.
struct StationaryStart {
  Field phi0;
  double forcing_shift = 0.0;
  double residual = 0.0;
  std::string route;  // football | manufactured | poisson | newton
};
StationaryStart stationary_start(const RunConfig& cfg, const ConeGeometry& g, ForcingModel& F,
                                 const ManufacturedCase* mc);

// sha256 of the materialized config dump
std::string config_hash(const RunConfig& cfg);

}  // namespace conemaflow
