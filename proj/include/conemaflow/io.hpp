#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "conemaflow/continuation.hpp"
#include "conemaflow/flow.hpp"
#include "conemaflow/geometry.hpp"

namespace conemaflow {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

// Doubles are written with 17 significant digits so files round-trip and digest stably.
void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);
void write_json(const fs::path& path, const ojson& j);
ojson read_json(const fs::path& path);

// x1, x2, value (radial: x, value)
void write_field_csv(const fs::path& path, const ConeGeometry& g, const Field& f);

// <base>.bin little-endian float64 plus <base>.json {shape, dtype, byte_order, meta}
void write_field_raw(const fs::path& base, const Field& f, const std::vector<std::size_t>& shape,
                     const ojson& meta = ojson::object());
Field read_field_raw(const fs::path& base, ojson* sidecar = nullptr);
std::vector<std::size_t> field_shape(const ConeGeometry& g);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const fs::path& path);

// One directory per trajectory: snap_NNN.{bin,json} and trajectory.json.
void save_trajectory(const fs::path& dir, const ConeGeometry& g, const Trajectory& t);
Trajectory load_trajectory(const fs::path& dir);

// family.json, initial_j.{bin,json}, and member directories eps<k>_j<m>.
void save_family(const fs::path& dir, const FamilyRun& fam);
// geom and forcing must describe the same problem the family was run on.
FamilyRun load_family(const fs::path& dir, const ConeGeometry& g, const ForcingModel& F);

}  // namespace conemaflow
