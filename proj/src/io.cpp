#include "conemaflow/io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include <openssl/evp.h>

namespace conemaflow {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& p, bool binary = false) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream o(p, binary ? std::ios::binary : std::ios::out);
  if (!o) throw std::runtime_error("cannot write " + p.string());
  return o;
}

std::string member_dir(std::size_t e, std::size_t j) { return "eps" + std::to_string(e) + "_j" + std::to_string(j); }

}  // namespace

void write_csv(const fs::path& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  auto o = open_out(path);
  for (std::size_t k = 0; k < header.size(); ++k) o << (k ? "," : "") << header[k];
  o << "\n";
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) o << (k ? "," : "") << fmt(r[k]);
    o << "\n";
  }
}

void write_json(const fs::path& path, const ojson& j) {
  auto o = open_out(path);
  o << j.dump(2) << "\n";
}

ojson read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  return ojson::parse(in);
}

void write_field_csv(const fs::path& path, const ConeGeometry& g, const Field& f) {
  std::vector<std::vector<double>> rows;
  rows.reserve(f.size());
  if (g.is_torus()) {
    for (std::size_t i = 0; i < f.size(); ++i) rows.push_back({g.x1[i], g.x2[i], f[i]});
    write_csv(path, {"x1", "x2", "value"}, rows);
  } else {
    for (std::size_t i = 0; i < f.size(); ++i) rows.push_back({g.x1[i], f[i]});
    write_csv(path, {"x", "value"}, rows);
  }
}

std::vector<std::size_t> field_shape(const ConeGeometry& g) {
  if (g.is_torus()) return {std::size_t(g.N), std::size_t(g.N)};
  return {std::size_t(g.N)};
}

void write_field_raw(const fs::path& base, const Field& f, const std::vector<std::size_t>& shape, const ojson& meta) {
  fs::path bin = base, js = base;
  bin += ".bin";
  js += ".json";
  {
    auto o = open_out(bin, true);
    if constexpr (std::endian::native == std::endian::little) {
      o.write(reinterpret_cast<const char*>(f.data()), std::streamsize(f.size() * sizeof(double)));
    } else {
      for (double v : f) {
        auto u = __builtin_bswap64(std::bit_cast<std::uint64_t>(v));
        o.write(reinterpret_cast<const char*>(&u), sizeof u);
      }
    }
  }
  ojson side;
  side["shape"] = shape;
  side["dtype"] = "float64";
  side["byte_order"] = "little";
  side["file"] = bin.filename().string();
  side["meta"] = meta;
  write_json(js, side);
}

Field read_field_raw(const fs::path& base, ojson* sidecar) {
  fs::path bin = base, js = base;
  bin += ".bin";
  js += ".json";
  const ojson side = read_json(js);
  std::size_t n = 1;
  for (auto s : side.at("shape")) n *= s.get<std::size_t>();
  std::ifstream in(bin, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + bin.string());
  Field f(n);
  in.read(reinterpret_cast<char*>(f.data()), std::streamsize(n * sizeof(double)));
  if (std::size_t(in.gcount()) != n * sizeof(double)) throw std::runtime_error("short read " + bin.string());
  if constexpr (std::endian::native != std::endian::little)
    for (auto& v : f) v = std::bit_cast<double>(__builtin_bswap64(std::bit_cast<std::uint64_t>(v)));
  if (sidecar) *sidecar = side;
  return f;
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, bytes.data(), bytes.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream o;
  for (unsigned i = 0; i < len; ++i) o << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return o.str();
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void save_trajectory(const fs::path& dir, const ConeGeometry& g, const Trajectory& t) {
  fs::create_directories(dir);
  ojson idx;
  idx["eps"] = t.eps;
  idx["j"] = t.j;
  idx["steps"] = t.steps;
  idx["newton_total"] = t.newton_total;
  idx["halvings"] = t.halvings;
  idx["local_error_budget"] = t.local_error_budget;
  idx["snapshots"] = ojson::array();
  for (std::size_t k = 0; k < t.snaps.size(); ++k) {
    const Snapshot& s = t.snaps[k];
    char name[32];
    std::snprintf(name, sizeof name, "snap_%03zu", k);
    ojson meta = {{"t", s.t},
                  {"eps", t.eps},
                  {"j", t.j},
                  {"sup_phi", s.sup_phi},
                  {"inf_phi", s.inf_phi},
                  {"min_density", s.min_density},
                  {"max_density", s.max_density},
                  {"sup_phidot", s.sup_phidot}};
    write_field_raw(dir / name, s.phi, field_shape(g), meta);
    idx["snapshots"].push_back(name);
  }
  write_json(dir / "trajectory.json", idx);
}

Trajectory load_trajectory(const fs::path& dir) {
  const ojson idx = read_json(dir / "trajectory.json");
  Trajectory t;
  t.eps = idx.at("eps");
  t.j = idx.at("j");
  t.steps = idx.at("steps");
  t.newton_total = idx.at("newton_total");
  t.halvings = idx.at("halvings");
  t.local_error_budget = idx.at("local_error_budget");
  for (const auto& name : idx.at("snapshots")) {
    ojson side;
    Snapshot s;
    s.phi = read_field_raw(dir / name.get<std::string>(), &side);
    const auto& m = side.at("meta");
    s.t = m.at("t");
    s.sup_phi = m.at("sup_phi");
    s.inf_phi = m.at("inf_phi");
    s.min_density = m.at("min_density");
    s.max_density = m.at("max_density");
    s.sup_phidot = m.at("sup_phidot");
    t.snaps.push_back(std::move(s));
  }
  return t;
}

void save_family(const fs::path& dir, const FamilyRun& fam) {
  fs::create_directories(dir);
  const ConeGeometry& g = *fam.geom;
  ojson j;
  j["surface"] = to_string(g.kind);
  j["beta"] = g.beta;
  j["N"] = g.N;
  j["eps_list"] = fam.spec.eps_list;
  j["j_list"] = fam.spec.j_list;
  j["T"] = fam.spec.T;
  j["snapshots"] = fam.spec.snapshots;
  j["sigma0"] = fam.spec.sigma0;
  j["K"] = fam.K;
  write_field_raw(dir / "phi0", fam.phi0, field_shape(g));
  for (std::size_t k = 0; k < fam.n_j(); ++k)
    write_field_raw(dir / ("initial_j" + std::to_string(fam.spec.j_list[k])), fam.initial[k], field_shape(g),
                    {{"j", fam.spec.j_list[k]}});
  j["members"] = ojson::array();
  for (std::size_t e = 0; e < fam.n_eps(); ++e)
    for (std::size_t k = 0; k < fam.n_j(); ++k) {
      save_trajectory(dir / member_dir(e, k), g, fam.traj[e][k]);
      j["members"].push_back({{"eps", fam.spec.eps_list[e]}, {"j", fam.spec.j_list[k]}, {"dir", member_dir(e, k)}});
    }
  write_json(dir / "family.json", j);
}

FamilyRun load_family(const fs::path& dir, const ConeGeometry& g, const ForcingModel& F) {
  const ojson j = read_json(dir / "family.json");
  if (j.at("N").get<int>() != g.N || j.at("surface").get<std::string>() != to_string(g.kind) ||
      j.at("beta").get<double>() != g.beta)
    throw std::runtime_error("trajectory directory does not match the configured geometry");
  FamilyRun fam;
  fam.geom = &g;
  fam.forcing = &F;
  fam.spec.eps_list = j.at("eps_list").get<std::vector<double>>();
  fam.spec.j_list = j.at("j_list").get<std::vector<int>>();
  fam.spec.T = j.at("T");
  fam.spec.snapshots = j.at("snapshots").get<std::vector<double>>();
  fam.spec.sigma0 = j.at("sigma0");
  fam.K = j.at("K");
  fam.phi0 = read_field_raw(dir / "phi0");
  for (int jj : fam.spec.j_list) fam.initial.push_back(read_field_raw(dir / ("initial_j" + std::to_string(jj))));
  fam.traj.assign(fam.n_eps(), std::vector<Trajectory>(fam.n_j()));
  for (std::size_t e = 0; e < fam.n_eps(); ++e)
    for (std::size_t k = 0; k < fam.n_j(); ++k) fam.traj[e][k] = load_trajectory(dir / member_dir(e, k));
  return fam;
}

}  // namespace conemaflow
