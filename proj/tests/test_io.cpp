#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "conemaflow/io.hpp"
#include "conemaflow/initial_data.hpp"

using namespace conemaflow;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("conemaflow_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("sha256 known answer") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("raw field round trip is bit exact") {
  const fs::path d = scratch("raw");
  std::mt19937_64 rng(3);
  Field f(12 * 7);
  for (auto& v : f) v = std::ldexp(double(rng()), -70) - 1e-3;
  f[5] = -0.0;
  f[6] = 1e-310;
  write_field_raw(d / "f", f, {12, 7}, {{"t", 0.25}});
  ojson side;
  const Field g = read_field_raw(d / "f", &side);
  REQUIRE(g.size() == f.size());
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::memcmp(&f[i], &g[i], sizeof(double)) == 0);
  CHECK(side["shape"] == ojson::array({12, 7}));
  CHECK(side["dtype"] == "float64");
  CHECK(side["byte_order"] == "little");
  CHECK(side["meta"]["t"] == 0.25);
  CHECK(fs::file_size(d / "f.bin") == f.size() * 8);
}

TEST_CASE("csv writes round-trippable doubles") {
  const fs::path d = scratch("csv");
  write_csv(d / "a.csv", {"x", "y"}, {{0.1, 1.0 / 3.0}, {1e-300, -2.5}});
  std::ifstream in(d / "a.csv");
  std::string header, row;
  std::getline(in, header);
  CHECK(header == "x,y");
  std::getline(in, row);
  const double y = std::stod(row.substr(row.find(',') + 1));
  CHECK(y == 1.0 / 3.0);
}

TEST_CASE("trajectory and family round trip") {
  const fs::path d = scratch("fam");
  const auto g = ConeGeometry::make(SurfaceKind::Torus, 0.5, 16);
  const auto F = ForcingModel::zero();
  FamilySpec s;
  s.eps_list = {0.2, 0.1};
  s.j_list = {1, 2};
  s.T = 0.02;
  s.snapshots = {0.01, 0.02};
  const auto ini = make_test_potential(g, InitialParams{});
  const FamilyRun fam = run_family(g, F, ini.phi0, s);
  save_family(d, fam);
  const FamilyRun back = load_family(d, g, F);
  CHECK(back.spec.eps_list == s.eps_list);
  CHECK(back.spec.j_list == s.j_list);
  CHECK(back.phi0 == fam.phi0);
  for (std::size_t e = 0; e < 2; ++e)
    for (std::size_t j = 0; j < 2; ++j) {
      const auto& a = fam.traj[e][j];
      const auto& b = back.traj[e][j];
      REQUIRE(a.snaps.size() == b.snaps.size());
      for (std::size_t k = 0; k < a.snaps.size(); ++k) {
        CHECK(a.snaps[k].t == b.snaps[k].t);
        CHECK(a.snaps[k].phi == b.snaps[k].phi);
        CHECK(a.snaps[k].sup_phidot == b.snaps[k].sup_phidot);
      }
    }
  const auto other = ConeGeometry::make(SurfaceKind::Torus, 0.5, 32);
  CHECK_THROWS(load_family(d, other, F));
}
