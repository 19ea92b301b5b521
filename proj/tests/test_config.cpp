#include <doctest.h>

#include <string>

#include "conemaflow/config.hpp"

using namespace conemaflow;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_string(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("minimal config materializes defaults") {
  const RunConfig c = parse_config_string("surface = \"torus\"\nbeta = 0.5\nN = 128\n");
  CHECK(c.geometry.surface == SurfaceKind::Torus);
  CHECK(c.geometry.beta == 0.5);
  CHECK(c.geometry.N == 128);
  CHECK(c.family.eps_list == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(c.family.j_list == std::vector<int>{3, 5, 7});
  CHECK(c.family.T == 0.5);
  CHECK(c.initial.kind == InitialKind::ConeBump);
  const auto j = to_json(c);
  for (const char* k : {"geometry", "initial", "forcing", "family", "continuation", "estimates", "stationarity", "output"})
    CHECK(j.contains(k));
  CHECK(j["family"]["eta"] == 0.05);
  // the dump is what gets hashed; parsing twice gives the same bytes
  CHECK(to_json(parse_config_string("beta = 0.5")).dump() == j.dump());
}

TEST_CASE("range and ordering errors") {
  CHECK(error_of("beta = 1.5") == "beta must lie in (0,1]");
  CHECK(error_of("[geometry]\nbeta = 0.0") == "beta must lie in (0,1]");
  CHECK(error_of("[family]\neps_list = [0.1, 0.2]") == "eps-list must be strictly decreasing");
  CHECK(error_of("[family]\neps_list = [0.2, 0.1]") == "family.eps_list: the eps limit needs at least 3 values");
  CHECK(error_of("[family]\nj_list = [3, 3]") == "j-list must be strictly increasing");
  CHECK(error_of("[family]\nT = 0.1\nsnapshots = [0.05, 0.2]\n[continuation]\nprobes = [0.1]").find("snapshots") !=
        std::string::npos);
}

TEST_CASE("unknown keys name the key path") {
  CHECK(error_of("[geometry]\nbetta = 0.5") == "unknown key geometry.betta");
  CHECK(error_of("[nonsense]\na = 1") == "unknown key nonsense");
  CHECK(error_of("gamma = 1") == "unknown key gamma");
  CHECK(error_of("[family]\nT = \"long\"") == "family.T: expected a number");
}

TEST_CASE("cross-section checks") {
  CHECK(error_of("[forcing]\nkind = \"football\"") == "forcing.kind = football requires surface = football");
  CHECK(error_of("[geometry]\nsurface = \"football\"\nN = 512\n[forcing]\nkind = \"manufactured\"") ==
        "forcing.kind = manufactured requires surface = torus");
  CHECK(error_of("[geometry]\nN = 32\n[family]\nj_list = [3, 5, 9]").find("under-resolved") != std::string::npos);
  CHECK(error_of("[estimates]\nchecks = [\"gradient\", \"nope\"]") == "estimates.checks: unknown check 'nope'");
  CHECK(error_of("[family]\ncontroller = \"magic\"") == "family.controller must be 'schedule' or 'adaptive'");
  CHECK(error_of("[geometry]\nsurface = \"klein\"") == "geometry.surface: unknown surface 'klein'");
}

TEST_CASE("syntax errors are config errors") {
  CHECK(error_of("[geometry\nbeta = 0.5").find("TOML syntax error") == 0);
  CHECK_THROWS_AS(parse_config("/nonexistent/run.toml"), ConfigError);
}

TEST_CASE("rho warning") {
  CHECK(parse_config_string("[geometry]\nrho = 0.3\nbeta = 0.5").warnings.empty());
  CHECK(parse_config_string("[geometry]\nrho = 0.6\nbeta = 0.5").warnings.size() == 1);
}

TEST_CASE("family spec mirrors the config") {
  const RunConfig c = parse_config_string("[family]\ncontroller = \"adaptive\"\nadaptive_tol = 1e-5\n[initial]\nsigma0 = 2.0");
  const FamilySpec s = c.family_spec();
  CHECK(s.controller.kind == ControllerKind::Adaptive);
  CHECK(s.controller.adaptive_tol == 1e-5);
  CHECK(s.sigma0 == 2.0);
  CHECK(s.snapshots == c.family.snapshots);
}
