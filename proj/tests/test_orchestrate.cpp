#include <doctest.h>

#include "conemaflow/io.hpp"
#include "conemaflow/orchestrate.hpp"

using namespace conemaflow;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("conemaflow_orch_" + name);
  fs::remove_all(p);
  return p;
}

const char* kSmall = R"(
[geometry]
N = 32
[family]
eps_list = [0.2, 0.1, 0.05]
j_list = [2, 3, 4]
T = 0.05
snapshots = [1e-4, 1e-3, 1e-2, 0.05]
eta = 0.01
[continuation]
probes = [0.01, 0.05]
[estimates]
checks = ["uniform_linf", "gradient", "barrier"]
)";

OrchestrateOptions quiet() {
  OrchestrateOptions o;
  o.quiet = true;
  return o;
}

}  // namespace

TEST_CASE("empty family") {
  RunConfig c = parse_config_string("[family]\neps_list = []");
  const fs::path out = scratch("empty");
  const RunManifest m = orchestrate(c, out, quiet());
  CHECK(m.verdict == "nothing to run");
  CHECK(m.exit_code == 0);
  REQUIRE(m.stages.size() == 1);
  CHECK(m.stages[0].name == "geometry");
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("determinism and resume") {
  const RunConfig c = parse_config_string(kSmall);
  const fs::path a = scratch("a"), b = scratch("b");
  OrchestrateOptions o = quiet();
  o.resume = false;
  const RunManifest ma = orchestrate(c, a, o);
  const RunManifest mb = orchestrate(c, b, o);
  REQUIRE(ma.stage("estimates"));
  CHECK(ma.exit_code == mb.exit_code);
  const auto ia = ma.inventory(), ib = mb.inventory();
  REQUIRE(ia.size() == ib.size());
  for (std::size_t k = 0; k < ia.size(); ++k) {
    CHECK(ia[k].path == ib[k].path);
    CHECK(ia[k].sha256 == ib[k].sha256);
  }
  // resumed run skips the expensive stages and reproduces the report
  const RunManifest mr = orchestrate(c, a, quiet());
  CHECK(mr.stage("family")->status == "skipped");
  CHECK(mr.stage("estimates")->status == "skipped");
  CHECK(mr.exit_code == ma.exit_code);
  CHECK(sha256_file(a / "estimates" / "report.json") == sha256_file(b / "estimates" / "report.json"));
  // a damaged file forces the stage to rerun
  write_json(a / "estimates" / "report.json", ojson{{"pass", true}});
  const RunManifest mf = orchestrate(c, a, quiet());
  CHECK(mf.stage("estimates")->status == "done");
  CHECK(sha256_file(a / "estimates" / "report.json") == sha256_file(b / "estimates" / "report.json"));
}

TEST_CASE("estimates disabled") {
  RunConfig c = parse_config_string(std::string(kSmall) + "enabled = false\n");
  const fs::path out = scratch("noest");
  const RunManifest m = orchestrate(c, out, quiet());
  CHECK(m.stage("estimates") == nullptr);
  CHECK(!fs::exists(out / "estimates" / "report.json"));
  CHECK(m.stage("continuation") != nullptr);
  CHECK(m.exit_code == (read_json(out / "continuation" / "continuation.json")["pass"].get<bool>() ? 0 : 3));
}

TEST_CASE("horizon enforcement is a configuration error") {
  // F(v) = 50 v + 50 blows the sup bound up long before T
  RunConfig c = parse_config_string(std::string(kSmall) + "[forcing]\nkind = \"linear\"\nmu = 50.0\nh0 = 50.0\n");
  const RunManifest m = orchestrate(c, scratch("horizon"), quiet());
  CHECK(m.exit_code == kExitConfig);
  CHECK(m.stage("horizon")->status == "failed");
  CHECK(m.stage("family") == nullptr);
}

TEST_CASE("stationarity stage on the trivial case") {
  RunConfig c = parse_config_string(R"(
[geometry]
N = 16
beta = 1.0
[initial]
kind = "zero"
[family]
eps_list = []
[stationarity]
enabled = true
eps_list = [0.1, 0.01]
j_list = [1, 2]
T = 0.1
snapshots = [0.05, 0.1]
)");
  const fs::path out = scratch("stat");
  const RunManifest m = orchestrate(c, out, quiet());
  CHECK(m.exit_code == 0);
  const ojson j = read_json(out / "stationarity" / "stationarity.json");
  CHECK(j["pass"] == true);
  CHECK(j["route"] == "poisson");
  CHECK(fs::exists(out / "stationarity" / "phidot.csv"));
  CHECK(fs::exists(out / "stationarity" / "cone_holder.json"));
}
