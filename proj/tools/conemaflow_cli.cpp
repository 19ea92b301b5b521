// conemaflow: batch driver for the conical flow lab.
#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "conemaflow/config.hpp"
#include "conemaflow/continuation.hpp"
#include "conemaflow/estimates.hpp"
#include "conemaflow/flow.hpp"
#include "conemaflow/io.hpp"
#include "conemaflow/orchestrate.hpp"

using namespace conemaflow;

namespace {

int finish(const RunManifest& m, const fs::path& out) {
  std::printf("verdict: %s\n", m.verdict.c_str());
  for (const auto& s : m.stages)
    std::printf("  %-13s %-8s %8.2fs%s%s\n", s.name.c_str(), s.status.c_str(), s.wall_seconds,
                s.message.empty() ? "" : "  ", s.message.c_str());
  const fs::path report = out / "estimates" / "report.json";
  if (m.stage("estimates") && fs::exists(report)) {
    const auto rep = read_json(report);
    for (const auto& c : rep["checks"])
      std::printf("  check %-20s %s measured %.4g tol %.4g\n", c["name"].get<std::string>().c_str(),
                  c["pass"].get<bool>() ? "pass" : "FAIL", c["measured"].is_number() ? c["measured"].get<double>() : NAN,
                  c["tolerance"].is_number() ? c["tolerance"].get<double>() : NAN);
  }
  for (const auto& w : m.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  return m.exit_code;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> v;
  std::size_t pos = 0;
  while (pos < s.size()) {
    std::size_t end = s.find(',', pos);
    if (end == std::string::npos) end = s.size();
    const std::string tok = s.substr(pos, end - pos);
    try {
      std::size_t used = 0;
      v.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ConfigError("--snapshot-times: cannot parse '" + tok + "'");
    }
    pos = end + 1;
  }
  return v;
}

int verify_from_disk(RunConfig& cfg, const fs::path& traj, const fs::path& out) {
  const fs::path dir = fs::exists(traj / "family.json") ? traj : traj / "family";
  const auto& gc = cfg.geometry;
  const ConeGeometry g = ConeGeometry::make(gc.surface, gc.beta, gc.N);
  ForcingModel F = build_forcing(cfg, g);
  const FamilyRun fam = load_family(dir, g, F);
  const DeltaChoice dc = choose_delta(g, fam.spec.eps_list, gc.delta, gc.gamma_min);
  EstimateOptions o = cfg.estimates.options;
  o.eta = cfg.family.eta;
  const fs::path cont = dir.parent_path() / "continuation" / "continuation.json";
  if (fs::exists(cont)) {
    o.discretization_error = read_json(cont)["richardson"].get<double>();
  } else {
    const std::size_t e = fam.n_eps() - 1, j = fam.n_j() - 1;
    o.discretization_error = richardson_error(g, F, fam.member(e, j), fam.initial[j], fam.spec);
  }
  const EstimateContext ctx = make_estimate_context(fam, dc.delta, cfg.forcing.R_max);
  const EstimateReport rep = verify_estimates(fam, ctx, o);
  ojson j = rep.to_json();
  j["context"] = {{"delta", ctx.delta}, {"gamma", ctx.gamma}, {"C_f", ctx.C_f}, {"Tbar", ctx.horizon.Tbar}};
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  write_json(out, j);
  const fs::path base = out.has_parent_path() ? out.parent_path() : fs::path(".");
  for (const auto& c : rep.checks) {
    if (!c.table.empty()) write_csv(base / (c.name + ".csv"), {"t", "eps", "j", "value"}, c.table);
    std::printf("  check %-20s %s measured %.4g tol %.4g\n", c.name.c_str(), c.pass ? "pass" : "FAIL", c.measured,
                c.tolerance);
  }
  return rep.pass() ? kExitOk : kExitEstimate;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"conical parabolic Monge-Ampere flow lab"};
  app.require_subcommand(1);
  std::string config, out = "out", snaps, traj;
  bool no_resume = false, quiet = false;

  auto common = [&](CLI::App* c) {
    c->add_option("--config", config, "TOML run config")->required()->check(CLI::ExistingFile);
    c->add_flag("--no-resume", no_resume, "ignore outputs of a previous run");
    c->add_flag("-q,--quiet", quiet, "no stage log on stderr");
  };
  auto* run_flow = app.add_subcommand("run-flow", "run the (eps, j) family and store trajectories");
  common(run_flow);
  run_flow->add_option("--snapshot-times", snaps, "comma separated snapshot times");
  run_flow->add_option("--out", out, "output directory");
  auto* cont = app.add_subcommand("continuation", "j and eps limits of the family");
  common(cont);
  cont->add_option("--out", out, "output directory");
  auto* verify = app.add_subcommand("verify-estimates", "a priori estimate checks on stored trajectories");
  common(verify);
  verify->add_option("--trajectories", traj, "directory written by run-flow")->required();
  verify->add_option("--out", out, "report path")->required();
  auto* stat = app.add_subcommand("stationary-test", "stationary solution preserved by the double limit");
  common(stat);
  stat->add_option("--out", out, "output directory");
  auto* emit = app.add_subcommand("emit-report", "full pipeline with manifest");
  common(emit);
  emit->add_option("--out", out, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    RunConfig cfg = parse_config(config);
    OrchestrateOptions opt;
    opt.resume = !no_resume;
    opt.quiet = quiet;
    if (run_flow->parsed()) {
      if (!snaps.empty()) {
        cfg.family.snapshots = parse_list(snaps);
        validate(cfg);
      }
      opt.target = Target::Family;
    } else if (cont->parsed()) {
      opt.target = Target::Continuation;
    } else if (verify->parsed()) {
      return verify_from_disk(cfg, traj, out);
    } else if (stat->parsed()) {
      cfg.stationarity.enabled = true;
      opt.target = Target::Stationarity;
    } else {
      opt.target = Target::All;
    }
    const RunManifest m = orchestrate(cfg, out, opt);
    return finish(m, out);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const SolverError& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kExitSolver;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitSolver;
  }
}
