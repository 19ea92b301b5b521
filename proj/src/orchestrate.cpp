#include "conemaflow/orchestrate.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "conemaflow/continuation.hpp"
#include "conemaflow/estimates.hpp"
#include "conemaflow/flow.hpp"
#include "conemaflow/initial_data.hpp"
#include "conemaflow/io.hpp"

namespace conemaflow {

const StageRecord* RunManifest::stage(const std::string& name) const {
  for (const auto& s : stages)
    if (s.name == name) return &s;
  return nullptr;
}

std::vector<FileDigest> RunManifest::inventory() const {
  std::vector<FileDigest> all;
  for (const auto& s : stages) all.insert(all.end(), s.files.begin(), s.files.end());
  std::sort(all.begin(), all.end(), [](const FileDigest& a, const FileDigest& b) { return a.path < b.path; });
  return all;
}

ojson RunManifest::to_json() const {
  ojson j;
  j["version"] = version;
  j["config_hash"] = config_hash;
  j["verdict"] = verdict;
  j["exit_code"] = exit_code;
  j["warnings"] = warnings;
  j["config"] = config;
  j["stages"] = ojson::array();
  for (const auto& s : stages) {
    ojson r;
    r["name"] = s.name;
    r["status"] = s.status;
    r["wall_seconds"] = s.wall_seconds;
    if (!s.message.empty()) r["message"] = s.message;
    r["files"] = ojson::array();
    for (const auto& f : s.files) r["files"].push_back({{"path", f.path}, {"sha256", f.sha256}});
    j["stages"].push_back(r);
  }
  j["inventory"] = ojson::object();
  for (const auto& f : inventory()) j["inventory"][f.path] = f.sha256;
  return j;
}

std::string config_hash(const RunConfig& cfg) { return sha256_hex(to_json(cfg).dump()); }

ForcingModel build_forcing(const RunConfig& cfg, const ConeGeometry& g, ManufacturedCase* mc) {
  const auto& f = cfg.forcing;
  const std::size_t n = g.size();
  ForcingModel F;
  if (f.kind == "zero") {
    F = ForcingModel::zero();
  } else if (f.kind == "linear") {
    F = ForcingModel::linear_const(f.mu, f.h0, n);
  } else if (f.kind == "football") {
    F = ForcingModel::linear_const(2.0 * g.beta, -std::log(g.beta), n);
  } else if (f.kind == "manufactured") {
    ManufacturedCase m = manufactured_torus(g, f.delta0, f.bump_amp);
    F = ForcingModel::manufactured(m.phi_star, m.f_star, f.lambda);
    if (mc) *mc = std::move(m);
  } else if (f.kind == "table") {
    F = ForcingModel::tabulated(f.table_v, f.table_F);
    const double R = f.R_max > 0.0 ? f.R_max : std::min(std::fabs(f.table_v.front()), std::fabs(f.table_v.back()));
    F.estimate_lipschitz(R, 1);
    return F;
  } else {
    throw ConfigError("forcing.kind: unknown kind '" + f.kind + "'");
  }
  F.estimate_lipschitz(f.R_max > 0.0 ? f.R_max : 10.0, n);
  return F;
}

namespace {

// F + c
void shift_forcing(ForcingModel& F, double c, std::size_t n) {
  switch (F.kind) {
    case ForcingKind::Zero:
      F = ForcingModel::linear_const(0.0, c, n);
      break;
    case ForcingKind::Linear:
      if (F.hfield.empty()) F.hfield.assign(n, 0.0);
      for (auto& v : F.hfield) v += c;
      break;
    case ForcingKind::Manufactured:
      for (auto& v : F.fstar) v += c;
      break;
    case ForcingKind::Custom: {
      auto f = F.custom;
      F.custom = [f, c](double v, std::size_t z) { return f(v, z) + c; };
      break;
    }
  }
}

}  // namespace

StationaryStart stationary_start(const RunConfig& cfg, const ConeGeometry& g, ForcingModel& F,
                                 const ManufacturedCase* mc) {
  StationaryStart s;
  const Field S0 = source_field(g, 0.0);
  if (cfg.forcing.kind == "football" && !g.is_torus()) {
    Field phi(g.size());
    for (std::size_t i = 0; i < phi.size(); ++i) phi[i] = football_potential(g.x1[i], g.beta);
    s.phi0 = solve_regularized_ma(g, F, S0, phi).psi;
    s.route = "football";
  } else if (cfg.forcing.kind == "manufactured" && mc) {
    s.phi0 = solve_regularized_ma(g, F, S0, mc->phi_star).psi;
    s.route = "manufactured";
  } else if (F.affine() && F.slope() == 0.0) {
    const EllipticSolution e = solve_regularized_ma(g, ma_rhs_density(g, F, Field(g.size(), 0.0), 0.0), true);
    s.phi0 = e.psi;
    s.forcing_shift = -std::log(e.c_norm);
    shift_forcing(F, s.forcing_shift, g.size());
    s.route = "poisson";
  } else {
    s.phi0 = solve_regularized_ma(g, F, S0, Field(g.size(), 0.0)).psi;
    s.route = "newton";
  }
  s.residual = stationary_residual(make_problem(g, F, 0.0), s.phi0);
  return s;
}

namespace {

using Clock = std::chrono::steady_clock;

class Runner {
 public:
  Runner(const RunConfig& cfg, const fs::path& out, const OrchestrateOptions& opt) : cfg_(cfg), out_(out), opt_(opt) {
    man_.config = to_json(cfg);
    man_.config_hash = config_hash(cfg);
    man_.warnings = cfg.warnings;
    const fs::path prev = out / "manifest.json";
    if (opt.resume && fs::exists(prev)) {
      try {
        prev_ = read_json(prev);
      } catch (const std::exception&) {
        prev_ = ojson();
      }
    }
  }

  RunManifest run() {
    fs::create_directories(out_);
    try {
      execute();
    } catch (const ConfigError& e) {
      fail(kExitConfig, "configuration error", e.what());
    } catch (const std::exception& e) {
      fail(kExitSolver, "solver failure", e.what());
    }
    if (man_.verdict.empty()) man_.verdict = man_.exit_code == kExitOk ? "pass" : "estimate failure";
    write_json(out_ / "manifest.json", man_.to_json());
    return man_;
  }

 private:
  const RunConfig& cfg_;
  fs::path out_;
  OrchestrateOptions opt_;
  RunManifest man_;
  ojson prev_;
  StageRecord* cur_ = nullptr;

  void log(const char* fmt, const std::string& a, double b = 0.0) const {
    if (!opt_.quiet) std::fprintf(stderr, fmt, a.c_str(), b);
  }

  void fail(int code, const std::string& verdict, const std::string& msg) {
    man_.exit_code = code;
    man_.verdict = verdict;
    if (cur_) {
      cur_->status = "failed";
      cur_->message = msg;
    } else {
      StageRecord r{"setup", "failed", 0.0, {}, msg};
      man_.stages.push_back(r);
    }
    log("error: %s\n", msg);
  }

  bool wants(Target t) const { return opt_.target == Target::All || int(opt_.target) >= int(t); }

  void add_file(const fs::path& p) {
    cur_->files.push_back({fs::relative(p, out_).generic_string(), sha256_file(p)});
  }
  void add_tree(const fs::path& dir) {
    std::vector<fs::path> files;
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file()) files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& p : files) add_file(p);
  }

  // true when the previous manifest recorded this stage under the same config and every file is intact
  bool reusable(const std::string& name) const {
    if (!opt_.resume || !prev_.is_object() || prev_.value("config_hash", "") != man_.config_hash) return false;
    for (const auto& s : prev_["stages"]) {
      if (s.value("name", "") != name) continue;
      const std::string st = s.value("status", "");
      if (st != "done" && st != "skipped") return false;
      if (s["files"].empty()) return false;
      for (const auto& f : s["files"]) {
        const fs::path p = out_ / f["path"].get<std::string>();
        if (!fs::exists(p) || sha256_file(p) != f["sha256"].get<std::string>()) return false;
      }
      return true;
    }
    return false;
  }

  template <class Fn>
  void stage(const std::string& name, bool allow_skip, Fn&& body) {
    man_.stages.push_back(StageRecord{name, "done", 0.0, {}, {}});
    cur_ = &man_.stages.back();
    const auto t0 = Clock::now();
    const bool skip = allow_skip && reusable(name);
    if (skip) {
      for (const auto& s : prev_["stages"])
        if (s["name"] == name)
          for (const auto& f : s["files"]) cur_->files.push_back({f["path"], f["sha256"]});
      cur_->status = "skipped";
    }
    log("[%s] ", name);
    body(skip);
    cur_->wall_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    log("%s %.2fs\n", cur_->status, cur_->wall_seconds);
    cur_ = nullptr;
  }

  void execute();
};

ojson holder_json(const ConeHolderReport& h) {
  ojson j;
  j["alpha"] = h.alpha;
  j["seminorm"] = h.seminorm;
  j["alpha_admissible"] = h.alpha_admissible;
  j["annuli"] = ojson::array();
  for (const auto& a : h.annuli)
    j["annuli"].push_back({{"r_lo", a.r_lo}, {"r_hi", a.r_hi}, {"nodes", a.nodes}, {"seminorm", a.seminorm}});
  return j;
}

void Runner::execute() {
  const auto& gc = cfg_.geometry;
  const ConeGeometry g = ConeGeometry::make(gc.surface, gc.beta, gc.N);
  const auto& eps_list = cfg_.family.eps_list;
  DeltaChoice dc{gc.delta, 0.0, 0};

  stage("geometry", false, [&](bool) {
    if (!eps_list.empty()) dc = choose_delta(g, eps_list, gc.delta, gc.gamma_min);
    ojson j;
    j["surface"] = to_string(g.kind);
    j["beta"] = g.beta;
    j["N"] = g.N;
    j["h"] = g.h;
    j["nodes"] = g.size();
    j["divisor_nodes"] = g.divisor_nodes;
    j["delta"] = dc.delta;
    j["gamma"] = dc.gamma;
    j["delta_halvings"] = dc.halvings;
    write_json(out_ / "geometry.json", j);
    add_file(out_ / "geometry.json");
  });
  if (eps_list.empty() && !(cfg_.stationarity.enabled && wants(Target::Stationarity))) {
    man_.verdict = "nothing to run";
    return;
  }

  ManufacturedCase mc;
  ForcingModel F = build_forcing(cfg_, g, &mc);
  const bool have_mc = cfg_.forcing.kind == "manufactured";

  const bool family_wanted = !eps_list.empty() && opt_.target != Target::Stationarity;
  FamilySpec spec = cfg_.family_spec();
  {
    // continuation probes are always snapshot times
    auto& s = spec.snapshots;
    s.insert(s.end(), cfg_.continuation.probes.begin(), cfg_.continuation.probes.end());
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
  }

  if (family_wanted) {
    InitialData data;
    stage("initial", false, [&](bool) {
      data = make_test_potential(g, cfg_.initial);
      const fs::path dir = out_ / "initial";
      fs::create_directories(dir);
      ojson j;
      j["kind"] = to_string(cfg_.initial.kind);
      j["p_exponent"] = data.p_exponent;
      j["lp_norm"] = data.lp_norm;
      j["amplitude_used"] = data.amplitude_used;
      j["halvings"] = data.halvings;
      j["min_density"] = *std::min_element(data.density_f.begin(), data.density_f.end());
      write_json(dir / "initial.json", j);
      if (cfg_.output.raw) write_field_raw(dir / "phi0", data.phi0, field_shape(g));
      if (cfg_.output.csv) write_field_csv(dir / "phi0.csv", g, data.phi0);
      add_tree(dir);
    });

    stage("horizon", false, [&](bool) {
      FamilyRun shell;
      shell.geom = &g;
      shell.forcing = &F;
      shell.spec = spec;
      for (int j : spec.j_list) shell.initial.push_back(mollify(g, data.phi0, mollification_scale(spec.sigma0, j)));
      const EstimateContext ctx = make_estimate_context(shell, dc.delta, cfg_.forcing.R_max);
      const auto& h = ctx.horizon;
      ojson j;
      j["A"] = h.A;
      j["C_f"] = h.C_f;
      j["R_max"] = h.R_max;
      j["Tbar"] = h.Tbar;
      j["reached_limit"] = h.reached_limit;
      j["T"] = spec.T;
      j["enforced"] = cfg_.family.enforce_horizon;
      write_json(out_ / "horizon.json", j);
      std::vector<std::vector<double>> rows;
      for (std::size_t k = 0; k < h.t.size(); ++k) rows.push_back({h.t[k], h.G[k], h.G_lo[k]});
      write_csv(out_ / "horizon.csv", {"t", "G", "G_lo"}, rows);
      add_file(out_ / "horizon.json");
      add_file(out_ / "horizon.csv");
      if (cfg_.family.enforce_horizon && spec.T > h.Tbar)
        throw ConfigError("family.T = " + std::to_string(spec.T) + " exceeds the existence horizon Tbar = " +
                          std::to_string(h.Tbar));
    });

    FamilyRun fam;
    stage("family", true, [&](bool skip) {
      const fs::path dir = out_ / "family";
      if (skip) {
        fam = load_family(dir, g, F);
        return;
      }
      fam = run_family(g, F, data.phi0, spec);
      fs::remove_all(dir);
      save_family(dir, fam);
      add_tree(dir);
    });

    double richardson = 0.0;
    bool cont_pass = true;
    if (wants(Target::Continuation)) {
      stage("continuation", true, [&](bool skip) {
        const fs::path dir = out_ / "continuation";
        if (skip) {
          const ojson j = read_json(dir / "continuation.json");
          richardson = j["richardson"].get<double>();
          cont_pass = j["pass"].get<bool>();
          return;
        }
        fs::create_directories(dir);
        const std::size_t e_last = fam.n_eps() - 1, j_last = fam.n_j() - 1;
        richardson = richardson_error(g, F, fam.member(e_last, j_last), fam.initial[j_last], spec);
        const double tol_mono = cfg_.continuation.tol_mono_factor * richardson;

        std::vector<std::vector<double>> cauchy;
        ojson jl = ojson::array();
        for (std::size_t e = 0; e < fam.n_eps(); ++e) {
          const JLimitReport r = j_limit(fam, e, cfg_.continuation.tol_contraction);
          for (const auto& row : r.rows)
            cauchy.push_back({row.eps, double(row.j), double(row.l), row.bound, row.measured});
          cont_pass = cont_pass && r.contraction_pass && r.decay_pass;
          jl.push_back({{"eps", r.eps},
                        {"contraction_pass", r.contraction_pass},
                        {"decay_pass", r.decay_pass},
                        {"failure", r.failure}});
        }
        write_csv(dir / "cauchy.csv", {"eps", "j", "l", "bound", "measured"}, cauchy);

        const EpsLimitReport el = eps_limit(fam, cfg_.continuation.probes, tol_mono, cfg_.continuation.annulus_r);
        std::vector<std::vector<double>> mono;
        for (const auto& row : el.rows) mono.push_back({row.eps1, row.eps2, row.t, row.min_margin});
        write_csv(dir / "monotonicity.csv", {"eps1", "eps2", "t", "min_margin"}, mono);
        std::vector<std::vector<double>> ann;
        for (const auto& row : el.annulus) ann.push_back({row.eps1, row.eps2, row.t, row.c2_distance});
        write_csv(dir / "annulus.csv", {"eps1", "eps2", "t", "c2_distance"}, ann);
        cont_pass = cont_pass && el.monotone_pass && el.c2_decay_pass && el.consistency_pass;

        const ModulusReport mod = initial_continuity(fam.member(e_last, j_last), fam.phi0);
        std::vector<std::vector<double>> modrows;
        for (std::size_t k = 0; k < mod.table.size(); ++k)
          modrows.push_back({mod.table[k].first, mod.table[k].second, mod.to_phi0[k]});
        write_csv(dir / "modulus.csv", {"t", "sup_distance", "to_phi0"}, modrows);
        cont_pass = cont_pass && mod.pass;

        ojson j;
        j["pass"] = cont_pass;
        j["richardson"] = richardson;
        j["tol_mono"] = tol_mono;
        j["j_limit"] = jl;
        j["eps_limit"] = {{"monotone_pass", el.monotone_pass},
                          {"c2_decay_pass", el.c2_decay_pass},
                          {"consistency_pass", el.consistency_pass},
                          {"gaps", el.gaps},
                          {"failure", el.failure}};
        j["modulus"] = {{"t_lo", mod.t_lo}, {"t_hi", mod.t_hi}, {"ratio", mod.ratio}, {"pass", mod.pass}};
        write_json(dir / "continuation.json", j);
        add_tree(dir);
      });
      if (!cont_pass) man_.exit_code = kExitEstimate;
    }

    if (wants(Target::Estimates) && cfg_.estimates.enabled) {
      stage("estimates", true, [&](bool skip) {
        const fs::path dir = out_ / "estimates";
        if (skip) {
          if (!read_json(dir / "report.json")["pass"].get<bool>()) man_.exit_code = kExitEstimate;
          return;
        }
        fs::create_directories(dir);
        EstimateOptions o = cfg_.estimates.options;
        o.eta = cfg_.family.eta;
        o.discretization_error = richardson;
        const EstimateContext ctx = make_estimate_context(fam, dc.delta, cfg_.forcing.R_max);
        const EstimateReport rep = verify_estimates(fam, ctx, o);
        ojson j = rep.to_json();
        j["context"] = {{"delta", ctx.delta}, {"gamma", ctx.gamma}, {"C_f", ctx.C_f}, {"Tbar", ctx.horizon.Tbar}};
        write_json(dir / "report.json", j);
        for (const auto& c : rep.checks)
          if (!c.table.empty()) write_csv(dir / (c.name + ".csv"), {"t", "eps", "j", "value"}, c.table);
        add_tree(dir);
        if (!rep.pass()) man_.exit_code = kExitEstimate;
      });
    }
  }

  if (cfg_.stationarity.enabled && wants(Target::Stationarity)) {
    stage("stationarity", true, [&](bool skip) {
      const fs::path dir = out_ / "stationarity";
      if (skip) {
        const ojson j = read_json(dir / "stationarity.json");
        if (!j["failed_stage"].get<std::string>().empty()) throw SolverError(j["failed_stage"].get<std::string>());
        if (!j["pass"].get<bool>()) man_.exit_code = kExitEstimate;
        return;
      }
      fs::create_directories(dir);
      ForcingModel Fs = F;
      const StationaryStart start = stationary_start(cfg_, g, Fs, have_mc ? &mc : nullptr);
      StationarityOptions o = cfg_.stationarity.options;
      if (have_mc) o.reference = &mc.phi_star;
      const StationarityReport r = stationarity_pipeline(g, start.phi0, Fs, o);

      std::vector<std::vector<double>> rows;
      for (const auto& p : r.phidot) rows.push_back({p.eps, double(p.j), p.t, p.sup_phidot, p.bound});
      write_csv(dir / "phidot.csv", {"eps", "j", "t", "sup_phidot", "bound"}, rows);
      const bool pass = r.failed_stage.empty() && r.gronwall_pass && r.phidot_pass && r.stationary_pass;
      ojson j;
      j["pass"] = pass;
      j["failed_stage"] = r.failed_stage;
      j["route"] = start.route;
      j["forcing_shift"] = start.forcing_shift;
      j["phi0_residual"] = r.phi0_residual;
      j["gronwall_pass"] = r.gronwall_pass;
      j["phidot_pass"] = r.phidot_pass;
      j["stationary_pass"] = r.stationary_pass;
      j["limit_phidot_probe"] = r.limit_phidot_probe;
      j["probe_time"] = o.probe_time;
      j["limit_max_distance"] = r.limit_max_distance;
      if (o.reference) j["limit_max_distance_reference"] = r.limit_max_distance_reference;
      j["tol_phidot"] = o.tol_phidot;
      j["tol_stationary"] = o.tol_stationary;
      j["c_eps"] = r.c_eps;
      j["c_eps_j"] = r.c_eps_j;
      j["sym_residual_psi_eps"] = r.sym_residual_psi_eps;
      ojson d = ojson::array();
      for (const auto& [t, v] : r.limit_distance_by_t) d.push_back({t, v});
      j["limit_distance_by_t"] = d;
      write_json(dir / "stationarity.json", j);
      write_json(dir / "cone_holder.json", holder_json(r.holder));
      if (cfg_.output.raw) write_field_raw(dir / "phi0", start.phi0, field_shape(g));
      add_tree(dir);
      if (!r.failed_stage.empty()) throw SolverError("stationarity: " + r.failed_stage);
      if (!pass) man_.exit_code = kExitEstimate;
    });
  }
}

}  // namespace

RunManifest orchestrate(const RunConfig& cfg, const fs::path& out, const OrchestrateOptions& opt) {
  Runner r(cfg, out, opt);
  return r.run();
}

}  // namespace conemaflow
