#include "conemaflow/config.hpp"

#include <cmath>
#include <set>
#include <sstream>

#include <toml.hpp>

namespace conemaflow {

namespace {

class Section {
 public:
  Section(const toml::table* t, std::string path) : t_(t), path_(std::move(path)) {}

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }

  template <class T>
  void get(const std::string& k, T& out) {
    seen_.insert(k);
    if (!t_) return;
    const toml::node* n = t_->get(k);
    if (!n) return;
    if constexpr (std::is_same_v<T, bool>) {
      auto v = n->value<bool>();
      if (!v) throw ConfigError(key(k) + ": expected a boolean");
      out = *v;
    } else if constexpr (std::is_same_v<T, std::string>) {
      auto v = n->value<std::string>();
      if (!v) throw ConfigError(key(k) + ": expected a string");
      out = *v;
    } else if constexpr (std::is_integral_v<T>) {
      auto v = n->value<std::int64_t>();
      if (!v) throw ConfigError(key(k) + ": expected an integer");
      out = T(*v);
    } else if constexpr (std::is_floating_point_v<T>) {
      auto v = n->value<double>();
      if (!v) throw ConfigError(key(k) + ": expected a number");
      out = *v;
    } else {
      const toml::array* a = n->as_array();
      if (!a) throw ConfigError(key(k) + ": expected an array");
      T vec;
      for (const auto& el : *a) {
        using E = typename T::value_type;
        if constexpr (std::is_same_v<E, std::string>) {
          auto v = el.value<std::string>();
          if (!v) throw ConfigError(key(k) + ": expected strings");
          vec.push_back(*v);
        } else if constexpr (std::is_integral_v<E>) {
          auto v = el.value<std::int64_t>();
          if (!v) throw ConfigError(key(k) + ": expected integers");
          vec.push_back(E(*v));
        } else {
          auto v = el.value<double>();
          if (!v) throw ConfigError(key(k) + ": expected numbers");
          vec.push_back(*v);
        }
      }
      out = std::move(vec);
    }
  }

  void finish() const {
    if (!t_) return;
    for (const auto& [k, v] : *t_)
      if (!seen_.count(std::string(k.str()))) throw ConfigError("unknown key " + key(std::string(k.str())));
  }

 private:
  const toml::table* t_;
  std::string path_;
  std::set<std::string> seen_;
};

const toml::table* sub(const toml::table& root, const std::string& name) {
  const toml::node* n = root.get(name);
  if (!n) return nullptr;
  const toml::table* t = n->as_table();
  if (!t) throw ConfigError(name + ": expected a table");
  return t;
}

const std::set<std::string> kCheckNames{"uniform_linf", "det_ratio",          "gradient",  "metric_equivalence",
                                        "phidot_derivatives", "holder", "barrier", "jeffres_uniqueness",
                                        "local_curvature"};

RunConfig from_table(const toml::table& root) {
  RunConfig c;
  const std::set<std::string> sections{"geometry", "initial", "forcing", "family",
                                       "continuation", "estimates", "stationarity", "output"};
  // top-level shorthand keys of the geometry section are accepted for minimal configs
  Section top(&root, "");
  {
    std::string surface = to_string(c.geometry.surface);
    Section g(sub(root, "geometry"), "geometry");
    g.get("surface", surface);
    g.get("beta", c.geometry.beta);
    g.get("N", c.geometry.N);
    g.get("delta", c.geometry.delta);
    g.get("gamma_min", c.geometry.gamma_min);
    g.get("rho", c.geometry.rho);
    g.finish();
    // top-level surface/beta/N
    for (const auto* k : {"surface", "beta", "N"}) {
      const toml::node* n = root.get(k);
      if (!n) continue;
      if (std::string(k) == "surface") top.get(k, surface);
      if (std::string(k) == "beta") top.get(k, c.geometry.beta);
      if (std::string(k) == "N") top.get(k, c.geometry.N);
    }
    try {
      c.geometry.surface = surface_from_string(surface);
    } catch (const std::exception&) {
      throw ConfigError("geometry.surface: unknown surface '" + surface + "'");
    }
  }
  {
    std::string kind = to_string(c.initial.kind);
    std::int64_t seed = std::int64_t(c.initial.seed);
    Section s(sub(root, "initial"), "initial");
    s.get("kind", kind);
    s.get("c", c.initial.c);
    s.get("r0", c.initial.r0);
    s.get("gamma", c.initial.gamma);
    s.get("core", c.initial.core);
    s.get("center1", c.initial.center1);
    s.get("center2", c.initial.center2);
    s.get("amplitude", c.initial.amplitude);
    s.get("seed", seed);
    s.get("modes", c.initial.modes);
    s.get("sigma0", c.initial.sigma0);
    s.finish();
    c.initial.seed = std::uint64_t(seed);
    try {
      c.initial.kind = initial_kind_from_string(kind);
    } catch (const std::exception&) {
      throw ConfigError("initial.kind: unknown kind '" + kind + "'");
    }
  }
  {
    Section s(sub(root, "forcing"), "forcing");
    s.get("kind", c.forcing.kind);
    s.get("mu", c.forcing.mu);
    s.get("h0", c.forcing.h0);
    s.get("lambda", c.forcing.lambda);
    s.get("delta0", c.forcing.delta0);
    s.get("bump_amp", c.forcing.bump_amp);
    s.get("table_v", c.forcing.table_v);
    s.get("table_F", c.forcing.table_F);
    s.get("R_max", c.forcing.R_max);
    s.finish();
  }
  {
    auto& f = c.family;
    Section s(sub(root, "family"), "family");
    s.get("eps_list", f.eps_list);
    s.get("j_list", f.j_list);
    s.get("T", f.T);
    s.get("snapshots", f.snapshots);
    s.get("eta", f.eta);
    s.get("controller", f.controller);
    s.get("dt0", f.dt0);
    s.get("growth", f.growth);
    s.get("dt_max", f.dt_max);
    s.get("adaptive_tol", f.adaptive_tol);
    s.get("enforce_horizon", f.enforce_horizon);
    s.get("density_floor", f.newton.density_floor);
    s.get("max_newton", f.newton.max_newton);
    s.get("newton_tol", f.newton.newton_tol);
    s.get("max_halvings", f.newton.max_halvings);
    s.finish();
  }
  {
    auto& k = c.continuation;
    Section s(sub(root, "continuation"), "continuation");
    s.get("tol_contraction", k.tol_contraction);
    s.get("probes", k.probes);
    s.get("annulus_r", k.annulus_r);
    s.get("tol_mono_factor", k.tol_mono_factor);
    s.finish();
  }
  {
    auto& e = c.estimates;
    auto& o = e.options;
    Section s(sub(root, "estimates"), "estimates");
    s.get("enabled", e.enabled);
    s.get("checks", o.enabled);
    s.get("uniform_tol", o.uniform_tol);
    s.get("linf_drift", o.linf_drift);
    s.get("gradient_spread", o.gradient_spread);
    s.get("phidot_spread", o.phidot_spread);
    s.get("barrier_m", o.barrier_m);
    s.get("barrier_l", o.barrier_l);
    s.get("barrier_tol", o.barrier_tol);
    s.get("barrier_t_max", o.barrier_t_max);
    s.get("jeffres_a", o.jeffres_a);
    s.get("jeffres_q", o.jeffres_q);
    s.get("curvature_annuli", o.curvature_annuli);
    s.get("holder_alpha", o.holder_alpha);
    s.finish();
  }
  {
    auto& st = c.stationarity;
    auto& o = st.options;
    Section s(sub(root, "stationarity"), "stationarity");
    s.get("enabled", st.enabled);
    s.get("eps_list", o.eps_list);
    s.get("j_list", o.j_list);
    s.get("include_limit_member", o.include_limit_member);
    s.get("sigma0", o.sigma0);
    s.get("T", o.T);
    s.get("snapshots", o.snapshots);
    s.get("probe_time", o.probe_time);
    s.get("tol_phidot", o.tol_phidot);
    s.get("tol_stationary", o.tol_stationary);
    s.get("gronwall_rel_tol", o.gronwall_rel_tol);
    s.get("gronwall_abs_tol", o.gronwall_abs_tol);
    s.get("holder_alpha_factor", o.holder_alpha_factor);
    s.finish();
  }
  {
    Section s(sub(root, "output"), "output");
    s.get("dir", c.output.dir);
    s.get("csv", c.output.csv);
    s.get("raw", c.output.raw);
    s.finish();
  }
  for (const auto& [k, v] : root) {
    const std::string key(k.str());
    if (sections.count(key) || key == "surface" || key == "beta" || key == "N") continue;
    throw ConfigError("unknown key " + key);
  }
  validate(c);
  return c;
}

template <class T>
bool strictly(const std::vector<T>& v, bool decreasing) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (decreasing ? !(v[i] < v[i - 1]) : !(v[i] > v[i - 1])) return false;
  return true;
}

}  // namespace

void validate(RunConfig& c) {
  const auto& g = c.geometry;
  if (!(g.beta > 0.0 && g.beta <= 1.0)) throw ConfigError("beta must lie in (0,1]");
  if (g.N < 8) throw ConfigError("geometry.N must be at least 8");
  if (!(g.delta >= 0.0)) throw ConfigError("geometry.delta must be nonnegative");
  if (!(g.rho > 0.0 && g.rho < 1.0)) throw ConfigError("geometry.rho must lie in (0,1)");
  const double bt = std::max({g.beta, 1.0 - g.beta, std::fabs(2.0 * g.beta - 1.0)});
  c.warnings.clear();
  if (!(1.0 - g.rho > bt)) {
    std::ostringstream o;
    o << "geometry.rho = " << g.rho << " violates 1 - rho > max(beta, 1-beta, |2beta-1|) = " << bt;
    c.warnings.push_back(o.str());
  }
  auto& f = c.family;
  if (!strictly(f.eps_list, true)) throw ConfigError("eps-list must be strictly decreasing");
  for (double e : f.eps_list)
    if (!(e > 0.0 && e <= 1.0)) throw ConfigError("family.eps_list: eps must lie in (0,1]");
  if (!strictly(f.j_list, false)) throw ConfigError("j-list must be strictly increasing");
  for (int j : f.j_list)
    if (j < 1) throw ConfigError("family.j_list: j must be >= 1");
  if (!f.eps_list.empty() && f.eps_list.size() < 3)
    throw ConfigError("family.eps_list: the eps limit needs at least 3 values");
  if (!f.eps_list.empty() && f.j_list.size() < 3)
    throw ConfigError("family.j_list: the j limit needs at least 3 values");
  if (!(f.T >= 0.0)) throw ConfigError("family.T must be nonnegative");
  for (double t : f.snapshots)
    if (!(t > 0.0 && t <= f.T)) throw ConfigError("family.snapshots: times must lie in (0, T]");
  if (f.controller != "schedule" && f.controller != "adaptive")
    throw ConfigError("family.controller must be 'schedule' or 'adaptive'");
  if (!(f.dt0 > 0.0 && f.dt_max >= f.dt0 && f.growth >= 1.0)) throw ConfigError("family: invalid step controller");
  const double h = (g.surface == SurfaceKind::Torus) ? 1.0 / g.N : 2.0 / (g.N - 1);
  if (!f.eps_list.empty() && !f.j_list.empty() && mollification_scale(c.initial.sigma0, f.j_list.back()) < h)
    throw ConfigError("family.j_list: mollification under-resolved at j = " + std::to_string(f.j_list.back()));
  const auto& fc = c.forcing;
  const std::set<std::string> kinds{"zero", "linear", "manufactured", "football", "table"};
  if (!kinds.count(fc.kind)) throw ConfigError("forcing.kind: unknown kind '" + fc.kind + "'");
  if (fc.kind == "manufactured" && g.surface != SurfaceKind::Torus)
    throw ConfigError("forcing.kind = manufactured requires surface = torus");
  if (fc.kind == "football" && g.surface != SurfaceKind::FootballRadial)
    throw ConfigError("forcing.kind = football requires surface = football");
  if (fc.kind == "table" && (fc.table_v.size() < 2 || fc.table_v.size() != fc.table_F.size()))
    throw ConfigError("forcing.table_v and forcing.table_F must have equal length >= 2");
  for (const auto& name : c.estimates.options.enabled)
    if (!kCheckNames.count(name)) throw ConfigError("estimates.checks: unknown check '" + name + "'");
  if (!(c.estimates.options.holder_alpha > 0.0 && c.estimates.options.holder_alpha < 1.0))
    throw ConfigError("estimates.holder_alpha out of range");
  auto& so = c.stationarity.options;
  if (!strictly(so.eps_list, true)) throw ConfigError("stationarity.eps_list: eps-list must be strictly decreasing");
  if (!strictly(so.j_list, false)) throw ConfigError("stationarity.j_list: j-list must be strictly increasing");
  for (double t : so.snapshots)
    if (!(t > 0.0 && t <= so.T)) throw ConfigError("stationarity.snapshots: times must lie in (0, T]");
  for (double t : c.continuation.probes)
    if (!(t > 0.0 && t <= f.T)) throw ConfigError("continuation.probes: times must lie in (0, T]");
}

RunConfig parse_config_string(const std::string& text) {
  try {
    return from_table(toml::parse(text));
  } catch (const toml::parse_error& e) {
    std::ostringstream o;
    o << "TOML syntax error: " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(o.str());
  }
}

RunConfig parse_config(const std::string& path) {
  try {
    return from_table(toml::parse_file(path));
  } catch (const toml::parse_error& e) {
    std::ostringstream o;
    o << path << ": " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(o.str());
  }
}

FamilySpec RunConfig::family_spec() const {
  FamilySpec s;
  s.eps_list = family.eps_list;
  s.j_list = family.j_list;
  s.T = family.T;
  s.snapshots = family.snapshots;
  s.sigma0 = initial.sigma0;
  s.controller.kind = family.controller == "adaptive" ? ControllerKind::Adaptive : ControllerKind::Schedule;
  s.controller.dt0 = family.dt0;
  s.controller.growth = family.growth;
  s.controller.dt_max = family.dt_max;
  s.controller.adaptive_tol = family.adaptive_tol;
  s.newton = family.newton;
  return s;
}

nlohmann::ordered_json to_json(const RunConfig& c) {
  nlohmann::ordered_json j;
  j["geometry"] = {{"surface", to_string(c.geometry.surface)}, {"beta", c.geometry.beta}, {"N", c.geometry.N},
                   {"delta", c.geometry.delta}, {"gamma_min", c.geometry.gamma_min}, {"rho", c.geometry.rho}};
  const auto& i = c.initial;
  j["initial"] = {{"kind", to_string(i.kind)}, {"c", i.c}, {"r0", i.r0}, {"gamma", i.gamma}, {"core", i.core},
                  {"center1", i.center1}, {"center2", i.center2}, {"amplitude", i.amplitude}, {"seed", i.seed},
                  {"modes", i.modes}, {"sigma0", i.sigma0}};
  const auto& f = c.forcing;
  j["forcing"] = {{"kind", f.kind}, {"mu", f.mu}, {"h0", f.h0}, {"lambda", f.lambda}, {"delta0", f.delta0},
                  {"bump_amp", f.bump_amp}, {"table_v", f.table_v}, {"table_F", f.table_F}, {"R_max", f.R_max}};
  const auto& m = c.family;
  j["family"] = {{"eps_list", m.eps_list}, {"j_list", m.j_list}, {"T", m.T}, {"snapshots", m.snapshots},
                 {"eta", m.eta}, {"controller", m.controller}, {"dt0", m.dt0}, {"growth", m.growth},
                 {"dt_max", m.dt_max}, {"adaptive_tol", m.adaptive_tol}, {"enforce_horizon", m.enforce_horizon},
                 {"density_floor", m.newton.density_floor}, {"max_newton", m.newton.max_newton},
                 {"newton_tol", m.newton.newton_tol}, {"max_halvings", m.newton.max_halvings}};
  const auto& k = c.continuation;
  j["continuation"] = {{"tol_contraction", k.tol_contraction}, {"probes", k.probes}, {"annulus_r", k.annulus_r},
                       {"tol_mono_factor", k.tol_mono_factor}};
  const auto& o = c.estimates.options;
  j["estimates"] = {{"enabled", c.estimates.enabled}, {"checks", o.enabled}, {"uniform_tol", o.uniform_tol},
                    {"linf_drift", o.linf_drift}, {"gradient_spread", o.gradient_spread},
                    {"phidot_spread", o.phidot_spread}, {"barrier_m", o.barrier_m}, {"barrier_l", o.barrier_l},
                    {"barrier_tol", o.barrier_tol}, {"barrier_t_max", o.barrier_t_max},
                    {"jeffres_a", o.jeffres_a}, {"jeffres_q", o.jeffres_q},
                    {"curvature_annuli", o.curvature_annuli}, {"holder_alpha", o.holder_alpha}};
  const auto& s = c.stationarity.options;
  j["stationarity"] = {{"enabled", c.stationarity.enabled}, {"eps_list", s.eps_list}, {"j_list", s.j_list},
                       {"include_limit_member", s.include_limit_member}, {"sigma0", s.sigma0}, {"T", s.T},
                       {"snapshots", s.snapshots}, {"probe_time", s.probe_time}, {"tol_phidot", s.tol_phidot},
                       {"tol_stationary", s.tol_stationary}, {"gronwall_rel_tol", s.gronwall_rel_tol},
                       {"gronwall_abs_tol", s.gronwall_abs_tol}, {"holder_alpha_factor", s.holder_alpha_factor}};
  j["output"] = {{"dir", c.output.dir}, {"csv", c.output.csv}, {"raw", c.output.raw}};
  return j;
}

}  // namespace conemaflow
