#include "stapgate/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "stapgate/pulses.hpp"

namespace stapgate {

ConfigError::ConfigError(const std::string& message, std::string key, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " +
                                        message
                                  : message),
      key_(std::move(key)),
      line_(line) {}

std::vector<double> AxisSpec::values() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    out.push_back(points == 1 ? min : min + (max - min) * i / (points - 1));
  }
  return out;
}

std::string_view to_string(Truncation t) {
  return t == Truncation::full ? "full" : "single_excitation";
}

const std::vector<std::string>& experiment_ids() {
  static const std::vector<std::string> ids{
      "fig3a_tf_v",     "fig3b_amplitude",     "fig4_epsilon",
      "fig5_pulses_populations", "fig6_dark_zeta", "fig7_adiabatic_zeno",
      "fig8_decoherence", "fig9_robustness",   "gate_table",
      "cluster"};
  return ids;
}

std::vector<std::string> allowed_axes(std::string_view id) {
  if (id == "fig3a_tf_v" || id == "fig3b_amplitude") return {"lambda_tf", "v"};
  if (id == "fig4_epsilon") return {"epsilon"};
  if (id == "fig8_decoherence") return {"rate"};
  if (id == "fig9_robustness") {
    return {"delta_lambda", "delta_v", "delta_omega0", "delta_T"};
  }
  return {};
}

std::vector<AxisSpec> default_axes(std::string_view id) {
  if (id == "fig3a_tf_v") {
    return {{"lambda_tf", 10.0, 60.0, 21}, {"v", 0.2, 3.0, 21}};
  }
  if (id == "fig3b_amplitude") {
    return {{"lambda_tf", 10.0, 100.0, 21}, {"v", 0.2, 3.0, 21}};
  }
  if (id == "fig4_epsilon") return {{"epsilon", 0.15, 0.45, 31}};
  if (id == "fig8_decoherence") return {{"rate", 0.0, 0.05, 21}};
  if (id == "fig9_robustness") {
    return {{"delta_lambda", -0.1, 0.1, 21},
            {"delta_v", -0.1, 0.1, 21},
            {"delta_omega0", -0.1, 0.1, 21},
            {"delta_T", -0.1, 0.1, 21}};
  }
  return {};
}

namespace {

int line_of(const YAML::Node& node) {
  return node.Mark().is_null() ? 0 : node.Mark().line + 1;
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& key,
                       const std::string& message) {
  throw ConfigError(message, key, line_of(node));
}

void require_map(const YAML::Node& node, const std::string& key) {
  if (!node.IsMap()) fail(node, key, "'" + key + "' must be a mapping");
}

void reject_unknown(const YAML::Node& node, const std::string& section,
                    const std::set<std::string>& known) {
  for (const auto& kv : node) {
    const auto name = kv.first.as<std::string>();
    if (!known.count(name)) {
      const std::string key = section.empty() ? name : section + "." + name;
      fail(kv.first, key, "unknown key '" + key + "'");
    }
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& key) {
  if (!node.IsScalar()) fail(node, key, "'" + key + "' must be a scalar");
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    fail(node, key, "'" + key + "' has an invalid value '" +
                        node.as<std::string>() + "'");
  }
}

double number(const YAML::Node& node, const std::string& key) {
  const auto v = scalar<double>(node, key);
  if (!std::isfinite(v)) fail(node, key, "'" + key + "' must be finite");
  return v;
}

void parse_system(const YAML::Node& n, RunConfig& cfg) {
  require_map(n, "system");
  reject_unknown(n, "system", {"lambda", "v", "n_max", "units"});
  SystemParams& p = cfg.system;
  if (n["units"]) {
    const auto u = scalar<std::string>(n["units"], "system.units");
    if (u == "natural") {
      p.unit_mode = UnitMode::natural;
    } else if (u == "physical") {
      p.unit_mode = UnitMode::physical;
    } else {
      fail(n["units"], "system.units", "system.units must be natural or physical");
    }
  }
  if (n["lambda"]) p.lambda_coupling = number(n["lambda"], "system.lambda");
  if (n["v"]) p.hop_v = number(n["v"], "system.v");
  if (n["n_max"]) p.n_max = scalar<int>(n["n_max"], "system.n_max");
  if (!(p.hop_v > 0.0)) fail(n, "system.v", "system.v must be positive");
}

void parse_schedule(const YAML::Node& n, RunConfig& cfg) {
  require_map(n, "schedule");
  reject_unknown(n, "schedule",
                 {"scheme", "epsilon", "zeta", "lambda_tf", "omega0_prime"});
  ScheduleConfig& s = cfg.schedule;
  if (n["scheme"]) {
    const auto v = scalar<std::string>(n["scheme"], "schedule.scheme");
    if (v == "stap") {
      s.scheme = Scheme::stap;
    } else if (v == "adiabatic") {
      s.scheme = Scheme::adiabatic;
    } else if (v == "zeno") {
      s.scheme = Scheme::zeno;
    } else {
      fail(n["scheme"], "schedule.scheme",
           "schedule.scheme must be stap, adiabatic or zeno");
    }
  }
  if (n["epsilon"]) {
    s.epsilon = number(n["epsilon"], "schedule.epsilon");
    if (!(s.epsilon > 0.0 && s.epsilon < kPi / 2)) {
      fail(n["epsilon"], "schedule.epsilon", "schedule.epsilon must lie in (0, pi/2)");
    }
  }
  if (n["zeta"]) {
    s.zeta = scalar<int>(n["zeta"], "schedule.zeta");
    if (*s.zeta < 1) fail(n["zeta"], "schedule.zeta", "schedule.zeta must be >= 1");
  }
  if (n["lambda_tf"]) {
    s.lambda_tf = number(n["lambda_tf"], "schedule.lambda_tf");
    if (!(s.lambda_tf > 0.0)) {
      fail(n["lambda_tf"], "schedule.lambda_tf", "schedule.lambda_tf must be positive");
    }
  }
  if (n["omega0_prime"]) {
    s.omega0_prime = number(n["omega0_prime"], "schedule.omega0_prime");
    if (!(s.omega0_prime > 0.0)) {
      fail(n["omega0_prime"], "schedule.omega0_prime",
           "schedule.omega0_prime must be positive");
    }
  }
}

void parse_noise(const YAML::Node& n, RunConfig& cfg) {
  require_map(n, "noise");
  reject_unknown(n, "noise", {"gamma", "kappa_c", "kappa_f", "subspace"});
  NoiseModel& m = cfg.noise;
  const std::pair<const char*, double*> rates[] = {
      {"gamma", &m.gamma}, {"kappa_c", &m.kappa_c}, {"kappa_f", &m.kappa_f}};
  for (const auto& [name, slot] : rates) {
    if (!n[name]) continue;
    const std::string key = std::string("noise.") + name;
    *slot = number(n[name], key);
    if (*slot < 0.0) fail(n[name], key, key + " must be >= 0");
  }
  if (n["subspace"]) {
    const auto v = scalar<std::string>(n["subspace"], "noise.subspace");
    if (v == "psi") {
      m.set = DissipationSet::psi;
    } else if (v == "phi") {
      m.set = DissipationSet::phi;
    } else if (v == "full") {
      m.set = DissipationSet::full;
    } else {
      fail(n["subspace"], "noise.subspace", "noise.subspace must be psi, phi or full");
    }
  }
}

void parse_grids(const YAML::Node& n, ExperimentConfig& e) {
  require_map(n, "experiment.grids");
  const auto& ids = experiment_ids();
  for (const auto& kv : n) {
    const auto id = kv.first.as<std::string>();
    const std::string key = "experiment.grids." + id;
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
      fail(kv.first, key, "unknown experiment id '" + id + "'");
    }
    const auto allowed = allowed_axes(id);
    if (allowed.empty()) fail(kv.first, key, "experiment '" + id + "' has no grid");
    if (!kv.second.IsSequence()) fail(kv.second, key, key + " must be a list of axes");
    std::vector<AxisSpec> axes;
    for (const auto& a : kv.second) {
      require_map(a, key);
      reject_unknown(a, key, {"name", "min", "max", "points"});
      for (const char* req : {"name", "min", "max", "points"}) {
        if (!a[req]) fail(a, key + "." + req, "axis is missing '" + std::string(req) + "'");
      }
      AxisSpec ax;
      ax.name = scalar<std::string>(a["name"], key + ".name");
      if (std::find(allowed.begin(), allowed.end(), ax.name) == allowed.end()) {
        fail(a["name"], key + ".name",
             "axis '" + ax.name + "' is not a parameter of " + id);
      }
      ax.min = number(a["min"], key + ".min");
      ax.max = number(a["max"], key + ".max");
      ax.points = scalar<int>(a["points"], key + ".points");
      if (ax.points < 2) fail(a["points"], key + ".points", "axis needs at least 2 points");
      if (ax.name.rfind("delta_", 0) == 0 &&
          (std::abs(ax.min) > 0.5 || std::abs(ax.max) > 0.5)) {
        fail(a, key, "relative deviations must satisfy |dx/x| <= 0.5");
      }
      if (ax.name == "rate" && ax.min < 0.0) fail(a["min"], key + ".min", "rates must be >= 0");
      axes.push_back(ax);
    }
    e.grids[id] = axes;
  }
}

void parse_experiment(const YAML::Node& n, RunConfig& cfg) {
  require_map(n, "experiment");
  reject_unknown(n, "experiment",
                 {"run", "workers", "seed", "record_points", "max_phase_step",
                  "truncation", "cluster_sites", "grids"});
  ExperimentConfig& e = cfg.experiment;
  if (n["run"]) {
    const YAML::Node& r = n["run"];
    if (!r.IsSequence()) fail(r, "experiment.run", "experiment.run must be a list");
    const auto& ids = experiment_ids();
    for (const auto& item : r) {
      const auto id = scalar<std::string>(item, "experiment.run");
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) {
        fail(item, "experiment.run", "unknown experiment id '" + id + "'");
      }
      e.run.push_back(id);
    }
  }
  if (n["workers"]) {
    e.workers = scalar<int>(n["workers"], "experiment.workers");
    if (e.workers < 1) fail(n["workers"], "experiment.workers", "experiment.workers must be >= 1");
  }
  if (n["seed"]) e.seed = scalar<std::uint64_t>(n["seed"], "experiment.seed");
  if (n["record_points"]) {
    e.record_points = scalar<int>(n["record_points"], "experiment.record_points");
    if (e.record_points < 2) {
      fail(n["record_points"], "experiment.record_points", "record_points must be >= 2");
    }
  }
  if (n["max_phase_step"]) {
    e.max_phase_step = number(n["max_phase_step"], "experiment.max_phase_step");
    if (!(e.max_phase_step > 0.0 && e.max_phase_step <= 0.1)) {
      fail(n["max_phase_step"], "experiment.max_phase_step",
           "max_phase_step must lie in (0, 0.1]");
    }
  }
  if (n["truncation"]) {
    const auto v = scalar<std::string>(n["truncation"], "experiment.truncation");
    if (v == "full") {
      e.truncation = Truncation::full;
    } else if (v == "single_excitation") {
      e.truncation = Truncation::single_excitation;
    } else {
      fail(n["truncation"], "experiment.truncation",
           "experiment.truncation must be full or single_excitation");
    }
  }
  if (n["cluster_sites"]) {
    e.cluster_sites = scalar<int>(n["cluster_sites"], "experiment.cluster_sites");
    if (e.cluster_sites < 2 || e.cluster_sites > ClusterRegister::kMaxSites) {
      fail(n["cluster_sites"], "experiment.cluster_sites",
           "cluster_sites must lie in [2, " +
               std::to_string(ClusterRegister::kMaxSites) + "]");
    }
  }
  if (n["grids"]) parse_grids(n["grids"], e);
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ConfigError("YAML syntax error: " + e.msg, "", e.mark.line + 1);
  }
  RunConfig cfg;
  if (root.IsNull()) return cfg;
  require_map(root, "<root>");
  reject_unknown(root, "", {"system", "schedule", "noise", "experiment"});
  if (root["system"]) parse_system(root["system"], cfg);
  if (root["schedule"]) parse_schedule(root["schedule"], cfg);
  if (root["noise"]) parse_noise(root["noise"], cfg);
  if (root["experiment"]) parse_experiment(root["experiment"], cfg);
  try {
    noisy_params(cfg).validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what(), "system", 0);
  }
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string(), "", 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

SystemParams nominal_params(const RunConfig& config) {
  SystemParams p = config.system;
  p.gamma = p.kappa_c = p.kappa_f = 0.0;
  return p;
}

SystemParams noisy_params(const RunConfig& config) {
  SystemParams p = config.system;
  p.gamma = config.noise.gamma;
  p.kappa_c = config.noise.kappa_c;
  p.kappa_f = config.noise.kappa_f;
  return p;
}

double schedule_duration(const RunConfig& config) {
  return config.schedule.lambda_tf / config.system.lambda_coupling;
}

PulseSchedule build_schedule(const RunConfig& config) {
  const SystemParams p = nominal_params(config);
  const ScheduleConfig& s = config.schedule;
  const double lam = p.lambda_coupling;
  switch (s.scheme) {
    case Scheme::adiabatic:
      return adiabatic_schedule(s.omega0_prime * lam, schedule_duration(config), p)
          .schedule;
    case Scheme::zeno:
      return zeno_schedule(s.omega0_prime * lam, p);
    default: {
      const double eps = s.zeta ? epsilon_for_zeta(*s.zeta) : s.epsilon;
      return stap_schedule(eps, schedule_duration(config), p);
    }
  }
}

std::vector<AxisSpec> axes_for(const RunConfig& config,
                               std::string_view experiment_id) {
  const auto it = config.experiment.grids.find(std::string(experiment_id));
  std::vector<AxisSpec> axes = default_axes(experiment_id);
  if (it == config.experiment.grids.end()) return axes;
  for (const auto& override_axis : it->second) {
    for (auto& a : axes) {
      if (a.name == override_axis.name) a = override_axis;
    }
  }
  return axes;
}

}  // namespace stapgate
