// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace plex {
namespace {

class Section {
 public:
  Section(const YAML::Node& node, std::string path, std::set<std::string> allowed)
      : node_(node), path_(std::move(path)) {
    if (!node_) return;
    if (!node_.IsMap()) throw ConfigError(path_ + ": expected a mapping");
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) throw ConfigError("unknown key '" + qualify(key) + "'");
    }
  }

  bool has(const std::string& key) const { return node_ && node_[key]; }
  std::string qualify(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }
  YAML::Node child(const std::string& key) const {
    return node_ ? node_[key] : YAML::Node();
  }

  template <class T>
  void read(const std::string& key, T& out) const {
    if (!has(key)) return;
    try {
      out = node_[key].as<T>();
    } catch (const YAML::Exception&) {
      throw ConfigError("invalid value for '" + qualify(key) + "'");
    }
  }

  void read_optional(const std::string& key, std::optional<std::string>& out) const {
    if (!has(key)) return;
    std::string s;
    read(key, s);
    out = s;
  }

 private:
  YAML::Node node_;
  std::string path_;
};

void require_positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name + " must be positive");
}

}  // namespace

ScenarioConfig parse_scenario(const std::string& text, const std::string& origin) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!root || !root.IsMap()) throw ConfigError(origin + ": expected a mapping at top level");

  ScenarioConfig cfg;
  const Section top(root, "", {"name", "description", "flow", "coefficients", "bc", "mesh",
                               "scheme", "horizons", "sampling", "outputs", "estimators"});
  top.read("name", cfg.name);
  top.read("description", cfg.description);
  if (cfg.name.empty()) cfg.name = std::filesystem::path(origin).stem().string();

  // flow
  if (!top.has("flow")) throw ConfigError("missing section 'flow'");
  const Section flow(top.child("flow"), "flow",
                     {"kind", "frequencies", "switch_amplitudes", "switching_rate",
                      "transition_weights", "mollification_width", "path_window",
                      "singularity_exponent", "singularity_point"});
  std::string kind = "torus_rotation";
  flow.read("kind", kind);
  try {
    cfg.flow.kind = flow_kind_from_string(kind);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("flow.kind: ") + e.what());
  }
  flow.read("frequencies", cfg.flow.frequencies);
  flow.read("switch_amplitudes", cfg.flow.switch_amplitudes);
  flow.read("switching_rate", cfg.flow.switching_rate);
  flow.read("transition_weights", cfg.flow.transition_weights);
  flow.read("mollification_width", cfg.flow.mollification_width);
  flow.read("path_window", cfg.flow.path_window);
  flow.read("singularity_exponent", cfg.flow.singularity_exponent);
  flow.read("singularity_point", cfg.flow.singularity_point);

  // coefficients
  const Section co(top.child("coefficients"), "coefficients",
                   {"a", "a1", "b", "c0", "d0_left", "d0_right"});
  co.read("a", cfg.coefficients.a);
  co.read("a1", cfg.coefficients.a1);
  co.read("b", cfg.coefficients.b);
  co.read("c0", cfg.coefficients.c0);
  co.read_optional("d0_left", cfg.coefficients.d0_left);
  co.read_optional("d0_right", cfg.coefficients.d0_right);

  std::string bc = "dirichlet";
  top.read("bc", bc);
  try {
    cfg.bc = boundary_kind_from_string(bc);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("bc: ") + e.what());
  }
  if (cfg.bc == BoundaryKind::robin) {
    if (!cfg.coefficients.d0_left) throw ConfigError("bc=robin requires coefficients.d0_left");
    if (!cfg.coefficients.d0_right) throw ConfigError("bc=robin requires coefficients.d0_right");
  } else if (cfg.coefficients.d0_left || cfg.coefficients.d0_right) {
    throw ConfigError("coefficients.d0_left/d0_right are only allowed with bc=robin");
  }

  const Section mesh(top.child("mesh"), "mesh", {"x_left", "x_right", "n_elements"});
  mesh.read("x_left", cfg.mesh.x_left);
  mesh.read("x_right", cfg.mesh.x_right);
  mesh.read("n_elements", cfg.mesh.n_elements);
  if (!(cfg.mesh.x_left < cfg.mesh.x_right)) throw ConfigError("mesh needs x_left < x_right");
  if (cfg.mesh.n_elements < 2) throw ConfigError("mesh.n_elements must be at least 2");

  const Section scheme(top.child("scheme"), "scheme",
                       {"method", "theta", "dt", "lumped_mass", "renormalize_every",
                        "coefficient_time_rule"});
  std::optional<std::string> method;
  scheme.read_optional("method", method);
  if (method) {
    try {
      cfg.scheme.method = time_scheme_from_string(*method);
    } catch (const std::exception& e) {
      throw ConfigError(std::string("scheme.method: ") + e.what());
    }
  }
  if (scheme.has("theta")) {
    double theta = 0.0;
    scheme.read("theta", theta);
    TimeScheme from_theta;
    if (theta == 1.0)
      from_theta = TimeScheme::implicit_euler;
    else if (theta == 0.5)
      from_theta = TimeScheme::crank_nicolson;
    else
      throw ConfigError("scheme.theta must be 1.0 or 0.5");
    if (method && cfg.scheme.method != from_theta)
      throw ConfigError("scheme.theta conflicts with scheme.method");
    cfg.scheme.method = from_theta;
  }
  std::string rule = "midpoint";
  scheme.read("coefficient_time_rule", rule);
  if (rule != "midpoint") throw ConfigError("scheme.coefficient_time_rule must be 'midpoint'");
  cfg.dt_from_default = !scheme.has("dt");
  scheme.read("dt", cfg.scheme.dt);
  if (!cfg.dt_from_default) require_positive(cfg.scheme.dt, "scheme.dt");
  scheme.read("lumped_mass", cfg.scheme.lumped_mass);
  scheme.read("renormalize_every", cfg.scheme.renormalize_every);
  if (cfg.scheme.renormalize_every == 0) throw ConfigError("scheme.renormalize_every must be >= 1");

  const Section hz(top.child("horizons"), "horizons", {"T", "burn_in", "T_spin"});
  hz.read("T", cfg.horizons.T);
  hz.read("burn_in", cfg.horizons.burn_in);
  hz.read("T_spin", cfg.horizons.T_spin);
  require_positive(cfg.horizons.T, "horizons.T");
  require_positive(cfg.horizons.T_spin, "horizons.T_spin");
  if (!(cfg.horizons.burn_in >= 0.0) || !(cfg.horizons.burn_in < cfg.horizons.T))
    throw ConfigError("horizons.burn_in must lie in [0, T)");

  const Section sm(top.child("sampling"), "sampling", {"n_samples", "seed", "block_length"});
  sm.read("n_samples", cfg.sampling.n_samples);
  sm.read("seed", cfg.sampling.seed);
  sm.read("block_length", cfg.sampling.block_length);
  if (cfg.sampling.n_samples < 2) throw ConfigError("sampling.n_samples must be at least 2");

  const Section out(top.child("outputs"), "outputs",
                    {"trace", "report", "validation", "stride", "dump_matrices"});
  out.read("trace", cfg.outputs.trace);
  out.read("report", cfg.outputs.report);
  out.read("validation", cfg.outputs.validation);
  out.read("stride", cfg.outputs.stride);
  out.read("dump_matrices", cfg.outputs.dump_matrices);

  const Section est(top.child("estimators"), "estimators",
                    {"upper_bound", "upper_bound_mode", "op_norm_vectors", "gamma_horizon",
                     "c0_grid", "spin_tolerance", "validation_samples"});
  est.read("upper_bound", cfg.estimators.upper_bound);
  std::string mode = "orbit";
  est.read("upper_bound_mode", mode);
  if (mode == "orbit")
    cfg.estimators.upper_bound_mode = UpperBoundMode::orbit;
  else if (mode == "mc")
    cfg.estimators.upper_bound_mode = UpperBoundMode::mc;
  else
    throw ConfigError("estimators.upper_bound_mode must be 'orbit' or 'mc'");
  est.read("op_norm_vectors", cfg.estimators.op_norm_vectors);
  est.read("gamma_horizon", cfg.estimators.gamma_horizon);
  est.read("c0_grid", cfg.estimators.c0_grid);
  est.read("spin_tolerance", cfg.estimators.spin_tolerance);
  est.read("validation_samples", cfg.estimators.validation_samples);
  if (cfg.estimators.op_norm_vectors < 1) throw ConfigError("estimators.op_norm_vectors must be >= 1");
  require_positive(cfg.estimators.gamma_horizon, "estimators.gamma_horizon");
  if (cfg.estimators.c0_grid < 2) throw ConfigError("estimators.c0_grid must be >= 2");
  if (cfg.estimators.validation_samples < 1)
    throw ConfigError("estimators.validation_samples must be >= 1");

  build_coefficients(cfg);  // surface expression errors at load time
  return cfg;
}

ProblemCoefficients build_coefficients(const ScenarioConfig& cfg) {
  auto parse = [](const std::string& field, const std::string& text) {
    try {
      return Expression::parse(text);
    } catch (const ParseError& e) {
      throw ConfigError("coefficients." + field + ": " + e.what());
    }
  };
  ProblemCoefficients p;
  p.a = parse("a", cfg.coefficients.a);
  p.a1 = parse("a1", cfg.coefficients.a1);
  p.b = parse("b", cfg.coefficients.b);
  p.c0 = parse("c0", cfg.coefficients.c0);
  if (cfg.coefficients.d0_left) p.d0_left = parse("d0_left", *cfg.coefficients.d0_left);
  if (cfg.coefficients.d0_right) p.d0_right = parse("d0_right", *cfg.coefficients.d0_right);
  p.bc = cfg.bc;
  return p;
}

std::vector<PresetInfo> list_presets() {
  std::vector<PresetInfo> out;
  for (const auto& [name, text] : detail::preset_sources()) {
    PresetInfo info{std::string(name), ""};
    try {
      const YAML::Node n = YAML::Load(std::string(text));
      if (n["description"]) info.description = n["description"].as<std::string>();
    } catch (const YAML::Exception&) {
    }
    out.push_back(std::move(info));
  }
  return out;
}

std::string preset_text(const std::string& name) {
  for (const auto& [n, text] : detail::preset_sources())
    if (n == name) return std::string(text);
  throw ConfigError("unknown preset '" + name + "'");
}

ScenarioConfig load_preset(const std::string& name) {
  return parse_scenario(preset_text(name), name);
}

ScenarioConfig load_scenario(const std::string& path_or_preset) {
  std::ifstream in(path_or_preset);
  if (!in) {
    for (const auto& [n, text] : detail::preset_sources())
      if (n == path_or_preset) return parse_scenario(std::string(text), std::string(n));
    throw std::runtime_error("cannot open config '" + path_or_preset +
                             "' (not a file and not a preset name)");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path_or_preset);
}

}  // namespace plex
