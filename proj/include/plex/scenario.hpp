// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "plex/coefficients.hpp"
#include "plex/estimate.hpp"
#include "plex/flow.hpp"
#include "plex/propagate.hpp"

namespace plex {

/// Invalid or incomplete scenario configuration (exit status 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct MeshConfig {
  double x_left = 0.0;
  double x_right = 1.0;
  std::size_t n_elements = 100;
};

struct HorizonConfig {
  double T = 20.0;
  double burn_in = 2.0;
  double T_spin = 5.0;
};

struct SamplingConfig {
  std::size_t n_samples = 64;
  std::uint64_t seed = 1;
  double block_length = 0.0;  // 0: (T - burn_in) / 20
};

struct OutputConfig {
  std::string trace = "trace.csv";
  std::string report = "report.json";
  std::string validation = "validation.json";
  std::size_t stride = 100;
  bool dump_matrices = false;  // M.txt and A.txt triplets at the start point
};

struct EstimatorConfig {
  bool upper_bound = true;  // request E3 (reported as undefined when non-symmetric)
  UpperBoundMode upper_bound_mode = UpperBoundMode::orbit;
  std::size_t op_norm_vectors = 2;
  double gamma_horizon = 2.0;
  std::size_t c0_grid = 1025;
  double spin_tolerance = 1e-8;
  std::size_t validation_samples = 64;
};

struct CoefficientTexts {
  std::string a = "1";
  std::string a1 = "0";
  std::string b = "0";
  std::string c0 = "0";
  std::optional<std::string> d0_left;
  std::optional<std::string> d0_right;
};

struct ScenarioConfig {
  std::string name;
  std::string description;
  MetricFlowSpec flow;
  CoefficientTexts coefficients;
  BoundaryKind bc = BoundaryKind::dirichlet;
  MeshConfig mesh;
  SchemeConfig scheme;
  bool dt_from_default = false;  // dt omitted; derived from the default rule
  HorizonConfig horizons;
  SamplingConfig sampling;
  OutputConfig outputs;
  EstimatorConfig estimators;
};

/// Parses the YAML text of a scenario. `origin` names the source in messages.
ScenarioConfig parse_scenario(const std::string& text, const std::string& origin);

/// Loads a scenario file; a bare preset name is accepted when no such file exists.
ScenarioConfig load_scenario(const std::string& path_or_preset);

struct PresetInfo {
  std::string name;
  std::string description;
};

std::vector<PresetInfo> list_presets();
/// Raw YAML of a shipped preset; throws ConfigError for unknown names.
std::string preset_text(const std::string& name);
ScenarioConfig load_preset(const std::string& name);

/// Parsed coefficient expressions; parse failures become ConfigError naming the field.
ProblemCoefficients build_coefficients(const ScenarioConfig& cfg);

namespace detail {
const std::vector<std::pair<std::string_view, std::string_view>>& preset_sources();
}  // namespace detail

}  // namespace plex
