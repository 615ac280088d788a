// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <ostream>
#include <string>

#include "plex/coefficients.hpp"
#include "plex/fem.hpp"
#include "plex/flow.hpp"
#include "plex/propagate.hpp"
#include "plex/report.hpp"
#include "plex/scenario.hpp"

namespace plex {

/// Exit statuses of the batch front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,       // unreadable input, bad flags, I/O failures
  kExitValidation = 2,  // invalid config or failed assumption checks
  kExitNumerical = 3,   // propagation, eigen or Monte-Carlo failure
};

/// A configuration turned into ready-to-use objects.
struct Scenario {
  ScenarioConfig config;
  std::shared_ptr<const MetricFlow> flow;
  std::shared_ptr<const CoefficientField> field;
  Mesh1D mesh;
  SchemeConfig scheme;  // dt resolved
  FlowPoint omega;      // starting point drawn from the seed

  Propagator make_propagator() const { return Propagator(mesh, field, scheme); }
  /// Same scenario with a different scheme (dt must divide all horizons).
  Propagator make_propagator(const SchemeConfig& s) const { return Propagator(mesh, field, s); }
};

/// Throws ConfigError for inconsistent flow or coefficient settings.
Scenario build_scenario(const ScenarioConfig& cfg);

ValidationReport validate_scenario(const Scenario& sc);

/// Runs every estimator configured for the scenario.
EstimatorReport estimate_scenario(const Scenario& sc, unsigned threads,
                                  const TraceSink& trace = {});

struct RunOptions {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
};

/// `run`: validation.json, trace.csv and report.json into out_dir.
int run_scenario(const std::string& config, const RunOptions& opts, std::ostream& out,
                 std::ostream& err);

/// `validate`: assumption checks only; writes validation.json.
int validate_config(const std::string& config, const RunOptions& opts, std::ostream& out,
                    std::ostream& err);

}  // namespace plex
