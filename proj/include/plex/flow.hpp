// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace plex {

/// Ergodic driver (Omega, P, theta_t) behind the random coefficients.
enum class FlowKind { torus_rotation, smoothed_switching, unbounded_amplitude_rotation };

std::string to_string(FlowKind kind);
FlowKind flow_kind_from_string(const std::string& name);

struct MetricFlowSpec {
  FlowKind kind = FlowKind::torus_rotation;

  // torus_rotation and unbounded_amplitude_rotation
  std::vector<double> frequencies;

  // smoothed_switching: value of the variable `s` in each state, jump rate,
  // embedded-chain weights (row i = weights of the next state from i),
  // C^2 mollifier width and the half-width T_max of the pre-generated path.
  std::vector<double> switch_amplitudes;
  double switching_rate = 1.0;
  std::vector<std::vector<double>> transition_weights;
  double mollification_width = 0.1;
  double path_window = 100.0;

  // unbounded_amplitude_rotation: c0 is multiplied by dist(w, point)^(-exponent).
  double singularity_exponent = 0.5;
  std::vector<double> singularity_point;
};

class FlowSpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PathWindowError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Pre-generated realization of the switching process on [-T_max, T_max].
/// Immutable once built and shared between flow points.
class SwitchingPath {
 public:
  SwitchingPath(std::vector<double> jump_times, std::vector<std::size_t> states, double window);

  double window() const { return window_; }
  /// State in effect at time t.
  std::size_t state_at(double t) const;
  const std::vector<double>& jump_times() const { return jump_times_; }
  const std::vector<std::size_t>& states() const { return states_; }

 private:
  std::vector<double> jump_times_;    // ascending
  std::vector<std::size_t> states_;   // states_[k] holds on (jump_times_[k-1], jump_times_[k])
  double window_;
};

/// A point omega of the base space.
/// Rotation points remember the orbit origin and the elapsed time, and their
/// coordinates are recomputed from both. Composing two advances therefore lands
/// on exactly the same point as one advance by the summed time.
struct FlowPoint {
  std::vector<double> torus;              // coordinates in [0,1)^d
  std::vector<double> origin;             // rotation only: coordinates at phase 0 (empty: torus)
  std::uint64_t realization_seed = 0;     // switching only
  std::shared_ptr<const SwitchingPath> path;
  double phase = 0.0;                     // time elapsed since origin / along the realization
};

class MetricFlow {
 public:
  explicit MetricFlow(MetricFlowSpec spec);

  const MetricFlowSpec& spec() const { return spec_; }
  FlowKind kind() const { return spec_.kind; }
  /// Torus dimension d (0 for the switching driver).
  std::size_t dimension() const;

  /// theta_t omega. Exact group action for rotations (up to the rounding of
  /// the time sum); throws PathWindowError outside the switching window.
  FlowPoint advance(const FlowPoint& omega, double t) const;

  /// Draws n points from the invariant measure; deterministic in the seed.
  std::vector<FlowPoint> sample_invariant(std::uint64_t seed, std::size_t n) const;

  /// Torus-metric distance between theta_t2(theta_t1 w) and theta_{t1+t2} w.
  double group_law_residual(const FlowPoint& omega, double t1, double t2) const;

  /// Builds a point; for the switching driver the realization is generated
  /// from the seed with its time-0 state drawn from the stationary law.
  FlowPoint make_point(std::vector<double> torus, std::uint64_t realization_seed = 0) const;

  /// Value of the expression variable `s` (0 unless switching).
  double switch_amplitude(const FlowPoint& omega) const;
  /// Current switching state, if any.
  std::optional<std::size_t> switch_state(const FlowPoint& omega) const;
  /// Multiplier applied to c0 (1 unless unbounded_amplitude_rotation).
  double c0_amplitude(const FlowPoint& omega) const;

  /// Stationary distribution of the embedded switching chain.
  const std::vector<double>& stationary() const { return stationary_; }
  /// Typical time scale of the driver: 1/max|frequency| or 1/rate.
  double characteristic_period() const;
  /// Non-fatal diagnostics (e.g. apparently rational frequency ratios).
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Distance between points on the torus (max over coordinates), or the
  /// phase difference for the switching driver.
  double distance(const FlowPoint& x, const FlowPoint& y) const;

 private:
  std::shared_ptr<const SwitchingPath> realize(std::uint64_t seed) const;

  MetricFlowSpec spec_;
  std::vector<std::vector<double>> forward_;   // row-normalized transition matrix
  std::vector<std::vector<double>> backward_;  // time-reversed chain
  std::vector<double> stationary_;
  std::vector<std::string> warnings_;
};

/// C^2 smoothed unit step: 0 for u <= -1, 1 for u >= 1.
double smooth_step(double u);

/// Portable 64-bit mixer used for all seeding.
std::uint64_t splitmix64(std::uint64_t& state);
/// Uniform double in [0,1) from the generator state.
double uniform01(std::uint64_t& state);

}  // namespace plex
