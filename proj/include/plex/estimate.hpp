// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plex/propagate.hpp"

namespace plex {

/// Mean of per-block averages and its standard error.
struct BlockEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t blocks = 0;
};

BlockEstimate block_estimate(std::span<const double> block_means);

/// Splits [burn_in, T] into whole blocks of (at least) one step.
struct BlockLayout {
  std::int64_t burn_steps = 0;
  std::int64_t total_steps = 0;
  std::int64_t block_steps = 0;
  std::size_t n_blocks = 0;
};

/// block_length <= 0 selects (T - burn_in) / 20.
BlockLayout block_layout(const Propagator& prop, double T, double burn_in, double block_length);

class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonSymmetricError : public std::invalid_argument {
 public:
  NonSymmetricError() : std::invalid_argument("upper bound undefined: non-symmetric") {}
};

struct DirectEstimate {
  double E1 = 0.0;
  double stderr_ = 0.0;
  std::size_t blocks = 0;
  double E1_half = 0.0;             // same estimator on the first half of [burn_in, T]
  bool possibly_divergent = false;  // keeps decreasing between the half and full horizon
  std::vector<double> u_final;
};

/// E1 = (L(T) - L(burn_in)) / (T - burn_in) from u0 at omega.
DirectEstimate lyapunov_direct(Propagator& prop, const FlowPoint& omega,
                               std::span<const double> u0, double T, double burn_in,
                               double block_length = 0.0);

struct TraceRow {
  double t = 0.0;
  double log_norm = 0.0;
  double kappa = 0.0;
  double lambda_princ = 0.0;  // NaN when not computed
};

using TraceSink = std::function<void(const TraceRow&)>;

struct KappaOptions {
  double T = 10.0;
  double burn_in = 0.0;
  double T_spin = 5.0;
  double block_length = 0.0;
  double spin_tolerance = 1e-8;
  /// Also average lambda_princ at each step midpoint (symmetric problems).
  bool with_upper_bound = false;
  std::size_t trace_stride = 0;  // 0 disables the trace
  TraceSink trace;
};

struct KappaEstimate {
  double E2 = 0.0;
  double E2_stderr = 0.0;
  std::size_t blocks = 0;
  /// |(L(T) - L(burn_in)) - sum kappa_mid dt| along the Floquet trajectory.
  double identity_residual = 0.0;
  double identity_residual_per_time = 0.0;
  /// Growth rate of the Floquet trajectory itself over the same window.
  double floquet_rate = 0.0;
  std::optional<double> E3;
  double E3_stderr = 0.0;
  /// min over steps of lambda_princ - kappa_mid (>= 0 up to round-off).
  double min_rayleigh_gap = 0.0;
  SpinUpResult spin;
};

/// Spins up w(omega), then averages kappa along theta_t omega on [burn_in, T].
KappaEstimate lyapunov_kappa(Propagator& prop, const FlowPoint& omega, const KappaOptions& opt);

struct MonteCarloEstimate {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t used = 0;
  std::size_t dropped = 0;
  std::vector<double> samples;  // NaN for dropped samples, indexed by sample
};

/// Mean of L(1) = ln ||U_omega(1) w(omega)|| over omegas drawn from the
/// invariant measure. Each thread works on a copy of prop.
MonteCarloEstimate lnrho1_mc(const Propagator& prop, std::size_t n_samples, std::uint64_t seed,
                             double T_spin, unsigned threads, double spin_tolerance = 1e-8);

enum class UpperBoundMode { orbit, mc };

struct UpperBoundEstimate {
  double E3 = 0.0;
  double stderr_ = 0.0;
  std::size_t samples = 0;
};

/// Average of lambda_princ(theta_t omega) along the orbit on [burn_in, T]
/// (step midpoints) or over n_samples invariant samples.
UpperBoundEstimate upper_bound(Propagator& prop, UpperBoundMode mode, const FlowPoint& omega,
                               double T, double burn_in, double block_length,
                               std::size_t n_samples, std::uint64_t seed, unsigned threads);

struct OperatorNormRate {
  std::vector<double> rates;  // descending accumulated log stretching rates
};

/// Propagates k M-orthonormal vectors with re-orthonormalization every step.
/// The first start vector is the positive constant, the others pseudo-random.
/// Rates are measured on [burn_in, T].
OperatorNormRate operator_norm_rate(Propagator& prop, const FlowPoint& omega, double T,
                                    std::size_t k, double burn_in = 0.0,
                                    std::vector<std::vector<double>> starts = {},
                                    std::uint64_t seed = 7);

/// Worker count actually used for n items (0 requests hardware concurrency).
unsigned worker_count(unsigned threads, std::size_t n);

/// Runs fn(i, worker) for i in [0, n) on worker_count(threads, n) threads.
/// Items are handed out dynamically, so fn must write results by index. The
/// first exception (by item index) is rethrown on the caller.
void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, unsigned)>& fn);

}  // namespace plex
