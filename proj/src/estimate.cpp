// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/estimate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "plex/simd/kernels.hpp"
#include "plex/spectral.hpp"

namespace plex {

BlockEstimate block_estimate(std::span<const double> block_means) {
  BlockEstimate b;
  b.blocks = block_means.size();
  if (block_means.empty()) return b;
  double s = 0.0;
  for (double v : block_means) s += v;
  b.mean = s / static_cast<double>(b.blocks);
  if (b.blocks < 2) return b;
  double ss = 0.0;
  for (double v : block_means) ss += (v - b.mean) * (v - b.mean);
  b.stderr_ = std::sqrt(ss / static_cast<double>(b.blocks - 1) / static_cast<double>(b.blocks));
  return b;
}

BlockLayout block_layout(const Propagator& prop, double T, double burn_in, double block_length) {
  if (!(burn_in >= 0.0) || !(T > burn_in))
    throw std::invalid_argument("estimator needs T > burn_in >= 0");
  BlockLayout l;
  l.total_steps = prop.steps_for(T);
  l.burn_steps = prop.steps_for(burn_in);
  const std::int64_t window = l.total_steps - l.burn_steps;
  if (block_length > 0.0)
    l.block_steps = static_cast<std::int64_t>(std::llround(block_length / prop.dt()));
  else
    l.block_steps = window / 20;
  l.block_steps = std::clamp<std::int64_t>(l.block_steps, 1, window);
  l.n_blocks = static_cast<std::size_t>(window / l.block_steps);
  return l;
}

namespace {

// Accumulates per-step values into fixed-length blocks.
class BlockAccumulator {
 public:
  BlockAccumulator(std::int64_t block_steps, double dt) : block_steps_(block_steps), dt_(dt) {}

  // value is a rate over one step
  void add(double value) {
    sum_ += value;
    if (++count_ == block_steps_) {
      means_.push_back(sum_ / static_cast<double>(block_steps_));
      sum_ = 0.0;
      count_ = 0;
    }
  }
  BlockEstimate estimate() const { return block_estimate(means_); }

 private:
  std::int64_t block_steps_;
  double dt_;
  std::int64_t count_ = 0;
  double sum_ = 0.0;
  std::vector<double> means_;
};

double window_time(const BlockLayout& l, double dt) {
  return static_cast<double>(l.total_steps - l.burn_steps) * dt;
}

}  // namespace

DirectEstimate lyapunov_direct(Propagator& prop, const FlowPoint& omega,
                               std::span<const double> u0, double T, double burn_in,
                               double block_length) {
  const BlockLayout lay = block_layout(prop, T, burn_in, block_length);
  const double dt = prop.dt();
  PropagatorState s = prop.start(omega, u0);
  prop.run(s, lay.burn_steps);
  const double l_burn = prop.total_log_norm(s);

  const std::int64_t window = lay.total_steps - lay.burn_steps;
  const std::int64_t half = window / 2;
  double l_half = l_burn;
  BlockAccumulator blocks(lay.block_steps, dt);
  for (std::int64_t k = 0; k < window; ++k) {
    const StepRecord rec = prop.step(s);
    blocks.add(rec.log_increment / dt);
    if (k + 1 == half) l_half = prop.total_log_norm(s);
  }
  DirectEstimate r;
  r.E1 = (prop.total_log_norm(s) - l_burn) / window_time(lay, dt);
  const BlockEstimate be = blocks.estimate();
  r.stderr_ = be.stderr_;
  r.blocks = be.blocks;
  r.E1_half = half > 0 ? (l_half - l_burn) / (static_cast<double>(half) * dt) : r.E1;
  r.possibly_divergent =
      r.E1 < r.E1_half - std::max(5.0 * r.stderr_, 1e-6 * std::max(1.0, std::fabs(r.E1)));
  r.u_final = std::move(s.u);
  return r;
}

KappaEstimate lyapunov_kappa(Propagator& prop, const FlowPoint& omega, const KappaOptions& opt) {
  if (opt.with_upper_bound && !prop.field().coefficients().symmetric()) throw NonSymmetricError();
  const BlockLayout lay = block_layout(prop, opt.T, opt.burn_in, opt.block_length);
  const double dt = prop.dt();

  KappaEstimate r;
  r.spin = spin_up_floquet(prop, omega, opt.T_spin, opt.spin_tolerance, true);
  PropagatorState s = prop.start(omega, r.spin.w);

  BlockAccumulator kappa_blocks(lay.block_steps, dt);
  BlockAccumulator lambda_blocks(lay.block_steps, dt);
  double sum_dl = 0.0, sum_kappa = 0.0, sum_lambda = 0.0;
  double min_gap = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (std::int64_t k = 0; k < lay.total_steps; ++k) {
    const StepRecord rec = prop.step(s);
    double lambda = nan;
    if (opt.with_upper_bound) {
      EigenOptions eo;
      eo.lower_bound = rec.kappa_mid;
      lambda = principal_eigen(prop.mass(), prop.form(), eo).lambda_princ;
    }
    if (k >= lay.burn_steps) {
      sum_dl += rec.log_increment;
      sum_kappa += rec.kappa_mid;
      kappa_blocks.add(rec.kappa_mid);
      if (opt.with_upper_bound) {
        sum_lambda += lambda;
        lambda_blocks.add(lambda);
        min_gap = std::min(min_gap, lambda - rec.kappa_mid);
      }
    }
    if (opt.trace && opt.trace_stride > 0 && (k + 1) % static_cast<std::int64_t>(opt.trace_stride) == 0)
      opt.trace(TraceRow{static_cast<double>(k + 1) * dt, prop.total_log_norm(s), rec.kappa_mid,
                         lambda});
  }
  const double tw = window_time(lay, dt);
  const auto steps = static_cast<double>(lay.total_steps - lay.burn_steps);
  r.E2 = sum_kappa / steps;
  const BlockEstimate kb = kappa_blocks.estimate();
  r.E2_stderr = kb.stderr_;
  r.blocks = kb.blocks;
  r.identity_residual = std::fabs(sum_dl - sum_kappa * dt);
  r.identity_residual_per_time = r.identity_residual / tw;
  r.floquet_rate = sum_dl / tw;
  if (opt.with_upper_bound) {
    r.E3 = sum_lambda / steps;
    r.E3_stderr = lambda_blocks.estimate().stderr_;
    r.min_rayleigh_gap = min_gap;
  }
  return r;
}

unsigned worker_count(unsigned threads, std::size_t n) {
  unsigned w = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
  if (n < w) w = static_cast<unsigned>(std::max<std::size_t>(n, 1));
  return w;
}

void parallel_for(std::size_t n, unsigned threads,
                  const std::function<void(std::size_t, unsigned)>& fn) {
  const unsigned workers = worker_count(threads, n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto body = [&](unsigned worker) {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        fn(i, worker);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (workers <= 1) {
    body(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body, w);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

MonteCarloEstimate lnrho1_mc(const Propagator& prop, std::size_t n_samples, std::uint64_t seed,
                             double T_spin, unsigned threads, double spin_tolerance) {
  if (n_samples < 2) throw std::invalid_argument("Monte-Carlo estimate needs n_samples >= 2");
  const auto omegas = prop.field().flow().sample_invariant(seed, n_samples);
  const unsigned workers = worker_count(threads, n_samples);
  std::vector<Propagator> props(workers, prop);
  MonteCarloEstimate r;
  r.samples.assign(n_samples, std::numeric_limits<double>::quiet_NaN());
  parallel_for(n_samples, workers, [&](std::size_t i, unsigned w) {
    Propagator& p = props[w];
    try {
      const SpinUpResult spin = spin_up_floquet(p, omegas[i], T_spin, spin_tolerance, true);
      if (!spin.converged) return;
      r.samples[i] = propagate(p, omegas[i], spin.w, 1.0).L;
    } catch (const std::invalid_argument&) {
      throw;
    } catch (const std::exception&) {
      // numerical failure on this sample: dropped and counted
    }
  });
  std::vector<double> used;
  for (double v : r.samples)
    if (std::isfinite(v)) used.push_back(v);
  r.used = used.size();
  r.dropped = n_samples - r.used;
  if (10 * r.dropped > n_samples)
    throw NumericalFailure("ln rho_1 Monte-Carlo: " + std::to_string(r.dropped) + " of " +
                           std::to_string(n_samples) + " samples failed to spin up");
  const BlockEstimate b = block_estimate(used);
  r.mean = b.mean;
  r.stderr_ = b.stderr_;
  return r;
}

UpperBoundEstimate upper_bound(Propagator& prop, UpperBoundMode mode, const FlowPoint& omega,
                               double T, double burn_in, double block_length,
                               std::size_t n_samples, std::uint64_t seed, unsigned threads) {
  if (!prop.field().coefficients().symmetric()) throw NonSymmetricError();
  UpperBoundEstimate r;
  if (mode == UpperBoundMode::orbit) {
    const BlockLayout lay = block_layout(prop, T, burn_in, block_length);
    BlockAccumulator blocks(lay.block_steps, prop.dt());
    double sum = 0.0;
    for (std::int64_t k = lay.burn_steps; k < lay.total_steps; ++k) {
      prop.prepare(omega, k);
      const double lambda = principal_eigen(prop.mass(), prop.form()).lambda_princ;
      sum += lambda;
      blocks.add(lambda);
    }
    r.samples = static_cast<std::size_t>(lay.total_steps - lay.burn_steps);
    r.E3 = sum / static_cast<double>(r.samples);
    r.stderr_ = blocks.estimate().stderr_;
    return r;
  }
  if (n_samples < 2) throw std::invalid_argument("Monte-Carlo upper bound needs n_samples >= 2");
  const auto omegas = prop.field().flow().sample_invariant(seed, n_samples);
  const unsigned workers = worker_count(threads, n_samples);
  std::vector<FormAssembler> assemblers;
  for (unsigned w = 0; w < workers; ++w)
    assemblers.emplace_back(prop.mesh(), prop.field(), prop.scheme().lumped_mass);
  std::vector<double> lambdas(n_samples);
  parallel_for(n_samples, workers, [&](std::size_t i, unsigned w) {
    const Tridiag a = assemblers[w].assemble(omegas[i]);
    lambdas[i] = principal_eigen(prop.mass(), a).lambda_princ;
  });
  const BlockEstimate b = block_estimate(lambdas);
  r.E3 = b.mean;
  r.stderr_ = b.stderr_;
  r.samples = n_samples;
  return r;
}

OperatorNormRate operator_norm_rate(Propagator& prop, const FlowPoint& omega, double T,
                                    std::size_t k, double burn_in,
                                    std::vector<std::vector<double>> starts, std::uint64_t seed) {
  if (k < 1) throw std::invalid_argument("operator norm rate needs k >= 1");
  const std::size_t n = prop.size();
  if (k > n) throw std::invalid_argument("operator norm rate needs k <= number of unknowns");
  const BlockLayout lay = block_layout(prop, T, burn_in, 0.0);
  const Tridiag& m = prop.mass();

  if (starts.empty()) {
    starts.push_back(prop.positive_start());
    std::uint64_t state = seed;
    for (std::size_t j = 1; j < k; ++j) {
      std::vector<double> v(n);
      for (double& x : v) x = 2.0 * uniform01(state) - 1.0;
      starts.push_back(std::move(v));
    }
  }
  if (starts.size() != k) throw std::invalid_argument("operator norm rate: need k start vectors");

  // modified Gram-Schmidt in the M inner product; returns the diagonal of R
  std::vector<double> rdiag(k);
  auto orthonormalize = [&](std::vector<std::vector<double>>& vs) {
    for (std::size_t j = 0; j < k; ++j) {
      for (std::size_t i = 0; i < j; ++i) {
        const double r = m.bilinear(vs[i], vs[j]);
        simd::axpby(-r, vs[i], 1.0, vs[j]);
      }
      rdiag[j] = m_norm(m, vs[j]);
      if (!(rdiag[j] > 0.0)) throw NumericalFailure("operator norm rate: start vectors are dependent");
      simd::scale(1.0 / rdiag[j], vs[j]);
    }
  };
  orthonormalize(starts);

  std::vector<double> acc(k, 0.0);
  for (std::int64_t s = 0; s < lay.total_steps; ++s) {
    prop.prepare(omega, s);
    for (auto& v : starts) prop.apply(v, {});
    orthonormalize(starts);
    if (s >= lay.burn_steps)
      for (std::size_t j = 0; j < k; ++j) acc[j] += std::log(rdiag[j]);
  }
  OperatorNormRate r;
  const double tw = window_time(lay, prop.dt());
  for (double a : acc) r.rates.push_back(a / tw);
  return r;
}

}  // namespace plex
