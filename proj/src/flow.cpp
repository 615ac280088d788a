// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace plex {

std::string to_string(FlowKind kind) {
  switch (kind) {
    case FlowKind::torus_rotation:
      return "torus_rotation";
    case FlowKind::smoothed_switching:
      return "smoothed_switching";
    case FlowKind::unbounded_amplitude_rotation:
      return "unbounded_amplitude_rotation";
  }
  return "unknown";
}

FlowKind flow_kind_from_string(const std::string& name) {
  if (name == "torus_rotation") return FlowKind::torus_rotation;
  if (name == "smoothed_switching") return FlowKind::smoothed_switching;
  if (name == "unbounded_amplitude_rotation") return FlowKind::unbounded_amplitude_rotation;
  throw FlowSpecError("unknown flow kind '" + name + "'");
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

double uniform01(std::uint64_t& state) {
  return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53;
}

double smooth_step(double u) {
  if (u <= -1.0) return 0.0;
  if (u >= 1.0) return 1.0;
  // 35/32 * integral of (1 - v^2)^3 from -1 to u
  const double u2 = u * u;
  return 0.5 + (35.0 / 32.0) * u * (1.0 - u2 + 0.6 * u2 * u2 - u2 * u2 * u2 / 7.0);
}

namespace {

double wrap01(double v) {
  double r = v - std::floor(v);
  // floor can round r up to exactly 1 for tiny negative v
  if (r >= 1.0) r = 0.0;
  return r;
}

double torus_gap(double a, double b) {
  const double d = std::fabs(a - b);
  return std::min(d, 1.0 - d);
}

std::size_t sample_index(const std::vector<double>& weights, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i];
    if (u < acc) return i;
  }
  // round-off at the top end
  for (std::size_t i = weights.size(); i-- > 0;)
    if (weights[i] > 0.0) return i;
  return 0;
}

// Solves pi^T P = pi^T, sum(pi) = 1 by Gaussian elimination with pivoting.
std::vector<double> stationary_of(const std::vector<std::vector<double>>& p) {
  const std::size_t k = p.size();
  std::vector<std::vector<double>> m(k, std::vector<double>(k + 1, 0.0));
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) m[i][j] = p[j][i] - (i == j ? 1.0 : 0.0);
  }
  // replace the last equation with the normalization
  for (std::size_t j = 0; j < k; ++j) m[k - 1][j] = 1.0;
  m[k - 1][k] = 1.0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r)
      if (std::fabs(m[r][col]) > std::fabs(m[piv][col])) piv = r;
    if (std::fabs(m[piv][col]) < 1e-14)
      throw FlowSpecError("switching chain has no unique stationary distribution");
    std::swap(m[piv], m[col]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      for (std::size_t c = col; c <= k; ++c) m[r][c] -= f * m[col][c];
    }
  }
  std::vector<double> pi(k);
  for (std::size_t i = 0; i < k; ++i) pi[i] = std::max(0.0, m[i][k] / m[i][i]);
  const double s = std::accumulate(pi.begin(), pi.end(), 0.0);
  for (double& v : pi) v /= s;
  return pi;
}

}  // namespace

SwitchingPath::SwitchingPath(std::vector<double> jump_times, std::vector<std::size_t> states,
                             double window)
    : jump_times_(std::move(jump_times)), states_(std::move(states)), window_(window) {}

std::size_t SwitchingPath::state_at(double t) const {
  const auto it = std::upper_bound(jump_times_.begin(), jump_times_.end(), t);
  return states_[static_cast<std::size_t>(it - jump_times_.begin())];
}

MetricFlow::MetricFlow(MetricFlowSpec spec) : spec_(std::move(spec)) {
  switch (spec_.kind) {
    case FlowKind::torus_rotation:
    case FlowKind::unbounded_amplitude_rotation: {
      if (spec_.frequencies.empty())
        throw FlowSpecError("rotation driver needs a nonempty frequency vector");
      for (double f : spec_.frequencies)
        if (!std::isfinite(f)) throw FlowSpecError("frequency must be finite");
      const std::size_t d = spec_.frequencies.size();
      for (std::size_t i = 0; i < d; ++i) {
        if (spec_.frequencies[i] == 0.0) {
          warnings_.push_back("frequency " + std::to_string(i + 1) + " is zero; flow is not ergodic");
          continue;
        }
        for (std::size_t j = i + 1; j < d; ++j) {
          if (spec_.frequencies[j] == 0.0) continue;
          const double r = spec_.frequencies[i] / spec_.frequencies[j];
          for (int q = 1; q <= 20; ++q) {
            const double pq = r * q;
            if (std::fabs(pq - std::round(pq)) < 1e-9 * q) {
              std::ostringstream os;
              os << "frequencies " << i + 1 << " and " << j + 1 << " have ratio close to "
                 << std::llround(pq) << "/" << q << "; ergodicity requires rational independence";
              warnings_.push_back(os.str());
              break;
            }
          }
        }
      }
      if (spec_.kind == FlowKind::unbounded_amplitude_rotation) {
        if (!(spec_.singularity_exponent > 0.0 && spec_.singularity_exponent < 1.0))
          throw FlowSpecError("singularity_exponent must lie in (0,1)");
        if (spec_.singularity_point.size() != d)
          throw FlowSpecError("singularity_point must have the torus dimension");
        for (double& c : spec_.singularity_point) c = wrap01(c);
      }
      break;
    }
    case FlowKind::smoothed_switching: {
      const std::size_t k = spec_.switch_amplitudes.size();
      if (k == 0) throw FlowSpecError("switching driver needs at least one amplitude");
      if (!(spec_.switching_rate > 0.0)) throw FlowSpecError("switching_rate must be > 0");
      if (!(spec_.mollification_width > 0.0))
        throw FlowSpecError("mollification_width must be > 0");
      if (!(spec_.path_window > 0.0)) throw FlowSpecError("path_window must be > 0");
      if (spec_.transition_weights.empty()) {
        // uniform jumps to the other states
        spec_.transition_weights.assign(k, std::vector<double>(k, 1.0));
        if (k > 1)
          for (std::size_t i = 0; i < k; ++i) spec_.transition_weights[i][i] = 0.0;
      }
      if (spec_.transition_weights.size() != k)
        throw FlowSpecError("transition_weights must be a square matrix over the states");
      forward_.assign(k, std::vector<double>(k, 0.0));
      for (std::size_t i = 0; i < k; ++i) {
        const auto& row = spec_.transition_weights[i];
        if (row.size() != k)
          throw FlowSpecError("transition_weights must be a square matrix over the states");
        double s = 0.0;
        for (double w : row) {
          if (!(w >= 0.0)) throw FlowSpecError("transition weights must be nonnegative");
          s += w;
        }
        if (!(s > 0.0)) throw FlowSpecError("every state needs a positive transition weight");
        for (std::size_t j = 0; j < k; ++j) forward_[i][j] = row[j] / s;
      }
      stationary_ = stationary_of(forward_);
      backward_.assign(k, std::vector<double>(k, 0.0));
      for (std::size_t i = 0; i < k; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < k; ++j) {
          backward_[i][j] = stationary_[i] > 0.0 ? stationary_[j] * forward_[j][i] / stationary_[i] : 0.0;
          s += backward_[i][j];
        }
        if (s > 0.0)
          for (double& v : backward_[i]) v /= s;
        else
          backward_[i][i] = 1.0;
      }
      break;
    }
  }
}

std::size_t MetricFlow::dimension() const {
  return spec_.kind == FlowKind::smoothed_switching ? 0 : spec_.frequencies.size();
}

double MetricFlow::characteristic_period() const {
  if (spec_.kind == FlowKind::smoothed_switching) return 1.0 / spec_.switching_rate;
  double fmax = 0.0;
  for (double f : spec_.frequencies) fmax = std::max(fmax, std::fabs(f));
  return fmax > 0.0 ? 1.0 / fmax : 1.0;
}

std::shared_ptr<const SwitchingPath> MetricFlow::realize(std::uint64_t seed) const {
  std::uint64_t state = seed ^ 0x5DEECE66DULL;
  const double reach = spec_.path_window + spec_.mollification_width;
  const double rate = spec_.switching_rate;
  const std::size_t x0 = sample_index(stationary_, uniform01(state));

  std::vector<double> fwd_times;
  std::vector<std::size_t> fwd_states;
  double t = 0.0;
  std::size_t x = x0;
  while (true) {
    t += -std::log1p(-uniform01(state)) / rate;
    if (t > reach) break;
    x = sample_index(forward_[x], uniform01(state));
    fwd_times.push_back(t);
    fwd_states.push_back(x);
  }
  std::vector<double> bwd_times;
  std::vector<std::size_t> bwd_states;
  t = 0.0;
  x = x0;
  while (true) {
    t -= -std::log1p(-uniform01(state)) / rate;
    if (t < -reach) break;
    x = sample_index(backward_[x], uniform01(state));
    bwd_times.push_back(t);  // before this time the chain was in x
    bwd_states.push_back(x);
  }

  std::vector<double> times;
  std::vector<std::size_t> states;
  times.reserve(bwd_times.size() + fwd_times.size());
  states.reserve(bwd_times.size() + fwd_times.size() + 1);
  for (std::size_t i = bwd_times.size(); i-- > 0;) {
    states.push_back(bwd_states[i]);
    times.push_back(bwd_times[i]);
  }
  states.push_back(x0);
  for (std::size_t i = 0; i < fwd_times.size(); ++i) {
    times.push_back(fwd_times[i]);
    states.push_back(fwd_states[i]);
  }
  return std::make_shared<const SwitchingPath>(std::move(times), std::move(states),
                                               spec_.path_window);
}

FlowPoint MetricFlow::make_point(std::vector<double> torus, std::uint64_t realization_seed) const {
  FlowPoint p;
  if (spec_.kind == FlowKind::smoothed_switching) {
    p.realization_seed = realization_seed;
    p.path = realize(realization_seed);
    p.phase = 0.0;
    return p;
  }
  if (torus.size() != dimension())
    throw FlowSpecError("flow point needs " + std::to_string(dimension()) + " torus coordinates");
  for (double& c : torus) c = wrap01(c);
  p.torus = std::move(torus);
  return p;
}

FlowPoint MetricFlow::advance(const FlowPoint& omega, double t) const {
  FlowPoint r = omega;
  if (spec_.kind == FlowKind::smoothed_switching) {
    const double phase = omega.phase + t;
    const double w = omega.path ? omega.path->window() : spec_.path_window;
    if (!(std::fabs(phase) <= w)) {
      std::ostringstream os;
      os << "path window exceeded: time " << phase << " outside [" << -w << ", " << w << "]";
      throw PathWindowError(os.str());
    }
    r.phase = phase;
    return r;
  }
  if (omega.origin.empty()) {
    r.origin = omega.torus;
    r.phase = t;
  } else {
    r.phase = omega.phase + t;
  }
  for (std::size_t i = 0; i < r.torus.size(); ++i) {
    const double shift = std::fmod(spec_.frequencies[i] * r.phase, 1.0);
    r.torus[i] = wrap01(r.origin[i] + shift);
  }
  return r;
}

double MetricFlow::distance(const FlowPoint& x, const FlowPoint& y) const {
  if (spec_.kind == FlowKind::smoothed_switching) return std::fabs(x.phase - y.phase);
  double d = 0.0;
  for (std::size_t i = 0; i < x.torus.size(); ++i) d = std::max(d, torus_gap(x.torus[i], y.torus[i]));
  return d;
}

double MetricFlow::group_law_residual(const FlowPoint& omega, double t1, double t2) const {
  return distance(advance(advance(omega, t1), t2), advance(omega, t1 + t2));
}

std::vector<FlowPoint> MetricFlow::sample_invariant(std::uint64_t seed, std::size_t n) const {
  std::vector<FlowPoint> pts;
  pts.reserve(n);
  std::uint64_t state = seed;
  for (std::size_t k = 0; k < n; ++k) {
    if (spec_.kind == FlowKind::smoothed_switching) {
      pts.push_back(make_point({}, splitmix64(state)));
    } else {
      std::vector<double> c(dimension());
      for (double& v : c) v = uniform01(state);
      pts.push_back(make_point(std::move(c)));
    }
  }
  return pts;
}

std::optional<std::size_t> MetricFlow::switch_state(const FlowPoint& omega) const {
  if (spec_.kind != FlowKind::smoothed_switching || !omega.path) return std::nullopt;
  return omega.path->state_at(omega.phase);
}

double MetricFlow::switch_amplitude(const FlowPoint& omega) const {
  if (spec_.kind != FlowKind::smoothed_switching || !omega.path) return 0.0;
  const auto& times = omega.path->jump_times();
  const auto& states = omega.path->states();
  const auto& amp = spec_.switch_amplitudes;
  const double half = 0.5 * spec_.mollification_width;
  const double tau = omega.phase;
  auto it = std::upper_bound(times.begin(), times.end(), tau - half);
  std::size_t k = static_cast<std::size_t>(it - times.begin());
  double s = amp[states[k]];
  for (; k < times.size() && times[k] < tau + half; ++k) {
    const double jump = amp[states[k + 1]] - amp[states[k]];
    s += jump * smooth_step((tau - times[k]) / half);
  }
  return s;
}

double MetricFlow::c0_amplitude(const FlowPoint& omega) const {
  if (spec_.kind != FlowKind::unbounded_amplitude_rotation) return 1.0;
  double r2 = 0.0;
  for (std::size_t i = 0; i < omega.torus.size(); ++i) {
    const double g = torus_gap(omega.torus[i], spec_.singularity_point[i]);
    r2 += g * g;
  }
  // the orbit avoids the singular point almost surely; guard the exact hit
  if (r2 == 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(r2, -0.5 * spec_.singularity_exponent);
}

}  // namespace plex
