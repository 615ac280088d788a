// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/propagate.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "plex/simd/kernels.hpp"

namespace plex {

std::string to_string(TimeScheme s) {
  switch (s) {
    case TimeScheme::implicit_euler:
      return "implicit_euler";
    case TimeScheme::crank_nicolson:
      return "crank_nicolson";
    case TimeScheme::radau5:
      return "radau5";
  }
  return "unknown";
}

TimeScheme time_scheme_from_string(const std::string& name) {
  if (name == "implicit_euler") return TimeScheme::implicit_euler;
  if (name == "crank_nicolson") return TimeScheme::crank_nicolson;
  if (name == "radau5") return TimeScheme::radau5;
  throw std::invalid_argument("unknown time scheme '" + name +
                              "' (expected implicit_euler, crank_nicolson or radau5)");
}

double SchemeConfig::theta() const {
  switch (method) {
    case TimeScheme::implicit_euler:
      return 1.0;
    case TimeScheme::crank_nicolson:
      return 0.5;
    default:
      return std::numeric_limits<double>::quiet_NaN();
  }
}

double default_dt(const Mesh1D& mesh, double sup_a, double period) {
  const double h = mesh.h();
  return std::min(h * h / (2.0 * sup_a), 1e-2 * period);
}

namespace {

// R(z) = (1 + 2z/5 + z^2/20) / (1 - 3z/5 + 3z^2/20 - z^3/60)
//      = sum_k c_k / (z - p_k)
// with one real pole p_1 and a conjugate pair p_2, conj(p_2).
struct RadauFractions {
  double p1;
  double c1;
  std::complex<double> p2;
  std::complex<double> c2;
};

RadauFractions radau_fractions() {
  using C = std::complex<double>;
  // poles solve z^3 - 9 z^2 + 36 z - 60 = 0
  double r = 3.6;
  for (int it = 0; it < 50; ++it) {
    const double f = ((r - 9.0) * r + 36.0) * r - 60.0;
    const double df = (3.0 * r - 18.0) * r + 36.0;
    const double step = f / df;
    r -= step;
    if (std::fabs(step) < 1e-16 * r) break;
  }
  const double beta = r - 9.0;
  const double gamma = 60.0 / r;
  const C p2(-0.5 * beta, 0.5 * std::sqrt(4.0 * gamma - beta * beta));
  auto num = [](C z) { return 1.0 + z * (0.4 + z * 0.05); };
  auto dden = [](C z) { return -0.6 + z * (0.3 - z * 0.05); };
  RadauFractions f;
  f.p1 = r;
  f.c1 = (num(C(r)) / dden(C(r))).real();
  f.p2 = p2;
  f.c2 = num(p2) / dden(p2);
  return f;
}

const RadauFractions& fractions() {
  static const RadauFractions f = radau_fractions();
  return f;
}

std::string step_context(double dt, double t) {
  std::ostringstream os;
  os.precision(17);
  os << "singular step matrix at dt=" << dt << ", t=" << t;
  return os.str();
}

}  // namespace

Propagator::Propagator(const Mesh1D& mesh, std::shared_ptr<const CoefficientField> field,
                       SchemeConfig scheme)
    : field_(std::move(field)),
      scheme_(scheme),
      assembler_(mesh, *field_, scheme.lumped_mass),
      mass_(assemble_mass(mesh, field_->coefficients().bc, scheme.lumped_mass)) {
  if (!(scheme_.dt > 0.0)) throw std::invalid_argument("time step dt must be positive");
  if (scheme_.renormalize_every == 0) scheme_.renormalize_every = 1;
  const std::size_t n = mass_.size();
  form_ = Tridiag(n);
  mu_.resize(n);
  tmp_.resize(n);
  work_.resize(n);
  mid_.resize(n);
  zrhs_.resize(n);
  zx_.resize(n);
  zwork_.resize(n);
}

std::int64_t Propagator::steps_for(double T) const {
  if (!(T >= 0.0)) throw std::invalid_argument("time span must be nonnegative");
  const double r = T / scheme_.dt;
  const double k = std::nearbyint(r);
  if (std::fabs(r - k) > 1e-9 * std::max(1.0, r)) {
    std::ostringstream os;
    os.precision(17);
    os << "time " << T << " is not a multiple of dt=" << scheme_.dt;
    throw std::invalid_argument(os.str());
  }
  return static_cast<std::int64_t>(k);
}

std::vector<double> Propagator::positive_start() const { return std::vector<double>(size(), 1.0); }

PropagatorState Propagator::start(const FlowPoint& omega0, std::span<const double> u0) const {
  if (u0.size() != size())
    throw std::invalid_argument("initial vector has " + std::to_string(u0.size()) +
                                " entries, expected " + std::to_string(size()));
  PropagatorState s;
  s.u.assign(u0.begin(), u0.end());
  const double nrm = m_norm(mass_, s.u);
  if (!(nrm > 0.0) || !std::isfinite(nrm))
    throw std::invalid_argument("initial vector must be nonzero and finite");
  simd::scale(1.0 / nrm, s.u);
  s.omega0 = omega0;
  return s;
}

void Propagator::prepare(const FlowPoint& omega0, std::int64_t k) {
  if (form_cached_ && field_->autonomous()) return;
  const double t_mid = (static_cast<double>(k) + 0.5) * scheme_.dt;
  assembler_.assemble(field_->flow().advance(omega0, t_mid), form_);
  form_cached_ = true;
}

void Propagator::half_step_radau(double h, std::span<const double> u, std::span<double> out) {
  const auto& f = fractions();
  mass_.apply(u, mu_);
  solve_combination(f.p1, mass_, h, form_, mu_, tmp_, work_);
  for (std::size_t i = 0; i < mu_.size(); ++i) zrhs_[i] = mu_[i];
  solve_combination(f.p2, mass_, h, form_, zrhs_, zx_, zwork_);
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = -f.c1 * tmp_[i] - 2.0 * (f.c2 * zx_[i]).real();
}

void Propagator::apply(std::span<double> u, std::span<double> mid) {
  const double dt = scheme_.dt;
  try {
    switch (scheme_.method) {
      case TimeScheme::radau5: {
        std::span<double> m = mid.empty() ? std::span<double>(mid_) : mid;
        half_step_radau(0.5 * dt, u, m);
        half_step_radau(0.5 * dt, m, u);
        return;
      }
      case TimeScheme::implicit_euler:
        if (!mid.empty()) std::copy(u.begin(), u.end(), mid.begin());
        mass_.apply(u, mu_);
        solve_combination(1.0, mass_, dt, form_, mu_, u, work_);
        break;
      case TimeScheme::crank_nicolson:
        if (!mid.empty()) std::copy(u.begin(), u.end(), mid.begin());
        mass_.apply(u, mu_);
        form_.apply(u, tmp_);
        simd::axpby(-0.5 * dt, tmp_, 1.0, mu_);
        solve_combination(1.0, mass_, 0.5 * dt, form_, mu_, u, work_);
        break;
    }
  } catch (const SingularPivotError&) {
    throw SingularStepError(step_context(dt, std::numeric_limits<double>::quiet_NaN()));
  }
  // theta schemes: midpoint state as the average of the two ends
  if (!mid.empty()) simd::axpby(0.5, u, 0.5, mid);
}

StepRecord Propagator::step(PropagatorState& state) {
  const double dt = scheme_.dt;
  StepRecord rec;
  rec.t_mid = (static_cast<double>(state.steps) + 0.5) * dt;
  prepare(state.omega0, state.steps);
  const double before = scheme_.renormalize_every == 1 ? 1.0 : m_norm(mass_, state.u);
  try {
    apply(state.u, mid_);
  } catch (const SingularStepError&) {
    throw SingularStepError(step_context(dt, static_cast<double>(state.steps) * dt));
  }
  rec.kappa_mid = rayleigh_kappa(mass_, form_, mid_);
  const double after = m_norm(mass_, state.u);
  if (!(after > 0.0) || !std::isfinite(after))
    throw SingularStepError("solution norm became " + std::to_string(after) + " at t=" +
                            std::to_string(static_cast<double>(state.steps + 1) * dt));
  rec.log_increment = std::log(after) - std::log(before);
  ++state.steps;
  if (state.steps % scheme_.renormalize_every == 0) {
    state.log_norm += std::log(after);
    simd::scale(1.0 / after, state.u);
  }
  return rec;
}

void Propagator::run(PropagatorState& state, std::int64_t n_steps) {
  for (std::int64_t i = 0; i < n_steps; ++i) step(state);
}

double Propagator::total_log_norm(const PropagatorState& state) const {
  return state.log_norm + std::log(m_norm(mass_, state.u));
}

PropagateResult propagate(Propagator& prop, const FlowPoint& omega, std::span<const double> u0,
                          double T) {
  const std::int64_t n = prop.steps_for(T);
  PropagatorState s = prop.start(omega, u0);
  prop.run(s, n);
  PropagateResult r;
  r.L = prop.total_log_norm(s);
  r.u = std::move(s.u);
  simd::scale(1.0 / m_norm(prop.mass(), r.u), r.u);
  return r;
}

namespace {

std::vector<double> pullback(Propagator& prop, const FlowPoint& omega, double span) {
  const FlowPoint anchor = prop.field().flow().advance(omega, -span);
  const auto start = prop.positive_start();
  return propagate(prop, anchor, start, span).u;
}

}  // namespace

SpinUpResult spin_up_floquet(Propagator& prop, const FlowPoint& omega, double T_spin,
                             double tolerance, bool check) {
  if (!(T_spin > 0.0)) throw std::invalid_argument("spin-up time must be positive");
  SpinUpResult r;
  r.w = pullback(prop, omega, T_spin);
  if (check) {
    const auto w2 = pullback(prop, omega, 2.0 * T_spin);
    std::vector<double> diff(w2);
    simd::axpby(1.0, r.w, -1.0, diff);
    r.distance = m_norm(prop.mass(), diff);
    r.converged = r.distance <= tolerance;
    if (!r.converged) {
      std::ostringstream os;
      os << "spin-up not converged: distance " << r.distance << " between T_spin=" << T_spin
         << " and 2*T_spin exceeds " << tolerance;
      r.warning = os.str();
    }
  }
  r.min_entry = simd::active().min_value(r.w.data(), r.w.size());
  return r;
}

double cocycle_residual(Propagator& prop, const FlowPoint& omega, double t1, double t2,
                        std::span<const double> u0) {
  prop.steps_for(t1);
  prop.steps_for(t2);
  const auto whole = propagate(prop, omega, u0, t1 + t2);
  const auto first = propagate(prop, omega, u0, t1);
  const auto second = propagate(prop, prop.field().flow().advance(omega, t1), first.u, t2);
  std::vector<double> diff(whole.u);
  simd::axpby(1.0, second.u, -1.0, diff);
  const double dir = m_norm(prop.mass(), diff);
  const double lg = std::fabs(whole.L - (first.L + second.L));
  return std::max(dir, lg);
}

GammaCheck check_gamma_bound(Propagator& prop, const FlowPoint& omega, std::span<const double> u0,
                             double T, std::size_t c0_grid) {
  for (double v : u0)
    if (v < 0.0) throw std::invalid_argument("growth bound check needs a nonnegative start");
  const std::int64_t n = prop.steps_for(T);
  PropagatorState s = prop.start(omega, u0);
  C0BoundsEvaluator bounds(prop.field(), prop.mesh().domain(), c0_grid);
  const auto& flow = prop.field().flow();
  const double dt = prop.dt();

  GammaCheck g;
  g.gamma_hat = -std::numeric_limits<double>::infinity();
  g.gamma_hat_doubled = g.gamma_hat;
  double integral = 0.0;
  for (std::int64_t k = 0; k < 2 * n; ++k) {
    const StepRecord rec = prop.step(s);
    integral += bounds(flow.advance(omega, rec.t_mid)).plus * dt;
    const double t = static_cast<double>(k + 1) * dt;
    const double ratio = (prop.total_log_norm(s) - integral) / t;
    if (k < n) g.gamma_hat = std::max(g.gamma_hat, ratio);
    g.gamma_hat_doubled = std::max(g.gamma_hat_doubled, ratio);
  }
  const double tol = std::max(0.1 * std::fabs(g.gamma_hat), 1e-6);
  g.pass = std::isfinite(g.gamma_hat) && std::isfinite(g.gamma_hat_doubled) &&
           std::fabs(g.gamma_hat_doubled - g.gamma_hat) <= tol;
  return g;
}

}  // namespace plex
