// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "plex/coefficients.hpp"
#include "plex/fem.hpp"
#include "plex/flow.hpp"
#include "plex/tridiag.hpp"

namespace plex {

/// Time discretization of M u' = -A(theta_t omega) u with A frozen at the
/// step midpoint.
///   implicit_euler  (M + dt A) u+ = M u
///   crank_nicolson  (M + dt/2 A) u+ = (M - dt/2 A) u
///   radau5          two half steps of the 3-stage Radau IIA stability
///                   function (order 5, L-stable), applied in partial fractions
enum class TimeScheme { implicit_euler, crank_nicolson, radau5 };

std::string to_string(TimeScheme s);
TimeScheme time_scheme_from_string(const std::string& name);

struct SchemeConfig {
  TimeScheme method = TimeScheme::radau5;
  double dt = 1e-3;
  bool lumped_mass = false;
  /// Renormalize the state every this many steps (1 = every step).
  unsigned renormalize_every = 1;

  /// 1.0 or 0.5 for the theta schemes, NaN for radau5.
  double theta() const;
};

/// min(h^2 / (2 sup a), 1e-2 * period)
double default_dt(const Mesh1D& mesh, double sup_a, double period);

struct PropagatorState {
  std::vector<double> u;    // M-normalized unless renormalize_every > 1
  double log_norm = 0.0;    // accumulated log of the renormalization factors
  std::int64_t steps = 0;
  FlowPoint omega0;         // anchor; the state lives at theta_{steps*dt} omega0
};

/// What one step observed: the log-norm increment and the Rayleigh quotient
/// of the form at the step midpoint.
struct StepRecord {
  double t_mid = 0.0;
  double log_increment = 0.0;
  double kappa_mid = 0.0;
};

class SingularStepError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Propagator {
 public:
  Propagator(const Mesh1D& mesh, std::shared_ptr<const CoefficientField> field,
             SchemeConfig scheme);

  const Mesh1D& mesh() const { return assembler_.mesh(); }
  const CoefficientField& field() const { return *field_; }
  std::shared_ptr<const CoefficientField> field_ptr() const { return field_; }
  const SchemeConfig& scheme() const { return scheme_; }
  double dt() const { return scheme_.dt; }
  const Tridiag& mass() const { return mass_; }
  std::size_t size() const { return mass_.size(); }

  /// Number of steps covering T; throws std::invalid_argument unless T is an
  /// integer multiple of dt (relative tolerance 1e-9).
  std::int64_t steps_for(double T) const;

  /// Constant positive vector on the free nodes.
  std::vector<double> positive_start() const;

  PropagatorState start(const FlowPoint& omega0, std::span<const double> u0) const;

  /// Advances by one step, renormalizing per the scheme config.
  StepRecord step(PropagatorState& state);
  void run(PropagatorState& state, std::int64_t n_steps);

  /// ln ||u(t)|| relative to the normalized start.
  double total_log_norm(const PropagatorState& state) const;

  /// Assembles the form for step k of a trajectory anchored at omega0.
  void prepare(const FlowPoint& omega0, std::int64_t k);
  /// Applies the prepared one-step map in place. When mid is nonempty it
  /// receives the state at the step midpoint (same scale as u).
  void apply(std::span<double> u, std::span<double> mid);
  /// Form of the last prepared step.
  const Tridiag& form() const { return form_; }

 private:
  void half_step_radau(double h, std::span<const double> u, std::span<double> out);

  std::shared_ptr<const CoefficientField> field_;
  SchemeConfig scheme_;
  FormAssembler assembler_;
  Tridiag mass_;
  Tridiag form_;
  bool form_cached_ = false;

  std::vector<double> mu_, tmp_, work_, mid_;
  std::vector<std::complex<double>> zrhs_, zx_, zwork_;
};

struct PropagateResult {
  std::vector<double> u;  // M-normalized direction of U_omega(T) u0
  double L = 0.0;         // ln(||U_omega(T) u0|| / ||u0||)
};

PropagateResult propagate(Propagator& prop, const FlowPoint& omega, std::span<const double> u0,
                          double T);

struct SpinUpResult {
  std::vector<double> w;
  double distance = 0.0;     // M-norm distance between T_spin and 2 T_spin pullbacks
  bool converged = true;
  double min_entry = 0.0;
  std::string warning;
};

/// Pullback approximation of the Floquet vector: propagate the constant
/// vector from theta_{-T_spin} omega to omega. With check set, repeats with
/// 2 T_spin and reports the distance.
SpinUpResult spin_up_floquet(Propagator& prop, const FlowPoint& omega, double T_spin,
                             double tolerance = 1e-8, bool check = true);

/// Distance between propagate(omega, u0, t1 + t2) and the two-leg composition,
/// max of the direction mismatch and the log-norm mismatch.
double cocycle_residual(Propagator& prop, const FlowPoint& omega, double t1, double t2,
                        std::span<const double> u0);

struct GammaCheck {
  double gamma_hat = 0.0;         // over t <= T
  double gamma_hat_doubled = 0.0; // over t <= 2T
  bool pass = false;
};

/// Estimates the growth constant of ||U(t)u0|| <= exp(gamma t + int c0+).
GammaCheck check_gamma_bound(Propagator& prop, const FlowPoint& omega, std::span<const double> u0,
                             double T, std::size_t c0_grid = 1025);

}  // namespace plex
