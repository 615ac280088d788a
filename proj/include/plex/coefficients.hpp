// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "plex/expression.hpp"
#include "plex/flow.hpp"

namespace plex {

enum class BoundaryKind { dirichlet, neumann, robin };

std::string to_string(BoundaryKind kind);
BoundaryKind boundary_kind_from_string(const std::string& name);

/// Coefficient fields of
///   u_t = (a u_x + a1 u)_x + b u_x + c0 u
/// whose form is B(u,v) = int (a u' + a1 u) v' - (b u' + c0 u) v, plus
/// d0 u v at each endpoint in the Robin case.
struct ProblemCoefficients {
  Expression a = Expression::constant(1.0);
  Expression a1;
  Expression b;
  Expression c0;
  Expression d0_left;
  Expression d0_right;
  BoundaryKind bc = BoundaryKind::dirichlet;

  /// a1 and b vanish identically, so the form is symmetric.
  bool symmetric() const { return a1.is_identically_zero() && b.is_identically_zero(); }
};

struct Interval {
  double left = 0.0;
  double right = 1.0;
};

/// Coefficients bound to a driver flow: evaluates a(omega, x) etc., with the
/// driver's amplitude factor applied to c0.
class CoefficientField {
 public:
  CoefficientField(ProblemCoefficients coeffs, std::shared_ptr<const MetricFlow> flow);

  const ProblemCoefficients& coefficients() const { return coeffs_; }
  const MetricFlow& flow() const { return *flow_; }
  std::shared_ptr<const MetricFlow> flow_ptr() const { return flow_; }

  /// No coefficient depends on the base point, so A(omega) is constant.
  bool autonomous() const { return autonomous_; }

  double eval(const Expression& e, const FlowPoint& omega, double x) const;
  double c0(const FlowPoint& omega, double x) const;
  double d0_left(const FlowPoint& omega, double x_left) const;
  double d0_right(const FlowPoint& omega, double x_right) const;

  /// Batched evaluation at fixed omega.
  void eval_batch(const Expression& e, const FlowPoint& omega, std::span<const double> xs,
                  std::span<double> out, BatchEvaluator& scratch) const;
  void c0_batch(const FlowPoint& omega, std::span<const double> xs, std::span<double> out,
                BatchEvaluator& scratch) const;

 private:
  ProblemCoefficients coeffs_;
  std::shared_ptr<const MetricFlow> flow_;
  bool autonomous_ = false;
};

/// (c0^-, c0^+) at omega from a uniform grid over the interval.
struct C0Bounds {
  double minus = 0.0;  // <= 0
  double plus = 0.0;   // >= 0
};

C0Bounds c0_bounds(const CoefficientField& field, const FlowPoint& omega, Interval domain,
                   std::size_t grid = 1025);

/// Reusable version that keeps its grid and scratch buffers.
class C0BoundsEvaluator {
 public:
  C0BoundsEvaluator(const CoefficientField& field, Interval domain, std::size_t grid = 1025);
  C0Bounds operator()(const FlowPoint& omega);

 private:
  const CoefficientField* field_;
  std::vector<double> xs_;
  std::vector<double> values_;
  BatchEvaluator scratch_;
};

struct ValidationOptions {
  std::size_t n_samples = 200;
  double t_orbit = 1.0;
  std::uint64_t seed = 1;
  std::size_t x_grid = 129;           // spatial points for inf/sup checks
  std::size_t c0_grid = 257;          // spatial points inside c0^+- evaluation
  std::size_t time_points = 32;       // midpoint rule on [0, t_orbit]
};

struct ValidationReport {
  std::size_t n_samples = 0;
  double t_orbit = 0.0;

  double alpha0 = 0.0;  // min a over sampled (omega, x)
  bool ellipticity_ok = false;

  double sup_a = 0.0;
  double sup_a1 = 0.0;
  double sup_b = 0.0;
  bool bounded_ok = false;

  double min_d0 = 0.0;  // over both endpoints; 0 when not Robin
  bool d0_ok = false;

  // Monte-Carlo estimates of the two integrability conditions on c0.
  double a4_i = 0.0;
  double a4_i_stderr = 0.0;
  bool a4_i_ok = false;
  double a4_ii = 0.0;
  double a4_ii_stderr = 0.0;
  bool a4_ii_ok = false;

  std::vector<std::string> warnings;
  std::vector<std::string> failures;

  bool passed() const { return failures.empty(); }
};

ValidationReport validate_assumptions(const CoefficientField& field, Interval domain,
                                      const ValidationOptions& options);

}  // namespace plex
