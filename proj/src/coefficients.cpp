// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/coefficients.hpp"

#include <algorithm>
#include <stdexcept>

#include "plex/simd/kernels.hpp"

namespace plex {

std::string to_string(BoundaryKind kind) {
  switch (kind) {
    case BoundaryKind::dirichlet:
      return "dirichlet";
    case BoundaryKind::neumann:
      return "neumann";
    case BoundaryKind::robin:
      return "robin";
  }
  return "unknown";
}

BoundaryKind boundary_kind_from_string(const std::string& name) {
  if (name == "dirichlet") return BoundaryKind::dirichlet;
  if (name == "neumann") return BoundaryKind::neumann;
  if (name == "robin") return BoundaryKind::robin;
  throw std::invalid_argument("unknown boundary condition '" + name +
                              "' (expected dirichlet, neumann or robin)");
}

CoefficientField::CoefficientField(ProblemCoefficients coeffs,
                                   std::shared_ptr<const MetricFlow> flow)
    : coeffs_(std::move(coeffs)), flow_(std::move(flow)) {
  if (!flow_) throw std::invalid_argument("coefficient field needs a flow");
  const std::size_t d = flow_->dimension();
  const bool switching = flow_->kind() == FlowKind::smoothed_switching;
  const std::pair<const char*, const Expression*> fields[] = {
      {"a", &coeffs_.a},   {"a1", &coeffs_.a1},           {"b", &coeffs_.b},
      {"c0", &coeffs_.c0}, {"d0_left", &coeffs_.d0_left}, {"d0_right", &coeffs_.d0_right}};
  bool depends = false;
  for (const auto& [name, e] : fields) {
    if (e->max_w_index() > d)
      throw std::invalid_argument("coefficient " + std::string(name) + " uses w" +
                                  std::to_string(e->max_w_index()) +
                                  " but the flow has dimension " + std::to_string(d));
    if (e->uses_s() && !switching)
      throw std::invalid_argument("coefficient " + std::string(name) +
                                  " uses s, which needs the smoothed_switching driver");
    depends = depends || e->depends_on_flow();
  }
  for (const auto* e : {&coeffs_.d0_left, &coeffs_.d0_right})
    if (e->uses_x())
      throw std::invalid_argument("d0 may depend on the base point only, not on x");
  const bool singular = flow_->kind() == FlowKind::unbounded_amplitude_rotation &&
                        !coeffs_.c0.is_identically_zero();
  autonomous_ = !depends && !singular;
}

namespace {

EvalPoint point_of(const MetricFlow& flow, const FlowPoint& omega, double x) {
  return EvalPoint{x, omega.torus, flow.switch_amplitude(omega)};
}

}  // namespace

double CoefficientField::eval(const Expression& e, const FlowPoint& omega, double x) const {
  return e.eval(point_of(*flow_, omega, x));
}

double CoefficientField::c0(const FlowPoint& omega, double x) const {
  const double v = eval(coeffs_.c0, omega, x);
  return flow_->kind() == FlowKind::unbounded_amplitude_rotation ? v * flow_->c0_amplitude(omega)
                                                                 : v;
}

double CoefficientField::d0_left(const FlowPoint& omega, double x_left) const {
  return eval(coeffs_.d0_left, omega, x_left);
}

double CoefficientField::d0_right(const FlowPoint& omega, double x_right) const {
  return eval(coeffs_.d0_right, omega, x_right);
}

void CoefficientField::eval_batch(const Expression& e, const FlowPoint& omega,
                                  std::span<const double> xs, std::span<double> out,
                                  BatchEvaluator& scratch) const {
  scratch.eval(e, xs, omega.torus, flow_->switch_amplitude(omega), out);
}

void CoefficientField::c0_batch(const FlowPoint& omega, std::span<const double> xs,
                                std::span<double> out, BatchEvaluator& scratch) const {
  eval_batch(coeffs_.c0, omega, xs, out, scratch);
  if (flow_->kind() == FlowKind::unbounded_amplitude_rotation)
    simd::active().vmul_scalar(out.data(), flow_->c0_amplitude(omega), out.data(), out.size());
}

C0BoundsEvaluator::C0BoundsEvaluator(const CoefficientField& field, Interval domain,
                                     std::size_t grid)
    : field_(&field), xs_(std::max<std::size_t>(grid, 2)), values_(xs_.size()) {
  const std::size_t n = xs_.size();
  for (std::size_t i = 0; i < n; ++i)
    xs_[i] = domain.left + (domain.right - domain.left) * static_cast<double>(i) /
                               static_cast<double>(n - 1);
}

C0Bounds C0BoundsEvaluator::operator()(const FlowPoint& omega) {
  field_->c0_batch(omega, xs_, values_, scratch_);
  const auto& k = simd::active();
  const double lo = k.min_value(values_.data(), values_.size());
  const double hi = k.max_value(values_.data(), values_.size());
  return C0Bounds{std::min(lo, 0.0), std::max(hi, 0.0)};
}

C0Bounds c0_bounds(const CoefficientField& field, const FlowPoint& omega, Interval domain,
                   std::size_t grid) {
  if (grid < 2) throw std::invalid_argument("c0_bounds needs at least 2 grid points");
  C0BoundsEvaluator eval(field, domain, grid);
  return eval(omega);
}

}  // namespace plex
