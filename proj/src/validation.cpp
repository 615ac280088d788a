// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "plex/coefficients.hpp"
#include "plex/simd/kernels.hpp"

namespace plex {
namespace {

struct MeanStd {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStd mean_stderr(const std::vector<double>& v) {
  MeanStd r;
  if (v.empty()) return r;
  double s = 0.0;
  for (double x : v) s += x;
  r.mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return r;
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.stderr_ = std::sqrt(ss / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
  return r;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

ValidationReport validate_assumptions(const CoefficientField& field, Interval domain,
                                      const ValidationOptions& options) {
  if (options.n_samples < 1) throw std::invalid_argument("validation needs n_samples >= 1");
  ValidationReport rep;
  rep.n_samples = options.n_samples;
  rep.t_orbit = options.t_orbit;
  rep.warnings = field.flow().warnings();

  const auto& coeffs = field.coefficients();
  const auto& flow = field.flow();
  const auto& k = simd::active();

  const std::size_t nx = std::max<std::size_t>(options.x_grid, 2);
  std::vector<double> xs(nx), buf(nx);
  for (std::size_t i = 0; i < nx; ++i)
    xs[i] = domain.left + (domain.right - domain.left) * static_cast<double>(i) /
                              static_cast<double>(nx - 1);

  BatchEvaluator scratch;
  C0BoundsEvaluator bounds(field, domain, options.c0_grid);
  const auto omegas = flow.sample_invariant(options.seed, options.n_samples);
  const std::size_t nt = std::max<std::size_t>(options.time_points, 1);
  const double dt = options.t_orbit / static_cast<double>(nt);

  double alpha0 = std::numeric_limits<double>::infinity();
  double sup_a = 0.0, sup_a1 = 0.0, sup_b = 0.0;
  double min_d0 = std::numeric_limits<double>::infinity();
  const bool robin = coeffs.bc == BoundaryKind::robin;
  std::vector<double> a4i(omegas.size()), a4ii(omegas.size());

  auto sup_abs = [&](const Expression& e, const FlowPoint& w) {
    field.eval_batch(e, w, xs, buf, scratch);
    return std::max(std::fabs(k.min_value(buf.data(), nx)), std::fabs(k.max_value(buf.data(), nx)));
  };

  for (std::size_t s = 0; s < omegas.size(); ++s) {
    double plus_int = 0.0, span_int = 0.0;
    for (std::size_t j = 0; j < nt; ++j) {
      const FlowPoint w = flow.advance(omegas[s], (static_cast<double>(j) + 0.5) * dt);
      field.eval_batch(coeffs.a, w, xs, buf, scratch);
      alpha0 = std::min(alpha0, k.min_value(buf.data(), nx));
      sup_a = std::max(sup_a, sup_abs(coeffs.a, w));
      sup_a1 = std::max(sup_a1, sup_abs(coeffs.a1, w));
      sup_b = std::max(sup_b, sup_abs(coeffs.b, w));
      if (robin) {
        min_d0 = std::min(min_d0, field.d0_left(w, domain.left));
        min_d0 = std::min(min_d0, field.d0_right(w, domain.right));
      }
      const C0Bounds c = bounds(w);
      plus_int += c.plus * dt;
      span_int += (c.plus - c.minus) * dt;
    }
    a4i[s] = plus_int;
    a4ii[s] = std::max(std::log(span_int), 0.0);
  }

  rep.alpha0 = alpha0;
  rep.ellipticity_ok = std::isfinite(alpha0) && alpha0 > 0.0;
  if (!rep.ellipticity_ok)
    rep.failures.push_back("ellipticity: min a = " + fmt(alpha0) + " is not positive");

  rep.sup_a = sup_a;
  rep.sup_a1 = sup_a1;
  rep.sup_b = sup_b;
  rep.bounded_ok = std::isfinite(sup_a) && std::isfinite(sup_a1) && std::isfinite(sup_b);
  if (!rep.bounded_ok) rep.failures.push_back("boundedness: a, a1 or b is not finite on samples");

  rep.min_d0 = robin ? min_d0 : 0.0;
  rep.d0_ok = !robin || (std::isfinite(min_d0) && min_d0 >= 0.0);
  if (!rep.d0_ok) rep.failures.push_back("robin: min d0 = " + fmt(min_d0) + " is negative");

  const MeanStd i = mean_stderr(a4i);
  rep.a4_i = i.mean;
  rep.a4_i_stderr = i.stderr_;
  rep.a4_i_ok = std::isfinite(i.mean) && std::isfinite(i.stderr_);
  if (!rep.a4_i_ok) rep.failures.push_back("A4(i): integral of c0+ is not finite on samples");

  const MeanStd ii = mean_stderr(a4ii);
  rep.a4_ii = ii.mean;
  rep.a4_ii_stderr = ii.stderr_;
  rep.a4_ii_ok = std::isfinite(ii.mean) && std::isfinite(ii.stderr_);
  if (!rep.a4_ii_ok) rep.failures.push_back("A4(ii): ln+ integral is not finite on samples");

  return rep;
}

}  // namespace plex
