// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/spectral.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "plex/fem.hpp"
#include "plex/simd/kernels.hpp"

namespace plex {
namespace {

double max_abs_entry(const Tridiag& t) {
  double m = 0.0;
  for (double v : t.diag) m = std::max(m, std::fabs(v));
  for (double v : t.lower) m = std::max(m, std::fabs(v));
  for (double v : t.upper) m = std::max(m, std::fabs(v));
  return m;
}

double inf_norm(const Tridiag& t) {
  double m = 0.0;
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    double r = std::fabs(t.diag[i]);
    if (i > 0) r += std::fabs(t.lower[i - 1]);
    if (i + 1 < n) r += std::fabs(t.upper[i]);
    m = std::max(m, r);
  }
  return m;
}

void require_symmetric(const Tridiag& a) {
  const double asym = a.max_asymmetry();
  if (asym > 1e-12 * std::max(1.0, max_abs_entry(a))) {
    std::ostringstream os;
    os << "form matrix is not symmetric (max |A_ij - A_ji| = " << asym
       << "); the principal eigenvalue is defined for symmetric problems only";
    throw AsymmetricFormError(os.str(), asym);
  }
}

double pencil_residual(const Tridiag& m, const Tridiag& a, std::span<const double> v,
                       double lambda) {
  std::vector<double> av(v.size()), mv(v.size());
  a.apply(v, av);
  m.apply(v, mv);
  simd::axpby(lambda, mv, 1.0, av);
  const double r = std::sqrt(simd::dot(av, av));
  const double vn = std::sqrt(simd::dot(v, v));
  const double scale = (inf_norm(a) + std::fabs(lambda) * inf_norm(m)) * vn;
  return scale > 0.0 ? r / scale : r;
}

void fix_sign(std::vector<double>& v) {
  std::size_t imax = 0;
  for (std::size_t i = 1; i < v.size(); ++i)
    if (std::fabs(v[i]) > std::fabs(v[imax])) imax = i;
  if (v[imax] < 0.0) simd::scale(-1.0, v);
}

}  // namespace

std::size_t count_above(const Tridiag& m, const Tridiag& a, double mu) {
  const std::size_t n = a.size();
  std::size_t count = 0;
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double k = a.diag[i] + mu * m.diag[i];
    if (i > 0) {
      const double off = a.lower[i - 1] + mu * m.lower[i - 1];
      k -= off * off / d;
    }
    if (k == 0.0) k = -std::numeric_limits<double>::min();
    if (k < 0.0) ++count;
    d = k;
  }
  return count;
}

DenseEigen dense_pencil_eigen(const Tridiag& m, const Tridiag& a) {
  require_symmetric(a);
  const std::size_t n = m.size();
  // dense Cholesky of the (tridiagonal) mass matrix: M = L L^T
  std::vector<double> l(n * n, 0.0);
  const auto md = m.dense();
  for (std::size_t j = 0; j < n; ++j) {
    double s = md[j * n + j];
    for (std::size_t k = 0; k < j; ++k) s -= l[j * n + k] * l[j * n + k];
    if (!(s > 0.0)) throw std::invalid_argument("mass matrix is not positive definite");
    l[j * n + j] = std::sqrt(s);
    for (std::size_t i = j + 1; i < n; ++i) {
      double t = md[i * n + j];
      for (std::size_t k = 0; k < j; ++k) t -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = t / l[j * n + j];
    }
  }
  // C = L^-1 (-A) L^-T
  std::vector<double> c = a.dense();
  for (double& v : c) v = -v;
  auto lower_solve_columns = [&](std::vector<double>& x) {
    for (std::size_t col = 0; col < n; ++col)
      for (std::size_t i = 0; i < n; ++i) {
        double s = x[i * n + col];
        for (std::size_t k = 0; k < i; ++k) s -= l[i * n + k] * x[k * n + col];
        x[i * n + col] = s / l[i * n + i];
      }
  };
  lower_solve_columns(c);
  // transpose, repeat: (L^-1 (L^-1 X)^T)^T = L^-1 X L^-T for symmetric X
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) std::swap(c[i * n + j], c[j * n + i]);
  lower_solve_columns(c);

  std::vector<double> q(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) q[i * n + i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        total += c[i * n + j] * c[i * n + j];
        if (i != j) off += c[i * n + j] * c[i * n + j];
      }
    if (off <= 1e-30 * total) break;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t r = p + 1; r < n; ++r) {
        const double apr = c[p * n + r];
        if (apr == 0.0) continue;
        const double theta = (c[r * n + r] - c[p * n + p]) / (2.0 * apr);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        const double cs = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * cs;
        for (std::size_t k = 0; k < n; ++k) {
          const double ckp = c[k * n + p], ckr = c[k * n + r];
          c[k * n + p] = cs * ckp - sn * ckr;
          c[k * n + r] = sn * ckp + cs * ckr;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double cpk = c[p * n + k], crk = c[r * n + k];
          c[p * n + k] = cs * cpk - sn * crk;
          c[r * n + k] = sn * cpk + cs * crk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double qkp = q[k * n + p], qkr = q[k * n + r];
          q[k * n + p] = cs * qkp - sn * qkr;
          q[k * n + r] = sn * qkp + cs * qkr;
        }
      }
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return c[x * n + x] > c[y * n + y]; });
  DenseEigen out;
  for (std::size_t idx : order) {
    out.values.push_back(c[idx * n + idx]);
    // v = L^-T y
    std::vector<double> v(n);
    for (std::size_t i = n; i-- > 0;) {
      double s = q[i * n + idx];
      for (std::size_t k = i + 1; k < n; ++k) s -= l[k * n + i] * v[k];
      v[i] = s / l[i * n + i];
    }
    out.vectors.push_back(std::move(v));
  }
  return out;
}

EigenResult principal_eigen(const Tridiag& m, const Tridiag& a, const EigenOptions& opts) {
  require_symmetric(a);
  const std::size_t n = a.size();
  EigenResult res;

  if (n <= opts.dense_limit) {
    DenseEigen d = dense_pencil_eigen(m, a);
    res.v = std::move(d.vectors.front());
    simd::scale(1.0 / m_norm(m, res.v), res.v);
    fix_sign(res.v);
    res.lambda_princ = rayleigh_kappa(m, a, res.v);
    res.residual = pencil_residual(m, a, res.v, res.lambda_princ);
    res.iterations = 1;
    return res;
  }

  // bracket [lo, hi] with count_above(lo) >= 1 and count_above(hi) == 0
  double lo = opts.lower_bound;
  if (!std::isfinite(lo)) lo = rayleigh_kappa(m, a, std::vector<double>(n, 1.0));
  double step = 1e-9 * std::max(1.0, std::fabs(lo));
  while (count_above(m, a, lo) == 0) {
    lo -= step;
    step *= 2.0;
  }
  step = std::max(1.0, std::fabs(lo));
  double hi = lo + step;
  while (count_above(m, a, hi) > 0) {
    lo = hi;
    step *= 2.0;
    hi = lo + step;
  }
  while (hi - lo > 1e-9 * std::max(1.0, std::fabs(hi))) {
    const double mid = 0.5 * (lo + hi);
    if (count_above(m, a, mid) > 0)
      lo = mid;
    else
      hi = mid;
  }

  // Inverse iteration shifted one bracket width above lambda_princ. At hi
  // itself the last pivot of A + hi M can round to exactly zero.
  const double shift = hi + (hi - lo);
  std::vector<double> v(n, 1.0), mv(n), work(n);
  simd::scale(1.0 / m_norm(m, v), v);
  double lambda = rayleigh_kappa(m, a, v);
  double residual = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opts.max_iter; ++it) {
    m.apply(v, mv);
    solve_combination(shift, m, 1.0, a, mv, v, work);
    simd::scale(1.0 / m_norm(m, v), v);
    lambda = rayleigh_kappa(m, a, v);
    residual = pencil_residual(m, a, v, lambda);
    res.iterations = it;
    if (residual <= opts.tol) break;
  }
  if (!(residual <= opts.tol)) {
    std::ostringstream os;
    os << "principal eigenpair did not converge in " << opts.max_iter
       << " iterations (last residual " << residual << ")";
    throw EigenConvergenceError(os.str(), residual);
  }
  fix_sign(v);
  res.v = std::move(v);
  res.lambda_princ = lambda;
  res.residual = residual;
  return res;
}

RayleighBound check_rayleigh_bound(const Tridiag& m, const Tridiag& a, std::span<const double> u,
                                   const EigenOptions& opts) {
  RayleighBound b;
  b.kappa_u = rayleigh_kappa(m, a, u);
  b.lambda = principal_eigen(m, a, opts).lambda_princ;
  b.gap = b.lambda - b.kappa_u;
  return b;
}

}  // namespace plex
