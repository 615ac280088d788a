// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/tridiag.hpp"

#include <cmath>
#include <string>

#include "plex/simd/kernels.hpp"

namespace plex {

void Tridiag::apply(std::span<const double> x, std::span<double> y) const {
  simd::active().tridiag_matvec(lower.data(), diag.data(), upper.data(), x.data(), y.data(),
                                size());
}

double Tridiag::bilinear(std::span<const double> x, std::span<const double> y) const {
  return simd::active().tridiag_bilinear(lower.data(), diag.data(), upper.data(), x.data(),
                                         y.data(), size());
}

double Tridiag::max_asymmetry() const {
  double m = 0.0;
  for (std::size_t i = 0; i < lower.size(); ++i) m = std::max(m, std::fabs(lower[i] - upper[i]));
  return m;
}

std::vector<double> Tridiag::dense() const {
  const std::size_t n = size();
  std::vector<double> out(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    out[i * n + i] = diag[i];
    if (i + 1 < n) {
      out[i * n + i + 1] = upper[i];
      out[(i + 1) * n + i] = lower[i];
    }
  }
  return out;
}

namespace {

template <class T, class Shift>
void thomas(Shift alpha, const Tridiag& m, double beta, const Tridiag& a, const T* rhs, T* x,
            T* c) {
  const std::size_t n = m.size();
  auto dg = [&](std::size_t i) { return alpha * m.diag[i] + beta * a.diag[i]; };
  auto lo = [&](std::size_t i) { return alpha * m.lower[i] + beta * a.lower[i]; };
  auto up = [&](std::size_t i) { return alpha * m.upper[i] + beta * a.upper[i]; };

  T piv = dg(0);
  if (piv == T(0)) throw SingularPivotError("singular pivot in tridiagonal solve at row 0", 0);
  x[0] = rhs[0] / piv;
  for (std::size_t i = 1; i < n; ++i) {
    c[i - 1] = up(i - 1) / piv;
    const T l = lo(i - 1);
    piv = dg(i) - l * c[i - 1];
    if (piv == T(0) || !std::isfinite(std::abs(piv)))
      throw SingularPivotError("singular pivot in tridiagonal solve at row " + std::to_string(i), i);
    x[i] = (rhs[i] - l * x[i - 1]) / piv;
  }
  for (std::size_t i = n - 1; i-- > 0;) x[i] = x[i] - c[i] * x[i + 1];
}

}  // namespace

void solve_combination(double alpha, const Tridiag& m, double beta, const Tridiag& a,
                       std::span<const double> rhs, std::span<double> x,
                       std::span<double> work) {
  thomas<double>(alpha, m, beta, a, rhs.data(), x.data(), work.data());
}

void solve_combination(std::complex<double> alpha, const Tridiag& m, double beta,
                       const Tridiag& a, std::span<const std::complex<double>> rhs,
                       std::span<std::complex<double>> x,
                       std::span<std::complex<double>> work) {
  thomas<std::complex<double>>(alpha, m, beta, a, rhs.data(), x.data(), work.data());
}

void solve(const Tridiag& t, std::span<const double> rhs, std::span<double> x) {
  Tridiag zero(t.size());
  std::vector<double> work(t.size());
  solve_combination(0.0, zero, 1.0, t, rhs, x, work);
}

}  // namespace plex
