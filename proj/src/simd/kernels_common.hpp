// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>

// Shared scalar building blocks. Internal linkage on purpose: this header is
// compiled into translation units with different target flags, and an
// out-of-line copy built for AVX2 must never be picked by the linker for the
// scalar path.

namespace plex::simd {
namespace {

// Values of the right hat function at the two Gauss points on the reference element.
constexpr double kGaussLo = 0.21132486540518711775;  // (1 - 1/sqrt(3)) / 2
constexpr double kGaussHi = 0.78867513459481288225;  // (1 + 1/sqrt(3)) / 2

inline double tridiag_row(const double* lower, const double* diag, const double* upper,
                          const double* x, std::size_t i, std::size_t n) {
  double y = diag[i] * x[i];
  if (i > 0) y = y + lower[i - 1] * x[i - 1];
  if (i + 1 < n) y = y + upper[i] * x[i + 1];
  return y;
}

struct P1Local {
  double k00, k01, k10, k11;
};

// Local matrix of B(u,v) = int (a u' + a1 u) v' - (b u' + c0 u) v for one
// element of width h, with coefficients sampled at the two Gauss points.
// The AVX2 kernel repeats this exact operation sequence lane-wise.
inline P1Local p1_local(double a0, double a1, double al0, double al1, double b0, double b1,
                        double c0, double c1, double h, bool lumped) {
  const double half = 0.5;
  const double hw = h * half;
  const double stiff = (a0 + a1) / (2.0 * h);
  // sum_q a1_q phi_j(q)
  const double al_phi0 = al0 * kGaussHi + al1 * kGaussLo;
  const double al_phi1 = al0 * kGaussLo + al1 * kGaussHi;
  // sum_q b_q phi_i(q)
  const double b_phi0 = b0 * kGaussHi + b1 * kGaussLo;
  const double b_phi1 = b0 * kGaussLo + b1 * kGaussHi;
  // zero-order products
  const double c00 = hw * (c0 * (kGaussHi * kGaussHi) + c1 * (kGaussLo * kGaussLo));
  const double c11 = hw * (c0 * (kGaussLo * kGaussLo) + c1 * (kGaussHi * kGaussHi));
  const double c01 = hw * ((c0 + c1) * (kGaussLo * kGaussHi));

  P1Local k;
  k.k00 = stiff - half * al_phi0 + half * b_phi0;
  k.k01 = -stiff - half * al_phi1 - half * b_phi0;
  k.k10 = -stiff + half * al_phi0 + half * b_phi1;
  k.k11 = stiff + half * al_phi1 - half * b_phi1;
  if (lumped) {
    k.k00 = k.k00 - (c00 + c01);
    k.k11 = k.k11 - (c11 + c01);
  } else {
    k.k00 = k.k00 - c00;
    k.k01 = k.k01 - c01;
    k.k10 = k.k10 - c01;
    k.k11 = k.k11 - c11;
  }
  return k;
}

}  // namespace
}  // namespace plex::simd
