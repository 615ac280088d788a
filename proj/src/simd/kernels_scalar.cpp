// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

// Scalar reference kernels. The AVX2 variants must agree with these
// bit-for-bit on element-wise kernels and to round-off on reductions.

#include <cmath>
#include <limits>

#include "plex/simd/kernels.hpp"
#include "kernels_common.hpp"

namespace plex::simd {
namespace {

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

void tridiag_matvec_scalar(const double* lower, const double* diag, const double* upper,
                           const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = tridiag_row(lower, diag, upper, x, i, n);
}

double tridiag_bilinear_scalar(const double* lower, const double* diag, const double* upper,
                               const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * tridiag_row(lower, diag, upper, y, i, n);
  return s;
}

void axpby_scalar(double alpha, const double* x, double beta, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

double min_scalar(const double* x, std::size_t n) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = x[i] < m ? x[i] : m;
  return m;
}

double max_scalar(const double* x, std::size_t n) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) m = x[i] > m ? x[i] : m;
  return m;
}

void vadd_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}
void vsub_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}
void vmul_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}
void vdiv_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] / y[i];
}
void vadd_s_scalar(const double* x, double s, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + s;
}
void vmul_s_scalar(const double* x, double s, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * s;
}
void vsub_from_s_scalar(double s, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s - x[i];
}
void vdiv_s_by_scalar(double s, const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s / x[i];
}
void vneg_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = -x[i];
}
void vabs_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(x[i]);
}
bool any_zero_scalar(const double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] == 0.0) return true;
  return false;
}

void p1_elements_scalar(const ElementInputs& in, ElementOutputs out, double h, bool lumped,
                        std::size_t n_elements) {
  for (std::size_t e = 0; e < n_elements; ++e) {
    const P1Local k = p1_local(in.a_q0[e], in.a_q1[e], in.a1_q0[e], in.a1_q1[e], in.b_q0[e],
                               in.b_q1[e], in.c0_q0[e], in.c0_q1[e], h, lumped);
    out.k00[e] = k.k00;
    out.k01[e] = k.k01;
    out.k10[e] = k.k10;
    out.k11[e] = k.k11;
  }
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{
      Isa::scalar,
      dot_scalar,
      tridiag_matvec_scalar,
      tridiag_bilinear_scalar,
      axpby_scalar,
      scale_scalar,
      min_scalar,
      max_scalar,
      vadd_scalar,
      vsub_scalar,
      vmul_scalar,
      vdiv_scalar,
      vadd_s_scalar,
      vmul_s_scalar,
      vsub_from_s_scalar,
      vdiv_s_by_scalar,
      vneg_scalar,
      vabs_scalar,
      any_zero_scalar,
      p1_elements_scalar,
  };
  return table;
}

}  // namespace plex::simd
