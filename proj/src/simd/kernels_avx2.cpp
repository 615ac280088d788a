// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

// AVX2 kernels. Built with -mavx2 only for this translation unit; reached
// exclusively through the dispatch table after a runtime CPU check.

#include <immintrin.h>

#include <cmath>
#include <limits>

#include "plex/simd/kernels.hpp"
#include "kernels_common.hpp"

namespace plex::simd {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i + 4), _mm256_loadu_pd(y + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc0);
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

// Interior rows 1..n-2 computed four at a time with the same operation order
// as tridiag_row, so results match the scalar path exactly.
inline __m256d tridiag_rows4(const double* lower, const double* diag, const double* upper,
                             const double* x, std::size_t i) {
  __m256d y = _mm256_mul_pd(_mm256_loadu_pd(diag + i), _mm256_loadu_pd(x + i));
  y = _mm256_add_pd(y, _mm256_mul_pd(_mm256_loadu_pd(lower + i - 1), _mm256_loadu_pd(x + i - 1)));
  y = _mm256_add_pd(y, _mm256_mul_pd(_mm256_loadu_pd(upper + i), _mm256_loadu_pd(x + i + 1)));
  return y;
}

void tridiag_matvec_avx2(const double* lower, const double* diag, const double* upper,
                         const double* x, double* y, std::size_t n) {
  if (n < 6) {
    for (std::size_t i = 0; i < n; ++i) y[i] = tridiag_row(lower, diag, upper, x, i, n);
    return;
  }
  y[0] = tridiag_row(lower, diag, upper, x, 0, n);
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4) _mm256_storeu_pd(y + i, tridiag_rows4(lower, diag, upper, x, i));
  for (; i < n; ++i) y[i] = tridiag_row(lower, diag, upper, x, i, n);
}

double tridiag_bilinear_avx2(const double* lower, const double* diag, const double* upper,
                             const double* x, const double* y, std::size_t n) {
  if (n < 6) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i] * tridiag_row(lower, diag, upper, y, i, n);
    return s;
  }
  double s = x[0] * tridiag_row(lower, diag, upper, y, 0, n);
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 1;
  for (; i + 4 <= n - 1; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), tridiag_rows4(lower, diag, upper, y, i), acc);
  s += hsum(acc);
  for (; i < n; ++i) s += x[i] * tridiag_row(lower, diag, upper, y, i, n);
  return s;
}

void axpby_avx2(double alpha, const double* x, double beta, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d vb = _mm256_set1_pd(beta);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d r = _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x + i)),
                                    _mm256_mul_pd(vb, _mm256_loadu_pd(y + i)));
    _mm256_storeu_pd(y + i, r);
  }
  for (; i < n; ++i) y[i] = alpha * x[i] + beta * y[i];
}

void scale_avx2(double alpha, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), va));
  for (; i < n; ++i) x[i] *= alpha;
}

double min_avx2(const double* x, std::size_t n) {
  __m256d m = _mm256_set1_pd(std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_min_pd(m, _mm256_loadu_pd(x + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = lanes[0];
  for (int k = 1; k < 4; ++k) r = lanes[k] < r ? lanes[k] : r;
  for (; i < n; ++i) r = x[i] < r ? x[i] : r;
  return r;
}

double max_avx2(const double* x, std::size_t n) {
  __m256d m = _mm256_set1_pd(-std::numeric_limits<double>::infinity());
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) m = _mm256_max_pd(m, _mm256_loadu_pd(x + i));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, m);
  double r = lanes[0];
  for (int k = 1; k < 4; ++k) r = lanes[k] > r ? lanes[k] : r;
  for (; i < n; ++i) r = x[i] > r ? x[i] : r;
  return r;
}

template <class VecOp, class ScalarOp>
inline void binary(const double* x, const double* y, double* out, std::size_t n, VecOp vop,
                   ScalarOp sop) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, vop(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  for (; i < n; ++i) out[i] = sop(x[i], y[i]);
}

void vadd_avx2(const double* x, const double* y, double* out, std::size_t n) {
  binary(x, y, out, n, [](__m256d a, __m256d b) { return _mm256_add_pd(a, b); },
         [](double a, double b) { return a + b; });
}
void vsub_avx2(const double* x, const double* y, double* out, std::size_t n) {
  binary(x, y, out, n, [](__m256d a, __m256d b) { return _mm256_sub_pd(a, b); },
         [](double a, double b) { return a - b; });
}
void vmul_avx2(const double* x, const double* y, double* out, std::size_t n) {
  binary(x, y, out, n, [](__m256d a, __m256d b) { return _mm256_mul_pd(a, b); },
         [](double a, double b) { return a * b; });
}
void vdiv_avx2(const double* x, const double* y, double* out, std::size_t n) {
  binary(x, y, out, n, [](__m256d a, __m256d b) { return _mm256_div_pd(a, b); },
         [](double a, double b) { return a / b; });
}

void vadd_s_avx2(const double* x, double s, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i), vs));
  for (; i < n; ++i) out[i] = x[i] + s;
}
void vmul_s_avx2(const double* x, double s, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i), vs));
  for (; i < n; ++i) out[i] = x[i] * s;
}
void vsub_from_s_avx2(double s, const double* x, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_sub_pd(vs, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = s - x[i];
}
void vdiv_s_by_avx2(double s, const double* x, double* out, std::size_t n) {
  const __m256d vs = _mm256_set1_pd(s);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_div_pd(vs, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = s / x[i];
}
void vneg_avx2(const double* x, double* out, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(out + i, _mm256_xor_pd(_mm256_loadu_pd(x + i), sign));
  for (; i < n; ++i) out[i] = -x[i];
}
void vabs_avx2(const double* x, double* out, std::size_t n) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_andnot_pd(sign, _mm256_loadu_pd(x + i)));
  for (; i < n; ++i) out[i] = std::fabs(x[i]);
}
bool any_zero_avx2(const double* x, std::size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d eq = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_EQ_OQ);
    if (_mm256_movemask_pd(eq) != 0) return true;
  }
  for (; i < n; ++i)
    if (x[i] == 0.0) return true;
  return false;
}

void p1_elements_avx2(const ElementInputs& in, ElementOutputs out, double h, bool lumped,
                      std::size_t n_elements) {
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d hw = _mm256_set1_pd(h * 0.5);
  const __m256d two_h = _mm256_set1_pd(2.0 * h);
  const __m256d glo = _mm256_set1_pd(kGaussLo);
  const __m256d ghi = _mm256_set1_pd(kGaussHi);
  const __m256d hihi = _mm256_set1_pd(kGaussHi * kGaussHi);
  const __m256d lolo = _mm256_set1_pd(kGaussLo * kGaussLo);
  const __m256d lohi = _mm256_set1_pd(kGaussLo * kGaussHi);
  const __m256d sign = _mm256_set1_pd(-0.0);

  std::size_t e = 0;
  for (; e + 4 <= n_elements; e += 4) {
    const __m256d a0 = _mm256_loadu_pd(in.a_q0 + e), a1 = _mm256_loadu_pd(in.a_q1 + e);
    const __m256d al0 = _mm256_loadu_pd(in.a1_q0 + e), al1 = _mm256_loadu_pd(in.a1_q1 + e);
    const __m256d b0 = _mm256_loadu_pd(in.b_q0 + e), b1 = _mm256_loadu_pd(in.b_q1 + e);
    const __m256d c0 = _mm256_loadu_pd(in.c0_q0 + e), c1 = _mm256_loadu_pd(in.c0_q1 + e);

    const __m256d stiff = _mm256_div_pd(_mm256_add_pd(a0, a1), two_h);
    const __m256d neg_stiff = _mm256_xor_pd(stiff, sign);
    const __m256d al_phi0 = _mm256_add_pd(_mm256_mul_pd(al0, ghi), _mm256_mul_pd(al1, glo));
    const __m256d al_phi1 = _mm256_add_pd(_mm256_mul_pd(al0, glo), _mm256_mul_pd(al1, ghi));
    const __m256d b_phi0 = _mm256_add_pd(_mm256_mul_pd(b0, ghi), _mm256_mul_pd(b1, glo));
    const __m256d b_phi1 = _mm256_add_pd(_mm256_mul_pd(b0, glo), _mm256_mul_pd(b1, ghi));
    const __m256d c00 =
        _mm256_mul_pd(hw, _mm256_add_pd(_mm256_mul_pd(c0, hihi), _mm256_mul_pd(c1, lolo)));
    const __m256d c11 =
        _mm256_mul_pd(hw, _mm256_add_pd(_mm256_mul_pd(c0, lolo), _mm256_mul_pd(c1, hihi)));
    const __m256d c01 = _mm256_mul_pd(hw, _mm256_mul_pd(_mm256_add_pd(c0, c1), lohi));

    __m256d k00 = _mm256_add_pd(_mm256_sub_pd(stiff, _mm256_mul_pd(half, al_phi0)),
                                _mm256_mul_pd(half, b_phi0));
    __m256d k01 = _mm256_sub_pd(_mm256_sub_pd(neg_stiff, _mm256_mul_pd(half, al_phi1)),
                                _mm256_mul_pd(half, b_phi0));
    __m256d k10 = _mm256_add_pd(_mm256_add_pd(neg_stiff, _mm256_mul_pd(half, al_phi0)),
                                _mm256_mul_pd(half, b_phi1));
    __m256d k11 = _mm256_sub_pd(_mm256_add_pd(stiff, _mm256_mul_pd(half, al_phi1)),
                                _mm256_mul_pd(half, b_phi1));
    if (lumped) {
      k00 = _mm256_sub_pd(k00, _mm256_add_pd(c00, c01));
      k11 = _mm256_sub_pd(k11, _mm256_add_pd(c11, c01));
    } else {
      k00 = _mm256_sub_pd(k00, c00);
      k01 = _mm256_sub_pd(k01, c01);
      k10 = _mm256_sub_pd(k10, c01);
      k11 = _mm256_sub_pd(k11, c11);
    }
    _mm256_storeu_pd(out.k00 + e, k00);
    _mm256_storeu_pd(out.k01 + e, k01);
    _mm256_storeu_pd(out.k10 + e, k10);
    _mm256_storeu_pd(out.k11 + e, k11);
  }
  for (; e < n_elements; ++e) {
    const P1Local k = p1_local(in.a_q0[e], in.a_q1[e], in.a1_q0[e], in.a1_q1[e], in.b_q0[e],
                               in.b_q1[e], in.c0_q0[e], in.c0_q1[e], h, lumped);
    out.k00[e] = k.k00;
    out.k01[e] = k.k01;
    out.k10[e] = k.k10;
    out.k11[e] = k.k11;
  }
}

}  // namespace

const KernelTable* avx2_kernels() {
  static const KernelTable table{
      Isa::avx2,
      dot_avx2,
      tridiag_matvec_avx2,
      tridiag_bilinear_avx2,
      axpby_avx2,
      scale_avx2,
      min_avx2,
      max_avx2,
      vadd_avx2,
      vsub_avx2,
      vmul_avx2,
      vdiv_avx2,
      vadd_s_avx2,
      vmul_s_avx2,
      vsub_from_s_avx2,
      vdiv_s_by_avx2,
      vneg_avx2,
      vabs_avx2,
      any_zero_avx2,
      p1_elements_avx2,
  };
  return &table;
}

}  // namespace plex::simd
