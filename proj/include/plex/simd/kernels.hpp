// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Data-parallel inner loops used by assembly, propagation and expression
// evaluation. Every kernel has a scalar reference implementation; an AVX2
// variant is compiled in a separate translation unit and selected at runtime
// when the CPU supports it. The environment variable PLEX_ISA=scalar forces
// the reference path.

namespace plex::simd {

enum class Isa { scalar, avx2 };

std::string_view isa_name(Isa isa);

/// Raw element-wise element integrals for P1 elements with 2-point Gauss.
/// All arrays have one entry per element; q0/q1 are the two quadrature points.
struct ElementInputs {
  const double* a_q0;
  const double* a_q1;
  const double* a1_q0;
  const double* a1_q1;
  const double* b_q0;
  const double* b_q1;
  const double* c0_q0;
  const double* c0_q1;
};

/// Local 2x2 blocks, k_ij = B(phi_j, phi_i) (row = test function).
struct ElementOutputs {
  double* k00;
  double* k01;
  double* k10;
  double* k11;
};

struct KernelTable {
  Isa isa;

  double (*dot)(const double* x, const double* y, std::size_t n);
  // y = T x for the tridiagonal T given by (lower, diag, upper).
  void (*tridiag_matvec)(const double* lower, const double* diag, const double* upper,
                         const double* x, double* y, std::size_t n);
  // x^T T y.
  double (*tridiag_bilinear)(const double* lower, const double* diag, const double* upper,
                             const double* x, const double* y, std::size_t n);
  // y = alpha x + beta y
  void (*axpby)(double alpha, const double* x, double beta, double* y, std::size_t n);
  void (*scale)(double alpha, double* x, std::size_t n);
  double (*min_value)(const double* x, std::size_t n);
  double (*max_value)(const double* x, std::size_t n);

  // Element-wise arithmetic for batched expression evaluation.
  void (*vadd)(const double* x, const double* y, double* out, std::size_t n);
  void (*vsub)(const double* x, const double* y, double* out, std::size_t n);
  void (*vmul)(const double* x, const double* y, double* out, std::size_t n);
  void (*vdiv)(const double* x, const double* y, double* out, std::size_t n);
  void (*vadd_scalar)(const double* x, double s, double* out, std::size_t n);
  void (*vmul_scalar)(const double* x, double s, double* out, std::size_t n);
  void (*vsub_from_scalar)(double s, const double* x, double* out, std::size_t n);
  void (*vdiv_scalar_by)(double s, const double* x, double* out, std::size_t n);
  void (*vneg)(const double* x, double* out, std::size_t n);
  void (*vabs)(const double* x, double* out, std::size_t n);
  bool (*any_zero)(const double* x, std::size_t n);

  // P1 element integrals; h is the element width, lumped selects row-sum
  // lumping of the zero-order term.
  void (*p1_elements)(const ElementInputs& in, ElementOutputs out, double h, bool lumped,
                      std::size_t n_elements);
};

const KernelTable& scalar_kernels();
/// nullptr when the AVX2 variant is not compiled in.
const KernelTable* avx2_kernels();

bool isa_supported(Isa isa);
/// The table chosen for this process (best supported ISA unless overridden).
const KernelTable& active();
/// Table for a specific ISA; throws if it is not available on this machine.
const KernelTable& kernels_for(Isa isa);

// Span-level conveniences over the active table.

inline double dot(std::span<const double> x, std::span<const double> y) {
  return active().dot(x.data(), y.data(), x.size());
}

inline void axpby(double alpha, std::span<const double> x, double beta, std::span<double> y) {
  active().axpby(alpha, x.data(), beta, y.data(), y.size());
}

inline void scale(double alpha, std::span<double> x) {
  active().scale(alpha, x.data(), x.size());
}

}  // namespace plex::simd
