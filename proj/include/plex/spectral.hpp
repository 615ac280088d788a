// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "plex/tridiag.hpp"

namespace plex {

/// Principal pair of the pencil -A v = lambda M v.
struct EigenResult {
  double lambda_princ = 0.0;
  std::vector<double> v;  // v^T M v = 1, largest-magnitude entry positive
  int iterations = 0;
  double residual = 0.0;  // ||A v + lambda M v|| / ((||A|| + |lambda| ||M||) ||v||)
};

struct EigenOptions {
  double tol = 1e-10;
  int max_iter = 100;
  /// Known lower bound for lambda_princ (e.g. a Rayleigh quotient); NaN to
  /// use the quotient of the constant vector.
  double lower_bound = std::nan("");
  /// Problems up to this size use the dense Jacobi solver.
  std::size_t dense_limit = 64;
};

class AsymmetricFormError : public std::invalid_argument {
 public:
  AsymmetricFormError(const std::string& what, double asymmetry)
      : std::invalid_argument(what), asymmetry_(asymmetry) {}
  double asymmetry() const { return asymmetry_; }

 private:
  double asymmetry_;
};

class EigenConvergenceError : public std::runtime_error {
 public:
  EigenConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

EigenResult principal_eigen(const Tridiag& m, const Tridiag& a, const EigenOptions& opts = {});

/// All eigenvalues of -A v = lambda M v in descending order, by cyclic Jacobi
/// on L^-1 (-A) L^-T with M = L L^T. Symmetric A only; O(n^3).
struct DenseEigen {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // M-orthonormal, same order
};
DenseEigen dense_pencil_eigen(const Tridiag& m, const Tridiag& a);

/// Number of pencil eigenvalues strictly greater than mu (Sturm count of A + mu M).
std::size_t count_above(const Tridiag& m, const Tridiag& a, double mu);

struct RayleighBound {
  double kappa_u = 0.0;
  double lambda = 0.0;
  double gap = 0.0;  // lambda - kappa_u, nonnegative up to round-off
};

RayleighBound check_rayleigh_bound(const Tridiag& m, const Tridiag& a, std::span<const double> u,
                                   const EigenOptions& opts = {});

}  // namespace plex
