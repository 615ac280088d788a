// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace plex {

/// Tridiagonal matrix. lower[i] = T(i+1, i), upper[i] = T(i, i+1); both have
/// n-1 entries.
struct Tridiag {
  std::vector<double> lower;
  std::vector<double> diag;
  std::vector<double> upper;

  Tridiag() = default;
  explicit Tridiag(std::size_t n) : lower(n ? n - 1 : 0), diag(n), upper(n ? n - 1 : 0) {}

  std::size_t size() const { return diag.size(); }

  /// y = T x
  void apply(std::span<const double> x, std::span<double> y) const;
  /// x^T T y
  double bilinear(std::span<const double> x, std::span<const double> y) const;
  /// max |T(i,j) - T(j,i)|
  double max_asymmetry() const;
  /// Dense row-major copy (testing and small dense fallbacks).
  std::vector<double> dense() const;
};

class SingularPivotError : public std::runtime_error {
 public:
  SingularPivotError(const std::string& what, std::size_t row)
      : std::runtime_error(what), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// Solves (alpha M + beta A) x = rhs by the Thomas algorithm without
/// pivoting. work must hold size() entries. x may alias rhs.
void solve_combination(double alpha, const Tridiag& m, double beta, const Tridiag& a,
                       std::span<const double> rhs, std::span<double> x, std::span<double> work);

/// Complex shift version: (alpha M + beta A) x = rhs with complex alpha.
void solve_combination(std::complex<double> alpha, const Tridiag& m, double beta,
                       const Tridiag& a, std::span<const std::complex<double>> rhs,
                       std::span<std::complex<double>> x,
                       std::span<std::complex<double>> work);

/// Solves T x = rhs.
void solve(const Tridiag& t, std::span<const double> rhs, std::span<double> x);

}  // namespace plex
