// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <stdexcept>
#include <vector>

#include "plex/coefficients.hpp"
#include "plex/tridiag.hpp"

namespace plex {

/// Uniform mesh of [x_left, x_right] with n_elements P1 elements.
class Mesh1D {
 public:
  Mesh1D(double x_left, double x_right, std::size_t n_elements);

  double x_left() const { return x_left_; }
  double x_right() const { return x_right_; }
  std::size_t n_elements() const { return n_elements_; }
  double h() const { return h_; }
  double node(std::size_t i) const;
  std::vector<double> nodes() const;
  Interval domain() const { return {x_left_, x_right_}; }

 private:
  double x_left_;
  double x_right_;
  std::size_t n_elements_;
  double h_;
};

/// Global node indices carried as unknowns: interior nodes for Dirichlet,
/// all nodes otherwise.
std::vector<std::size_t> free_nodes(const Mesh1D& mesh, BoundaryKind bc);

/// Mass matrix on the free nodes, consistent (h/6, 4h/6, h/6) or row-sum lumped.
Tridiag assemble_mass(const Mesh1D& mesh, BoundaryKind bc, bool lumped);

class AssemblyError : public std::runtime_error {
 public:
  AssemblyError(const std::string& what, std::size_t element)
      : std::runtime_error(what), element_(element) {}
  std::size_t element() const { return element_; }

 private:
  std::size_t element_;
};

/// Builds A(omega) with u^T A v = B_omega(u, v) under 2-point Gauss quadrature.
/// Keeps the quadrature points and scratch buffers; one instance per thread.
class FormAssembler {
 public:
  /// lumped_c0 applies the mass-lumping rule to the zero-order term so that
  /// a c0 shift by s changes A by exactly -s times the lumped mass matrix.
  FormAssembler(const Mesh1D& mesh, const CoefficientField& field, bool lumped_c0 = false);

  void assemble(const FlowPoint& omega, Tridiag& a);
  Tridiag assemble(const FlowPoint& omega);

  const Mesh1D& mesh() const { return mesh_; }
  const CoefficientField& field() const { return *field_; }
  std::size_t size() const { return free_.size(); }

 private:
  void evaluate(const Expression& e, const FlowPoint& omega, std::span<double> q0,
                std::span<double> q1, bool is_c0);
  [[noreturn]] void locate_failure(const Expression& e, const FlowPoint& omega,
                                   const std::exception& err) const;

  Mesh1D mesh_;
  const CoefficientField* field_;
  bool lumped_c0_;
  std::vector<std::size_t> free_;
  std::vector<double> xq0_, xq1_;
  std::vector<double> aq0_, aq1_, alq0_, alq1_, bq0_, bq1_, cq0_, cq1_;
  std::vector<double> k00_, k01_, k10_, k11_;
  BatchEvaluator scratch_;
};

Tridiag assemble_form(const Mesh1D& mesh, const CoefficientField& field, const FlowPoint& omega,
                      bool lumped_c0 = false);

/// -u^T A u / u^T M u.
double rayleigh_kappa(const Tridiag& m, const Tridiag& a, std::span<const double> u);

/// M-norm sqrt(u^T M u).
double m_norm(const Tridiag& m, std::span<const double> u);

/// Writes "row col value" lines for all stored entries in row-major order.
void write_triplets(std::ostream& os, const Tridiag& t);

}  // namespace plex
