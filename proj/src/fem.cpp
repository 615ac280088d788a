// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include "plex/fem.hpp"

#include <cmath>
#include <iomanip>
#include <limits>

#include "plex/simd/kernels.hpp"

namespace plex {
namespace {

constexpr double kGaussLo = 0.21132486540518711775;
constexpr double kGaussHi = 0.78867513459481288225;

}  // namespace

Mesh1D::Mesh1D(double x_left, double x_right, std::size_t n_elements)
    : x_left_(x_left), x_right_(x_right), n_elements_(n_elements) {
  if (!(x_left < x_right)) throw std::invalid_argument("mesh needs x_left < x_right");
  if (n_elements < 2) throw std::invalid_argument("mesh needs at least 2 elements");
  h_ = (x_right - x_left) / static_cast<double>(n_elements);
}

double Mesh1D::node(std::size_t i) const {
  if (i == n_elements_) return x_right_;
  return x_left_ + h_ * static_cast<double>(i);
}

std::vector<double> Mesh1D::nodes() const {
  std::vector<double> x(n_elements_ + 1);
  for (std::size_t i = 0; i <= n_elements_; ++i) x[i] = node(i);
  return x;
}

std::vector<std::size_t> free_nodes(const Mesh1D& mesh, BoundaryKind bc) {
  std::vector<std::size_t> out;
  const std::size_t first = bc == BoundaryKind::dirichlet ? 1 : 0;
  const std::size_t last = bc == BoundaryKind::dirichlet ? mesh.n_elements() - 1 : mesh.n_elements();
  for (std::size_t i = first; i <= last; ++i) out.push_back(i);
  return out;
}

namespace {

// Adds element-local blocks into the free-node tridiagonal matrix. Element e
// couples global nodes e and e+1; offset maps global to free indices.
void scatter(std::size_t n_elements, std::size_t offset, std::size_t n_free, const double* k00,
             const double* k01, const double* k10, const double* k11, Tridiag& t) {
  std::fill(t.diag.begin(), t.diag.end(), 0.0);
  std::fill(t.lower.begin(), t.lower.end(), 0.0);
  std::fill(t.upper.begin(), t.upper.end(), 0.0);
  for (std::size_t e = 0; e < n_elements; ++e) {
    const long i = static_cast<long>(e) - static_cast<long>(offset);
    const long j = i + 1;
    const bool iv = i >= 0 && i < static_cast<long>(n_free);
    const bool jv = j >= 0 && j < static_cast<long>(n_free);
    if (iv) t.diag[i] += k00[e];
    if (jv) t.diag[j] += k11[e];
    if (iv && jv) {
      t.upper[i] += k01[e];
      t.lower[i] += k10[e];
    }
  }
}

}  // namespace

Tridiag assemble_mass(const Mesh1D& mesh, BoundaryKind bc, bool lumped) {
  const std::size_t ne = mesh.n_elements();
  const double h = mesh.h();
  std::vector<double> k00(ne), k01(ne), k10(ne), k11(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    if (lumped) {
      k00[e] = k11[e] = h / 2.0;
      k01[e] = k10[e] = 0.0;
    } else {
      k00[e] = k11[e] = h / 3.0;
      k01[e] = k10[e] = h / 6.0;
    }
  }
  const auto fn = free_nodes(mesh, bc);
  Tridiag m(fn.size());
  scatter(ne, fn.front(), fn.size(), k00.data(), k01.data(), k10.data(), k11.data(), m);
  return m;
}

FormAssembler::FormAssembler(const Mesh1D& mesh, const CoefficientField& field, bool lumped_c0)
    : mesh_(mesh), field_(&field), lumped_c0_(lumped_c0),
      free_(free_nodes(mesh, field.coefficients().bc)) {
  const std::size_t ne = mesh.n_elements();
  xq0_.resize(ne);
  xq1_.resize(ne);
  for (std::size_t e = 0; e < ne; ++e) {
    const double xl = mesh.node(e);
    xq0_[e] = xl + kGaussLo * mesh.h();
    xq1_[e] = xl + kGaussHi * mesh.h();
  }
  for (auto* v : {&aq0_, &aq1_, &alq0_, &alq1_, &bq0_, &bq1_, &cq0_, &cq1_, &k00_, &k01_, &k10_,
                  &k11_})
    v->resize(ne);
}

void FormAssembler::locate_failure(const Expression& e, const FlowPoint& omega,
                                   const std::exception& err) const {
  for (std::size_t el = 0; el < mesh_.n_elements(); ++el) {
    for (double x : {xq0_[el], xq1_[el]}) {
      try {
        field_->eval(e, omega, x);
      } catch (const std::exception& inner) {
        throw AssemblyError("coefficient '" + e.text() + "' failed on element " +
                                std::to_string(el) + ": " + inner.what(),
                            el);
      }
    }
  }
  throw AssemblyError("coefficient '" + e.text() + "' failed: " + err.what(), 0);
}

void FormAssembler::evaluate(const Expression& e, const FlowPoint& omega, std::span<double> q0,
                             std::span<double> q1, bool is_c0) {
  try {
    if (is_c0) {
      field_->c0_batch(omega, xq0_, q0, scratch_);
      field_->c0_batch(omega, xq1_, q1, scratch_);
    } else {
      field_->eval_batch(e, omega, xq0_, q0, scratch_);
      field_->eval_batch(e, omega, xq1_, q1, scratch_);
    }
  } catch (const EvalError& err) {
    locate_failure(e, omega, err);
  }
}

void FormAssembler::assemble(const FlowPoint& omega, Tridiag& a) {
  const auto& c = field_->coefficients();
  evaluate(c.a, omega, aq0_, aq1_, false);
  evaluate(c.a1, omega, alq0_, alq1_, false);
  evaluate(c.b, omega, bq0_, bq1_, false);
  evaluate(c.c0, omega, cq0_, cq1_, true);

  const simd::ElementInputs in{aq0_.data(), aq1_.data(), alq0_.data(), alq1_.data(),
                               bq0_.data(), bq1_.data(), cq0_.data(), cq1_.data()};
  const simd::ElementOutputs out{k00_.data(), k01_.data(), k10_.data(), k11_.data()};
  simd::active().p1_elements(in, out, mesh_.h(), lumped_c0_, mesh_.n_elements());

  if (a.size() != free_.size()) a = Tridiag(free_.size());
  scatter(mesh_.n_elements(), free_.front(), free_.size(), k00_.data(), k01_.data(),
          k10_.data(), k11_.data(), a);

  if (c.bc == BoundaryKind::robin) {
    a.diag.front() += field_->d0_left(omega, mesh_.x_left());
    a.diag.back() += field_->d0_right(omega, mesh_.x_right());
  }
}

Tridiag FormAssembler::assemble(const FlowPoint& omega) {
  Tridiag a(free_.size());
  assemble(omega, a);
  return a;
}

Tridiag assemble_form(const Mesh1D& mesh, const CoefficientField& field, const FlowPoint& omega,
                      bool lumped_c0) {
  FormAssembler asmb(mesh, field, lumped_c0);
  return asmb.assemble(omega);
}

double m_norm(const Tridiag& m, std::span<const double> u) { return std::sqrt(m.bilinear(u, u)); }

double rayleigh_kappa(const Tridiag& m, const Tridiag& a, std::span<const double> u) {
  const double mass = m.bilinear(u, u);
  if (!(mass > 0.0)) throw std::invalid_argument("rayleigh quotient of a zero vector");
  return -a.bilinear(u, u) / mass;
}

void write_triplets(std::ostream& os, const Tridiag& t) {
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  const std::size_t n = t.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) os << i << ' ' << i - 1 << ' ' << t.lower[i - 1] << '\n';
    os << i << ' ' << i << ' ' << t.diag[i] << '\n';
    if (i + 1 < n) os << i << ' ' << i + 1 << ' ' << t.upper[i] << '\n';
  }
  os.precision(old);
}

}  // namespace plex
