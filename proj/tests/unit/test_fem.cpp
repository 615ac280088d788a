// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "plex/fem.hpp"
#include "support.hpp"

using namespace plex;

namespace {

std::vector<double> interpolate(const Mesh1D& mesh, BoundaryKind bc, double (*f)(double)) {
  std::vector<double> u;
  for (std::size_t i : free_nodes(mesh, bc)) u.push_back(f(mesh.node(i)));
  return u;
}

}  // namespace

TEST_CASE("mesh and free nodes") {
  const Mesh1D m(0.0, 2.0, 4);
  CHECK(m.h() == 0.5);
  CHECK(m.nodes() == std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
  CHECK(free_nodes(m, BoundaryKind::dirichlet) == std::vector<std::size_t>{1, 2, 3});
  CHECK(free_nodes(m, BoundaryKind::neumann).size() == 5);
  CHECK(free_nodes(m, BoundaryKind::robin).size() == 5);
  CHECK_THROWS_AS(Mesh1D(0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(Mesh1D(1.0, 1.0, 4), std::invalid_argument);
}

TEST_CASE("mass matrix examples") {
  const Mesh1D m(0.0, 1.0, 2);
  const Tridiag mc = assemble_mass(m, BoundaryKind::dirichlet, false);
  REQUIRE(mc.size() == 1);
  CHECK(mc.diag[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const Tridiag ml = assemble_mass(m, BoundaryKind::dirichlet, true);
  CHECK(ml.diag[0] == doctest::Approx(0.5).epsilon(1e-15));

  const Mesh1D big(0.0, 1.0, 10);
  const Tridiag mn = assemble_mass(big, BoundaryKind::neumann, false);
  CHECK(mn.diag[5] == doctest::Approx(4.0 * 0.1 / 6.0));
  CHECK(mn.upper[5] == doctest::Approx(0.1 / 6.0));
  CHECK(mn.max_asymmetry() == 0.0);
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto u = test::random_vector(mn.size(), seed);
    CHECK(mn.bilinear(u, u) > 0.0);
    const Tridiag lumped = assemble_mass(big, BoundaryKind::neumann, true);
    CHECK(lumped.bilinear(u, u) > 0.0);
  }
}

TEST_CASE("form matrix examples") {
  const auto flow = test::rotation({1.0});
  const FlowPoint w = flow->make_point({0.3});
  const Mesh1D m2(0.0, 1.0, 2);
  const Tridiag a = assemble_form(m2, *test::make_field({}, flow), w);
  REQUIRE(a.size() == 1);
  CHECK(a.diag[0] == doctest::Approx(4.0).epsilon(1e-15));

  // constant c0 under Neumann: only the zero-order term survives on constants
  const Mesh1D m(0.0, 2.0, 16);
  const auto field = test::make_field({.a = "1 + x^2*cos(2*pi*w1)", .c0 = "1.7", .bc = BoundaryKind::neumann}, flow);
  const Tridiag an = assemble_form(m, *field, w);
  const std::vector<double> one(an.size(), 1.0);
  CHECK(an.bilinear(one, one) == doctest::Approx(-1.7 * 2.0).epsilon(1e-13));

  // Robin ends with d0 = 1 contribute 1 each
  const Mesh1D r(0.0, 1.0, 8);
  const Tridiag ar = assemble_form(
      r, *test::make_field({.d0_left = "1", .d0_right = "1", .bc = BoundaryKind::robin}, flow), w);
  const std::vector<double> one_r(ar.size(), 1.0);
  CHECK(ar.bilinear(one_r, one_r) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("rayleigh kappa examples") {
  Tridiag a(1), m(1);
  a.diag[0] = 4.0;
  m.diag[0] = 1.0 / 3.0;
  const std::vector<double> u = {1.0};
  CHECK(rayleigh_kappa(m, a, u) == doctest::Approx(-12.0).epsilon(1e-15));

  const auto flow = test::rotation({1.0});
  const FlowPoint w = flow->make_point({0.6});
  const Mesh1D mesh(0.0, 1.0, 20);
  const auto field = test::make_field({.a = "2 + sin(x)", .c0 = "-0.4", .bc = BoundaryKind::neumann}, flow);
  const Tridiag A = assemble_form(mesh, *field, w);
  const Tridiag M = assemble_mass(mesh, BoundaryKind::neumann, false);
  const std::vector<double> c(A.size(), 3.0);
  CHECK(rayleigh_kappa(M, A, c) == doctest::Approx(-0.4).epsilon(1e-13));
  auto v = test::random_vector(A.size(), 4);
  const double k1 = rayleigh_kappa(M, A, v);
  for (double& x : v) x *= 7.0;
  CHECK(rayleigh_kappa(M, A, v) == doctest::Approx(k1).epsilon(1e-14));
  const std::vector<double> zero(A.size(), 0.0);
  CHECK_THROWS_AS(rayleigh_kappa(M, A, zero), std::invalid_argument);
}

TEST_CASE("linearity in c0: A(c0 + s) = A(c0) - s M exactly") {
  const auto flow = test::rotation({1.0, std::numbers::sqrt2});
  const FlowPoint w = flow->make_point({0.15, 0.85});
  for (auto bc : {BoundaryKind::dirichlet, BoundaryKind::neumann, BoundaryKind::robin}) {
    for (bool lumped : {false, true}) {
      CAPTURE(static_cast<int>(bc));
      CAPTURE(lumped);
      test::FieldText t{.a = "1 + 0.5*cos(2*pi*w1)", .b = "0.3*x", .c0 = "cos(2*pi*(x + w2))", .bc = bc};
      if (bc == BoundaryKind::robin) t.d0_left = t.d0_right = "0.5";
      const Mesh1D mesh(0.0, 1.0, 40);
      const auto base = test::make_field(t, flow);
      t.c0 = "cos(2*pi*(x + w2)) + 2";
      const auto shifted = test::make_field(t, flow);
      const Tridiag a0 = assemble_form(mesh, *base, w, lumped);
      const Tridiag a1 = assemble_form(mesh, *shifted, w, lumped);
      const Tridiag m = assemble_mass(mesh, bc, lumped);
      double worst = 0.0;
      for (std::size_t i = 0; i < a0.size(); ++i) {
        worst = std::max(worst, std::fabs(a1.diag[i] - (a0.diag[i] - 2.0 * m.diag[i])));
        if (i + 1 < a0.size()) {
          worst = std::max(worst, std::fabs(a1.upper[i] - (a0.upper[i] - 2.0 * m.upper[i])));
          worst = std::max(worst, std::fabs(a1.lower[i] - (a0.lower[i] - 2.0 * m.lower[i])));
        }
      }
      CHECK(worst <= 1e-13);
    }
  }
}

TEST_CASE("symmetric coefficients give a symmetric form") {
  const auto flow = test::rotation({1.0});
  const FlowPoint w = flow->make_point({0.4});
  const Mesh1D mesh(0.0, 1.0, 33);
  const Tridiag sym = assemble_form(
      mesh, *test::make_field({.a = "1 + x*w1", .c0 = "sin(9*x)", .bc = BoundaryKind::neumann}, flow), w);
  CHECK(sym.max_asymmetry() == 0.0);
  const Tridiag adv = assemble_form(
      mesh, *test::make_field({.a = "1", .b = "1", .bc = BoundaryKind::neumann}, flow), w);
  CHECK(adv.max_asymmetry() > 0.1);
}

TEST_CASE("quadrature converges at O(h^2) for a polynomial case") {
  // a = 1 + x, c0 = x, u = x(1-x): B(u,u) = int (1+x)(1-2x)^2 - x^3(1-x)^2 = 1/2 - 1/60
  const auto flow = test::rotation({1.0});
  const FlowPoint w = flow->make_point({0.0});
  const auto field = test::make_field({.a = "1 + x", .c0 = "x"}, flow);
  const double exact = 0.5 - 1.0 / 60.0;
  double prev = 0.0;
  for (std::size_t n : {8u, 16u, 32u, 64u}) {
    const Mesh1D mesh(0.0, 1.0, n);
    const Tridiag a = assemble_form(mesh, *field, w);
    const auto u = interpolate(mesh, BoundaryKind::dirichlet, [](double x) { return x * (1 - x); });
    const double err = std::fabs(a.bilinear(u, u) - exact);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.1));
    prev = err;
  }
}

TEST_CASE("Rayleigh quotient of the sine interpolant tends to -pi^2") {
  const auto flow = test::rotation({1.0});
  const FlowPoint w = flow->make_point({0.0});
  const auto field = test::make_field({}, flow);
  double prev = 0.0;
  for (std::size_t n : {16u, 32u, 64u, 128u}) {
    const Mesh1D mesh(0.0, 1.0, n);
    const auto u = interpolate(mesh, BoundaryKind::dirichlet,
                               [](double x) { return std::sin(std::numbers::pi * x); });
    const double err = std::fabs(rayleigh_kappa(assemble_mass(mesh, BoundaryKind::dirichlet, false),
                                                assemble_form(mesh, *field, w), u) +
                                 std::numbers::pi * std::numbers::pi);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("evaluation failures name the element") {
  const auto flow = test::rotation({1.0});
  const FlowPoint w = flow->make_point({0.0});
  const Mesh1D mesh(0.0, 1.0, 10);
  const auto zero = test::make_field({.c0 = "1/(w1 - w1)"}, flow);
  try {
    assemble_form(mesh, *zero, w);
    FAIL("expected an assembly error");
  } catch (const AssemblyError& e) {
    CHECK(e.element() == 0);
    CHECK(std::string(e.what()).find("element 0") != std::string::npos);
  }
}

TEST_CASE("triplet dump is row-major") {
  Tridiag t(3);
  t.diag = {1, 2, 3};
  t.lower = {4, 5};
  t.upper = {6, 7};
  std::ostringstream os;
  write_triplets(os, t);
  CHECK(os.str() == "0 0 1\n0 1 6\n1 0 4\n1 1 2\n1 2 7\n2 1 5\n2 2 3\n");
}
