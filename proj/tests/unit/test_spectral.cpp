// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

#include "doctest.h"
#include "plex/fem.hpp"
#include "plex/spectral.hpp"
#include "plex/tridiag.hpp"
#include "support.hpp"

using namespace plex;

namespace {

Eigen::MatrixXd to_eigen(const Tridiag& t) {
  const std::size_t n = t.size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    d(i, i) = t.diag[i];
    if (i + 1 < n) {
      d(i, i + 1) = t.upper[i];
      d(i + 1, i) = t.lower[i];
    }
  }
  return d;
}

// Eigenvalues of -A v = lambda M v, descending, from Eigen's dense solver.
Eigen::VectorXd oracle_values(const Tridiag& m, const Tridiag& a) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(-to_eigen(a), to_eigen(m));
  Eigen::VectorXd v = es.eigenvalues().reverse();
  return v;
}

struct Pencil {
  Tridiag m, a;
};

Pencil pencil(const std::string& a, const std::string& c0, BoundaryKind bc, std::size_t n,
              std::vector<double> w = {0.3}, bool lumped = false) {
  const auto flow = test::rotation(std::vector<double>(w.size(), 1.0));
  test::FieldText t{.a = a, .c0 = c0, .bc = bc};
  if (bc == BoundaryKind::robin) t.d0_left = t.d0_right = "0.7";
  const auto field = test::make_field(t, flow);
  const Mesh1D mesh(0.0, 1.0, n);
  return {assemble_mass(mesh, bc, lumped), assemble_form(mesh, *field, flow->make_point(w), lumped)};
}

}  // namespace

TEST_CASE("Thomas solves against dense LU") {
  for (std::size_t n : {1u, 2u, 5u, 40u}) {
    Tridiag m(n), a(n);
    const auto d = test::random_vector(n, 1, 2.0, 3.0);
    const auto o = test::random_vector(n, 2, -0.5, 0.5);
    for (std::size_t i = 0; i < n; ++i) {
      m.diag[i] = 1.0 + 0.1 * i;
      a.diag[i] = d[i];
      if (i + 1 < n) {
        m.lower[i] = m.upper[i] = 0.2;
        a.lower[i] = o[i];
        a.upper[i] = -o[i] * 0.5;
      }
    }
    const auto rhs = test::random_vector(n, 3);
    std::vector<double> x(n), work(n);
    solve_combination(0.7, m, 1.3, a, rhs, x, work);
    const Eigen::MatrixXd k = 0.7 * to_eigen(m) + 1.3 * to_eigen(a);
    const Eigen::VectorXd ref = k.lu().solve(Eigen::Map<const Eigen::VectorXd>(rhs.data(), n));
    for (std::size_t i = 0; i < n; ++i) CHECK(x[i] == doctest::Approx(ref[i]).epsilon(1e-12));

    // complex shift
    const std::complex<double> alpha(0.4, 1.1);
    std::vector<std::complex<double>> zr(n), zx(n), zw(n);
    for (std::size_t i = 0; i < n; ++i) zr[i] = {rhs[i], -rhs[i] * 0.5};
    solve_combination(alpha, m, 1.3, a, zr, zx, zw);
    const Eigen::MatrixXcd kc = alpha * to_eigen(m).cast<std::complex<double>>() +
                                1.3 * to_eigen(a).cast<std::complex<double>>();
    const Eigen::VectorXcd zref = kc.lu().solve(Eigen::Map<const Eigen::VectorXcd>(zr.data(), n));
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(zx[i] - zref[i]) <= 1e-12 * (1 + std::abs(zref[i])));

    // in-place
    std::vector<double> y = rhs;
    solve_combination(0.7, m, 1.3, a, y, y, work);
    CHECK(y == x);
  }
  Tridiag z(2);
  std::vector<double> rhs = {1, 1}, x(2);
  CHECK_THROWS_AS(solve(z, rhs, x), SingularPivotError);
}

TEST_CASE("principal eigenvalue examples") {
  const Pencil neu = pencil("1 + 0.5*sin(3*x)", "0", BoundaryKind::neumann, 80);
  const EigenResult r = principal_eigen(neu.m, neu.a);
  CHECK(std::fabs(r.lambda_princ) <= 1e-10);
  const double c = r.v.front();
  for (double v : r.v) CHECK(v == doctest::Approx(c).epsilon(1e-8));

  const Pencil dir = pencil("1", "0", BoundaryKind::dirichlet, 200);
  const EigenResult d = principal_eigen(dir.m, dir.a);
  CHECK(std::fabs(d.lambda_princ + std::numbers::pi * std::numbers::pi) <= 1e-3);
  CHECK(d.residual <= 1e-10);
  CHECK(std::fabs(dir.m.bilinear(d.v, d.v) - 1.0) <= 1e-12);
  CHECK(*std::min_element(d.v.begin(), d.v.end()) > 0.0);

  const Pencil shifted = pencil("1", "2", BoundaryKind::dirichlet, 200);
  const EigenResult s = principal_eigen(shifted.m, shifted.a);
  CHECK(s.lambda_princ - d.lambda_princ == doctest::Approx(2.0).epsilon(1e-9));
  double dv = 0.0;
  for (std::size_t i = 0; i < s.v.size(); ++i) dv = std::max(dv, std::fabs(s.v[i] - d.v[i]));
  CHECK(dv <= 1e-7);
}

TEST_CASE("principal eigenvalue against the Eigen oracle (property)") {
  const char* as[] = {"1", "1 + 0.5*cos(2*pi*(x + w1))", "2 + sin(5*x)", "0.3 + x^2"};
  const char* cs[] = {"0", "3*cos(2*pi*(x - w1))", "-5*x", "10*sin(7*x)^2"};
  for (auto bc : {BoundaryKind::dirichlet, BoundaryKind::neumann, BoundaryKind::robin})
    for (const char* a : as)
      for (const char* c : cs)
        for (std::size_t n : {5u, 30u, 90u})
          for (bool lumped : {false, true}) {
            CAPTURE(a);
            CAPTURE(c);
            CAPTURE(n);
            const Pencil p = pencil(a, c, bc, n, {0.37}, lumped);
            const EigenResult r = principal_eigen(p.m, p.a);
            const Eigen::VectorXd ref = oracle_values(p.m, p.a);
            CHECK(r.lambda_princ == doctest::Approx(ref[0]).epsilon(1e-9).scale(1.0));
            CHECK(*std::min_element(r.v.begin(), r.v.end()) > 0.0);
            const DenseEigen de = dense_pencil_eigen(p.m, p.a);
            for (Eigen::Index k = 0; k < ref.size(); ++k)
              CHECK(de.values[k] == doctest::Approx(ref[k]).epsilon(1e-9).scale(1.0));
            CHECK(count_above(p.m, p.a, ref[0] - 1e-6) >= 1);
            CHECK(count_above(p.m, p.a, ref[0] + 1e-6) == 0);
            if (ref.size() > 2)
              CHECK(count_above(p.m, p.a, 0.5 * (ref[1] + ref[2])) == 2);
          }
}

TEST_CASE("Rayleigh bound examples and variational property") {
  const Pencil two = pencil("1", "0", BoundaryKind::dirichlet, 2);
  const std::vector<double> one = {1.0};
  const RayleighBound b2 = check_rayleigh_bound(two.m, two.a, one);
  CHECK(b2.lambda == doctest::Approx(-12.0).epsilon(1e-12));
  CHECK(b2.kappa_u == doctest::Approx(-12.0).epsilon(1e-14));
  CHECK(std::fabs(b2.gap) <= 1e-12);

  const Pencil p = pencil("1 + 0.5*cos(2*pi*(x + w1))", "3*cos(2*pi*(x - w1))", BoundaryKind::neumann, 60);
  const EigenResult r = principal_eigen(p.m, p.a);
  CHECK(std::fabs(check_rayleigh_bound(p.m, p.a, r.v).gap) <= 1e-12);
  for (unsigned seed = 0; seed < 200; ++seed) {
    const auto u = test::random_vector(p.m.size(), seed, seed % 2 ? 0.0 : -1.0, 1.0);
    const RayleighBound b = check_rayleigh_bound(p.m, p.a, u);
    CHECK(b.gap >= -1e-12);
    CHECK(b.gap > 1e-8);  // random vectors are not eigenvectors
    CHECK(rayleigh_kappa(p.m, p.a, u) <= r.lambda_princ + 1e-12);
  }
}

TEST_CASE("eigenvalue converges to -pi^2 at second order") {
  double prev = 0.0;
  for (std::size_t n : {25u, 50u, 100u, 200u}) {
    const Pencil p = pencil("1", "0", BoundaryKind::dirichlet, n);
    const double err = std::fabs(principal_eigen(p.m, p.a).lambda_princ + std::numbers::pi * std::numbers::pi);
    if (prev > 0.0) CHECK(prev / err == doctest::Approx(4.0).epsilon(0.05));
    prev = err;
  }
}

TEST_CASE("non-symmetric forms are rejected with the asymmetry") {
  const auto flow = test::rotation({1.0});
  const Mesh1D mesh(0.0, 1.0, 20);
  const auto field = test::make_field({.b = "1", .bc = BoundaryKind::neumann}, flow);
  const Tridiag a = assemble_form(mesh, *field, flow->make_point({0.0}));
  const Tridiag m = assemble_mass(mesh, BoundaryKind::neumann, false);
  try {
    principal_eigen(m, a);
    FAIL("expected rejection");
  } catch (const AsymmetricFormError& e) {
    CHECK(e.asymmetry() == doctest::Approx(a.max_asymmetry()));
  }
}

TEST_CASE("inverse iteration on a pencil where the bracket end is a zero pivot") {
  // Captured from an implicit Euler orbit: with the Rayleigh quotient as lower
  // bound, the shift at the bracket end made the last Thomas pivot exactly 0.
  std::ifstream in(PLEX_TEST_DATA_DIR "/pinned_eigen_pencil.txt");
  REQUIRE(in);
  std::size_t n = 0;
  double kappa = 0.0;
  in >> n >> kappa;
  Tridiag m(n), a(n);
  for (std::size_t i = 0; i < n; ++i) in >> m.diag[i] >> a.diag[i];
  for (std::size_t i = 0; i + 1 < n; ++i) {
    in >> m.lower[i] >> a.lower[i];
    m.upper[i] = m.lower[i];
    a.upper[i] = a.lower[i];
  }
  REQUIRE(in);
  EigenOptions eo;
  eo.lower_bound = kappa;
  const EigenResult e = principal_eigen(m, a, eo);
  CHECK(e.residual <= 1e-10);
  CHECK(e.lambda_princ >= kappa - 1e-12);
  CHECK(count_above(m, a, e.lambda_princ + 1e-8) == 0);
  CHECK(count_above(m, a, e.lambda_princ - 1e-8) == 1);
}
