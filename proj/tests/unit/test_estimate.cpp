// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <vector>

#include "doctest.h"
#include "plex/estimate.hpp"
#include "plex/spectral.hpp"
#include "support.hpp"

using namespace plex;

namespace {

Propagator make(const test::FieldText& t, std::shared_ptr<const MetricFlow> flow, std::size_t n,
                double dt = 1e-3, TimeScheme method = TimeScheme::radau5) {
  SchemeConfig s;
  s.method = method;
  s.dt = dt;
  return Propagator(Mesh1D(0.0, 1.0, n), test::make_field(t, std::move(flow)), s);
}

const test::FieldText kAutonomous{.a = "1 + 0.3*sin(2*pi*x)", .c0 = "2*x"};

double principal_at(Propagator& p, const FlowPoint& w) {
  p.prepare(w, 0);
  return principal_eigen(p.mass(), p.form()).lambda_princ;
}

}  // namespace

TEST_CASE("block_estimate") {
  const std::vector<double> m{1.0, 2.0, 3.0, 4.0};
  const BlockEstimate b = block_estimate(m);
  CHECK(b.blocks == 4);
  CHECK(b.mean == doctest::Approx(2.5));
  CHECK(b.stderr_ == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  const std::vector<double> one{7.0};
  CHECK(block_estimate(one).stderr_ == 0.0);
  CHECK(block_estimate({}).blocks == 0);
}

TEST_CASE("block layout") {
  const auto flow = test::rotation({1.0});
  Propagator p = make({}, flow, 10, 0.01);
  const BlockLayout l = block_layout(p, 10.0, 2.0, 0.0);
  CHECK(l.total_steps == 1000);
  CHECK(l.burn_steps == 200);
  CHECK(l.block_steps == 40);
  CHECK(l.n_blocks == 20);
  CHECK(block_layout(p, 10.0, 2.0, 1.0).n_blocks == 8);
  CHECK_THROWS_AS(block_layout(p, 2.0, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(block_layout(p, 2.0, -1.0, 0.0), std::invalid_argument);
}

TEST_CASE("autonomous problem: E1, E2, E3 and the eigenvalue coincide") {
  const auto flow = test::rotation({1.0});
  const FlowPoint w = flow->make_point({0.0});
  Propagator p = make(kAutonomous, flow, 50);
  const double lambda = principal_at(p, w);

  const DirectEstimate d = lyapunov_direct(p, w, p.positive_start(), 5.0, 1.0);
  CHECK(std::fabs(d.E1 - lambda) <= 1e-6);
  CHECK(d.stderr_ <= 1e-8);
  CHECK_FALSE(d.possibly_divergent);

  KappaOptions o;
  o.T = 5.0;
  o.burn_in = 1.0;
  o.T_spin = 1.0;
  o.with_upper_bound = true;
  const KappaEstimate k = lyapunov_kappa(p, w, o);
  CHECK(std::fabs(k.E2 - lambda) <= 1e-6);
  REQUIRE(k.E3.has_value());
  CHECK(std::fabs(*k.E3 - lambda) <= 1e-9);
  CHECK(k.min_rayleigh_gap >= -1e-10);
  CHECK(k.spin.converged);
}

TEST_CASE("spatially constant c0 under Neumann: E2 is the orbit average of c0") {
  // The constant vector is an eigenvector of every A(omega), so kappa = c0(theta_t omega).
  const double nu = std::numbers::sqrt2;
  const auto flow = test::rotation({1.0, nu});
  const FlowPoint w = flow->make_point({0.3, 0.6});
  const test::FieldText t{.a = "1 + 0.5*cos(2*pi*w1)*x", .c0 = "sin(2*pi*w2)", .bc = BoundaryKind::neumann};
  Propagator p = make(t, flow, 30);
  const double T = 10.0, burn = 1.0;
  const double pi2 = 2.0 * std::numbers::pi;
  const double exact =
      (std::cos(pi2 * (0.6 + nu * burn)) - std::cos(pi2 * (0.6 + nu * T))) / (pi2 * nu) / (T - burn);

  KappaOptions o;
  o.T = T;
  o.burn_in = burn;
  o.T_spin = 1.0;
  o.with_upper_bound = true;
  const KappaEstimate k = lyapunov_kappa(p, w, o);
  CHECK(std::fabs(k.E2 - exact) <= 1e-5);
  REQUIRE(k.E3.has_value());
  CHECK(std::fabs(*k.E3 - exact) <= 1e-5);
  const DirectEstimate d = lyapunov_direct(p, w, p.positive_start(), T, burn);
  CHECK(std::fabs(d.E1 - exact) <= 1e-5);
}

TEST_CASE("upper bound dominates the kappa average") {
  const auto flow = test::rotation({1.0, std::numbers::sqrt2});
  const FlowPoint w = flow->make_point({0.1, 0.8});
  const test::FieldText t{.a = "1 + 0.5*cos(2*pi*w1)*sin(pi*x)^2",
                          .c0 = "2*sin(2*pi*w2) + cos(2*pi*(x + w1))", .bc = BoundaryKind::neumann};
  Propagator p = make(t, flow, 40, 2e-3);
  KappaOptions o;
  o.T = 6.0;
  o.burn_in = 1.0;
  o.T_spin = 2.0;
  o.with_upper_bound = true;
  const KappaEstimate k = lyapunov_kappa(p, w, o);
  REQUIRE(k.E3.has_value());
  CHECK(k.E2 <= *k.E3 + 1e-8);
  CHECK(k.min_rayleigh_gap >= -1e-10);

  const UpperBoundEstimate orbit = upper_bound(p, UpperBoundMode::orbit, w, 6.0, 1.0, 0.0, 0, 0, 1);
  CHECK(orbit.E3 == doctest::Approx(*k.E3).epsilon(1e-12));
}

TEST_CASE("upper bound for a mean-zero constant c0 is close to 0") {
  const auto flow = test::rotation({1.0});
  const FlowPoint w = flow->make_point({0.0});
  Propagator p = make({.c0 = "sin(2*pi*w1)", .bc = BoundaryKind::neumann}, flow, 20, 1e-2);
  const UpperBoundEstimate orbit = upper_bound(p, UpperBoundMode::orbit, w, 5.0, 0.0, 0.0, 0, 0, 1);
  CHECK(std::fabs(orbit.E3) <= 1e-12);
  const UpperBoundEstimate mc = upper_bound(p, UpperBoundMode::mc, w, 5.0, 0.0, 0.0, 4000, 11, 1);
  CHECK(std::fabs(mc.E3) <= 4.0 * mc.stderr_);
  CHECK(mc.samples == 4000);
}

TEST_CASE("non-symmetric problems have no upper bound") {
  const auto flow = test::rotation({1.0});
  Propagator p = make({.b = "1"}, flow, 20);
  KappaOptions o;
  o.T = 1.0;
  o.T_spin = 0.5;
  o.with_upper_bound = true;
  CHECK_THROWS_WITH_AS(lyapunov_kappa(p, flow->make_point({0.0}), o),
                       "upper bound undefined: non-symmetric", NonSymmetricError);
  CHECK_THROWS_AS(upper_bound(p, UpperBoundMode::orbit, flow->make_point({0.0}), 1.0, 0.0, 0.0, 0, 0, 1),
                  NonSymmetricError);
}

TEST_CASE("Monte-Carlo ln rho_1 in the autonomous case") {
  const auto flow = test::rotation({1.0});
  Propagator p = make(kAutonomous, flow, 30, 2e-3);
  const double lambda = principal_at(p, flow->make_point({0.0}));
  const MonteCarloEstimate mc = lnrho1_mc(p, 8, 3, 1.0, 1);
  CHECK(mc.used == 8);
  CHECK(mc.dropped == 0);
  CHECK(mc.stderr_ <= 1e-12);
  CHECK(std::fabs(mc.mean - lambda) <= 1e-8);
  CHECK_THROWS_AS(lnrho1_mc(p, 1, 3, 1.0, 1), std::invalid_argument);
}

TEST_CASE("parallel work is deterministic in the thread count") {
  const auto flow = test::rotation({1.0, std::numbers::sqrt2});
  const test::FieldText t{.a = "1 + 0.5*cos(2*pi*w1)", .c0 = "sin(2*pi*w2) + x", .bc = BoundaryKind::neumann};
  Propagator p = make(t, flow, 20, 5e-3);
  const MonteCarloEstimate a = lnrho1_mc(p, 12, 9, 3.0, 1);
  const MonteCarloEstimate b = lnrho1_mc(p, 12, 9, 3.0, 3);
  CHECK(a.used == 12);
  REQUIRE(a.samples.size() == b.samples.size());
  for (std::size_t i = 0; i < a.samples.size(); ++i) CHECK(a.samples[i] == b.samples[i]);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("parallel_for covers every index once and rethrows the first failure") {
  std::vector<std::atomic<int>> hits(50);
  parallel_for(50, 4, [&](std::size_t i, unsigned) { hits[i]++; });
  for (const auto& h : hits) CHECK(h.load() == 1);
  CHECK_THROWS_WITH(parallel_for(20, 3,
                                 [](std::size_t i, unsigned) {
                                   if (i == 5 || i == 17) throw std::runtime_error(std::to_string(i));
                                 }),
                    "5");
  CHECK(worker_count(4, 2) == 2);
  CHECK(worker_count(1, 100) == 1);
  CHECK(worker_count(0, 100) >= 1);
}

TEST_CASE("operator norm rates") {
  const auto flow = test::rotation({1.0});
  const FlowPoint w = flow->make_point({0.0});
  Propagator p = make(kAutonomous, flow, 40);

  const OperatorNormRate one = operator_norm_rate(p, w, 3.0, 1, 1.0);
  const DirectEstimate d = lyapunov_direct(p, w, p.positive_start(), 3.0, 1.0);
  REQUIRE(one.rates.size() == 1);
  CHECK(std::fabs(one.rates[0] - d.E1) <= 1e-12);

  p.prepare(w, 0);
  const DenseEigen dense = dense_pencil_eigen(p.mass(), p.form());
  const OperatorNormRate three = operator_norm_rate(p, w, 3.0, 3, 1.0);
  REQUIRE(three.rates.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::fabs(three.rates[i] - dense.values[i]) <= 1e-6);
  CHECK(three.rates[0] - three.rates[1] >= dense.values[0] - dense.values[1] - 1e-6);

  auto sign_changing = test::random_vector(p.size(), 4);
  const OperatorNormRate s = operator_norm_rate(p, w, 3.0, 1, 1.0, {sign_changing});
  CHECK(s.rates[0] <= d.E1 + 1e-4);

  CHECK_THROWS_AS(operator_norm_rate(p, w, 3.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(operator_norm_rate(p, w, 3.0, p.size() + 1), std::invalid_argument);
}

TEST_CASE("log-norm identity residual shrinks like dt^2") {
  const auto flow = test::rotation({1.0, std::numbers::sqrt2});
  const FlowPoint w = flow->make_point({0.1, 0.8});
  const test::FieldText t{.a = "1 + 0.5*cos(2*pi*w1)*sin(pi*x)^2",
                          .c0 = "2*sin(2*pi*w2) + cos(2*pi*(x + w1))", .bc = BoundaryKind::neumann};
  KappaOptions o;
  o.T = 4.0;
  o.burn_in = 0.0;
  o.T_spin = 2.0;
  Propagator coarse = make(t, flow, 40, 2e-3);
  Propagator fine = make(t, flow, 40, 1e-3);
  const double r1 = lyapunov_kappa(coarse, w, o).identity_residual_per_time;
  const double r2 = lyapunov_kappa(fine, w, o).identity_residual_per_time;
  CHECK(r2 > 0.0);
  CHECK(r1 / r2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("direct estimate is independent of the positive start") {
  const auto flow = test::rotation({1.0, std::numbers::sqrt2});
  const FlowPoint w = flow->make_point({0.1, 0.8});
  const test::FieldText t{.a = "1", .c0 = "sin(2*pi*w2) + cos(2*pi*(x + w1))", .bc = BoundaryKind::neumann};
  Propagator p = make(t, flow, 30, 2e-3);
  const double e_a = lyapunov_direct(p, w, p.positive_start(), 10.0, 2.0).E1;
  const double e_b = lyapunov_direct(p, w, test::random_vector(p.size(), 2, 0.1, 1.0), 10.0, 2.0).E1;
  CHECK(std::fabs(e_a - e_b) <= 1e-6);
}
