// Copyright The plex Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <random>
#include <string>
#include <vector>

#include "plex/coefficients.hpp"
#include "plex/fem.hpp"
#include "plex/flow.hpp"

namespace plex::test {

inline std::shared_ptr<const MetricFlow> rotation(std::vector<double> frequencies) {
  MetricFlowSpec spec;
  spec.kind = FlowKind::torus_rotation;
  spec.frequencies = std::move(frequencies);
  return std::make_shared<const MetricFlow>(spec);
}

struct FieldText {
  std::string a = "1";
  std::string a1 = "0";
  std::string b = "0";
  std::string c0 = "0";
  std::string d0_left;
  std::string d0_right;
  BoundaryKind bc = BoundaryKind::dirichlet;
};

inline std::shared_ptr<const CoefficientField> make_field(const FieldText& t,
                                                          std::shared_ptr<const MetricFlow> flow) {
  ProblemCoefficients p;
  p.a = Expression::parse(t.a);
  p.a1 = Expression::parse(t.a1);
  p.b = Expression::parse(t.b);
  p.c0 = Expression::parse(t.c0);
  if (!t.d0_left.empty()) p.d0_left = Expression::parse(t.d0_left);
  if (!t.d0_right.empty()) p.d0_right = Expression::parse(t.d0_right);
  p.bc = t.bc;
  return std::make_shared<const CoefficientField>(std::move(p), std::move(flow));
}

inline std::vector<double> random_vector(std::size_t n, unsigned seed, double lo = -1.0,
                                         double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

}  // namespace plex::test
