// Copyright 2026 The qforecast Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "qforecast/optimize.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

namespace opt = qforecast::optimize;
using opt::Vector;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

opt::Objective rosenbrock() {
  opt::Objective o;
  o.evaluate = [](const Vector& x) { return 100 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1 - x[0], 2); };
  o.gradient = [](const Vector& x) {
    return vec({-400 * x[0] * (x[1] - x[0] * x[0]) - 2 * (1 - x[0]), 200 * (x[1] - x[0] * x[0])});
  };
  return o;
}

struct Quadratic {
  Eigen::MatrixXd h;
  Vector c;
  opt::Objective objective() const {
    opt::Objective o;
    o.evaluate = [this](const Vector& x) { return 0.5 * (x - c).dot(h * (x - c)); };
    o.gradient = [this](const Vector& x) -> Vector { return h * (x - c); };
    return o;
  }
};

Quadratic random_quadratic(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = g(rng);
  Quadratic q;
  q.h = m * m.transpose() / n + Eigen::MatrixXd::Identity(n, n);
  q.c.resize(n);
  for (int i = 0; i < n; ++i) q.c[i] = g(rng);
  return q;
}

void expect_running_minimum_non_increasing(const opt::OptimResult& r) {
  const auto m = r.trace.running_minimum();
  for (std::size_t i = 1; i < m.size(); ++i) EXPECT_LE(m[i], m[i - 1]);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : r.trace.entries) best = std::min(best, e.value);
  EXPECT_EQ(r.f_best, best);
}

}  // namespace

TEST(DerivativeFree, OneDimensionalParabola) {
  opt::Objective o;
  o.evaluate = [](const Vector& x) { return std::pow(x[0] - 3, 2); };
  const auto r = opt::minimize_derivative_free(o, vec({0}), {});
  EXPECT_NEAR(r.x_best[0], 3.0, 1e-4);
  EXPECT_TRUE(r.converged);
  expect_running_minimum_non_increasing(r);
}

TEST(DerivativeFree, AnisotropicBowl) {
  opt::Objective o;
  o.evaluate = [](const Vector& x) { return x[0] * x[0] + 10 * x[1] * x[1]; };
  const auto r = opt::minimize_derivative_free(o, vec({5, 5}), {});
  EXPECT_LE(r.x_best.norm(), 1e-3);
  expect_running_minimum_non_increasing(r);
}

TEST(DerivativeFree, RespectsBudget) {
  opt::Objective o;
  o.evaluate = [](const Vector& x) { return x.squaredNorm(); };
  opt::OptimOptions options;
  options.max_iters = 7;
  const auto r = opt::minimize_derivative_free(o, vec({1, 2, 3}), options);
  EXPECT_LE(r.trace.size(), 7u);
  EXPECT_EQ(r.evaluations, static_cast<int>(r.trace.size()));
  EXPECT_FALSE(r.converged);
}

TEST(DerivativeFree, RejectsNonFiniteStart) {
  opt::Objective o;
  o.evaluate = [](const Vector&) { return std::numeric_limits<double>::quiet_NaN(); };
  EXPECT_THROW(opt::minimize_derivative_free(o, vec({0}), {}), std::domain_error);
}

TEST(QuasiNewton, ShiftedQuadraticFast) {
  const Vector c = vec({1.5, -2, 0.25});
  opt::Objective o;
  o.evaluate = [&](const Vector& x) { return (x - c).squaredNorm(); };
  o.gradient = [&](const Vector& x) -> Vector { return 2 * (x - c); };
  const auto r = opt::minimize_quasi_newton(o, vec({10, 10, -10}), {});
  EXPECT_LE((r.x_best - c).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_LE(r.evaluations, 50);
}

TEST(QuasiNewton, Rosenbrock) {
  const auto r = opt::minimize_quasi_newton(rosenbrock(), vec({-1.2, 1}), {});
  EXPECT_LE(r.f_best, 1e-6);
  expect_running_minimum_non_increasing(r);
}

TEST(QuasiNewton, BoundsActiveAtMinimum) {
  // Unconstrained minimum (1, 1) lies outside x0 <= 0.5.
  opt::OptimOptions options;
  options.bounds = opt::Bounds{vec({-2, -2}), vec({0.5, 2})};
  const auto o = rosenbrock();
  const auto r = opt::minimize_quasi_newton(o, vec({-1.2, 1}), options);
  EXPECT_NEAR(r.x_best[0], 0.5, 1e-8);
  // KKT at an upper bound: the gradient component points outward (negative).
  const Vector g = o.gradient(r.x_best);
  EXPECT_LT(g[0], 0.0);
  EXPECT_NEAR(g[1], 0.0, 1e-4);
  EXPECT_NEAR(r.x_best[1], 0.25, 1e-5);
}

TEST(QuasiNewton, RequiresGradient) {
  opt::Objective o;
  o.evaluate = [](const Vector& x) { return x.squaredNorm(); };
  EXPECT_THROW(opt::minimize_quasi_newton(o, vec({1}), {}), std::invalid_argument);
}

TEST(BothMethods, TenDimensionalConvexQuadratic) {
  const Quadratic q = random_quadratic(10, 2024);
  const auto o = q.objective();
  opt::OptimOptions options;
  options.max_iters = 2000;
  for (opt::Method m : {opt::Method::cobyla, opt::Method::lbfgs}) {
    const auto r = opt::minimize(m, o, Vector::Zero(10), options);
    EXPECT_LE(r.evaluations, 2000);
    EXPECT_LE(o.gradient(r.x_best).norm(), 1e-4) << opt::method_name(m);
  }
}

TEST(BothMethods, Deterministic) {
  const Quadratic q = random_quadratic(4, 1);
  const auto o = q.objective();
  for (opt::Method m : {opt::Method::cobyla, opt::Method::lbfgs}) {
    const auto a = opt::minimize(m, o, Vector::Ones(4), {});
    const auto b = opt::minimize(m, o, Vector::Ones(4), {});
    ASSERT_EQ(a.trace.size(), b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) EXPECT_EQ(a.trace.entries[i].value, b.trace.entries[i].value);
    EXPECT_EQ(a.x_best, b.x_best);
  }
}

TEST(BothMethods, BestSeenIsNeverWorseThanAnyEvaluation) {
  std::vector<std::pair<Vector, double>> seen;
  opt::Objective o = rosenbrock();
  const auto inner = o.evaluate;
  o.evaluate = [&](const Vector& x) {
    const double v = inner(x);
    seen.emplace_back(x, v);
    return v;
  };
  for (opt::Method m : {opt::Method::cobyla, opt::Method::lbfgs}) {
    seen.clear();
    opt::OptimOptions options;
    options.max_iters = 200;
    const auto r = opt::minimize(m, o, vec({-1.2, 1}), options);
    for (const auto& [x, v] : seen) EXPECT_LE(r.f_best, v);
    EXPECT_EQ(inner(r.x_best), r.f_best);
  }
}

TEST(Methods, NamesRoundTrip) {
  EXPECT_EQ(opt::parse_method("cobyla"), opt::Method::cobyla);
  EXPECT_EQ(opt::parse_method("lbfgs"), opt::Method::lbfgs);
  EXPECT_EQ(opt::method_name(opt::Method::lbfgs), "lbfgs");
  EXPECT_THROW(opt::parse_method("adam"), std::invalid_argument);
}

TEST(FiniteDiff, Quadratic) {
  const auto g = opt::finite_diff_gradient([](const Vector& x) { return x[0] * x[0]; }, vec({1}), 1e-5);
  EXPECT_NEAR(g[0], 2.0, 1e-8);
}

TEST(FiniteDiff, ConstantIsZero) {
  const auto g = opt::finite_diff_gradient([](const Vector&) { return 4.2; }, vec({1, 2, 3}), 1e-3);
  EXPECT_EQ(g, Vector::Zero(3));
}

TEST(FiniteDiff, SineAgainstCosine) {
  const auto g = opt::finite_diff_gradient([](const Vector& x) { return std::sin(x[0]); }, vec({0.3}), 1e-5);
  EXPECT_NEAR(g[0], std::cos(0.3), 1e-9);
}

TEST(FiniteDiff, RejectsBadInput) {
  const auto f = [](const Vector& x) { return x[0]; };
  EXPECT_THROW(opt::finite_diff_gradient(f, vec({1}), 0.0), std::invalid_argument);
  const auto bad = [](const Vector& x) { return x[0] > 1 ? std::numeric_limits<double>::infinity() : 0.0; };
  EXPECT_THROW(opt::finite_diff_gradient(bad, vec({1}), 1e-3), std::domain_error);
}
