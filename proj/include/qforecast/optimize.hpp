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

#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qforecast::optimize {

using Vector = Eigen::VectorXd;

struct Objective {
  std::function<double(const Vector&)> evaluate;
  /** Optional; required by minimize_quasi_newton. */
  std::function<Vector(const Vector&)> gradient;
};

struct Bounds {
  Vector lower;
  Vector upper;
};

struct OptimOptions {
  /** Budget in objective evaluations. */
  int max_iters = 1000;
  /** Initial trust radius of the derivative-free method. */
  double initial_step = 0.5;
  /** Trust radius at which the derivative-free method stops. */
  double final_radius = 1e-6;
  double f_tol = 1e-10;
  double x_tol = 1e-8;
  /** Projected-gradient infinity norm at which the quasi-Newton method stops. */
  double g_tol = 1e-9;
  int history = 10;
  std::optional<Bounds> bounds;
};

struct TraceEntry {
  int iteration;  // 1-based objective evaluation count
  double value;
};

struct OptimTrace {
  std::vector<TraceEntry> entries;

  std::size_t size() const { return entries.size(); }
  std::vector<double> running_minimum() const;
};

struct OptimResult {
  Vector x_best;
  double f_best = 0.0;
  OptimTrace trace;
  bool converged = false;
  int evaluations = 0;
  std::string message;
};

/**
 * Trust-region descent on linear interpolation models over a simplex of
 * n + 1 points, using objective values only. Stops when the trust radius
 * falls to options.final_radius (converged) or the budget runs out.
 *
 * Throws std::domain_error if the objective is not finite at x0.
 */
OptimResult minimize_derivative_free(const Objective& objective, Vector x0, const OptimOptions& options);

/**
 * Limited-memory BFGS with a backtracking Armijo line search. Box bounds,
 * when given, are enforced by projection with an active set.
 *
 * Throws std::invalid_argument without a gradient and std::domain_error for a
 * non-finite start.
 */
OptimResult minimize_quasi_newton(const Objective& objective, Vector x0, const OptimOptions& options);

/** Central differences with step h. */
Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h);

enum class Method { cobyla, lbfgs };

Method parse_method(std::string_view name);
std::string_view method_name(Method m);

OptimResult minimize(Method method, const Objective& objective, Vector x0, const OptimOptions& options);

}  // namespace qforecast::optimize
