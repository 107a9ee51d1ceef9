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

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace qforecast::optimize {

std::vector<double> OptimTrace::running_minimum() const {
  std::vector<double> out;
  out.reserve(entries.size());
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : entries) {
    if (e.value < best) best = e.value;
    out.push_back(best);
  }
  return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate(const OptimOptions& o, Eigen::Index n) {
  if (o.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(o.initial_step > 0) || !(o.final_radius > 0) || !(o.f_tol > 0) || !(o.x_tol > 0) || !(o.g_tol > 0))
    throw std::invalid_argument("optimizer tolerances must be positive");
  if (o.history < 1) throw std::invalid_argument("history size must be >= 1");
  if (o.bounds) {
    if (o.bounds->lower.size() != n || o.bounds->upper.size() != n)
      throw std::invalid_argument("bounds do not match the parameter count");
    if ((o.bounds->lower.array() > o.bounds->upper.array()).any())
      throw std::invalid_argument("lower bound exceeds upper bound");
  }
}

Vector project(const Vector& x, const std::optional<Bounds>& bounds) {
  if (!bounds) return x;
  return x.cwiseMax(bounds->lower).cwiseMin(bounds->upper);
}

// Counts evaluations, records the trace and keeps the earliest best point.
class Recorder {
 public:
  Recorder(const Objective& objective, int budget) : objective_(objective), budget_(budget) {}

  bool exhausted() const { return evaluations_ >= budget_; }
  int evaluations() const { return evaluations_; }

  double operator()(const Vector& x) {
    ++evaluations_;
    double f = objective_.evaluate(x);
    trace_.entries.push_back({evaluations_, f});
    if (!std::isfinite(f)) f = kInf;
    if (f < best_f_) {
      best_f_ = f;
      best_x_ = x;
    }
    return f;
  }

  const Vector& best_x() const { return best_x_; }
  double best_f() const { return best_f_; }

  OptimResult finish(bool converged, std::string message) {
    return {best_x_, best_f_, std::move(trace_), converged, evaluations_, std::move(message)};
  }

 private:
  const Objective& objective_;
  int budget_;
  int evaluations_ = 0;
  OptimTrace trace_;
  Vector best_x_;
  double best_f_ = kInf;
};

}  // namespace

OptimResult minimize_derivative_free(const Objective& objective, Vector x0, const OptimOptions& options) {
  if (!objective.evaluate) throw std::invalid_argument("objective has no evaluate function");
  const Eigen::Index n = x0.size();
  validate(options, n);
  x0 = project(x0, options.bounds);

  Recorder eval(objective, options.max_iters);
  if (!std::isfinite(eval(x0))) throw std::domain_error("objective is not finite at the starting point");
  if (n == 0) return eval.finish(true, "no parameters");

  const double delta_max = 10.0 * options.initial_step;
  double rho = options.initial_step;
  double delta = rho;
  std::vector<Vector> pts(static_cast<std::size_t>(n + 1));
  std::vector<double> fv(static_cast<std::size_t>(n + 1));

  // Simplex around the best point: one vertex per coordinate at distance
  // `radius`, stepping inward when a bound is in the way.
  auto rebuild = [&](double radius) {
    const Vector base = eval.best_x();
    pts[0] = base;
    fv[0] = eval.best_f();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (eval.exhausted()) return false;
      Vector p = base;
      double step = radius;
      if (options.bounds && p[j] + step > options.bounds->upper[j]) step = -radius;
      p[j] += step;
      p = project(p, options.bounds);
      pts[static_cast<std::size_t>(j + 1)] = p;
      fv[static_cast<std::size_t>(j + 1)] = eval(p);
    }
    return true;
  };

  if (!rebuild(rho)) return eval.finish(false, "evaluation budget exhausted");

  bool fresh_simplex = true;
  while (true) {
    const auto ib = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    std::swap(pts[0], pts[ib]);
    std::swap(fv[0], fv[ib]);

    Eigen::MatrixXd edges(n, n);
    Vector df(n);
    bool finite = true;
    for (Eigen::Index j = 0; j < n; ++j) {
      edges.row(j) = (pts[static_cast<std::size_t>(j + 1)] - pts[0]).transpose();
      df[j] = fv[static_cast<std::size_t>(j + 1)] - fv[0];
      finite = finite && std::isfinite(df[j]);
    }

    bool step_failed = false;
    if (!finite) {
      step_failed = true;
    } else {
      Eigen::JacobiSVD<Eigen::MatrixXd> svd(edges, Eigen::ComputeFullU | Eigen::ComputeFullV);
      const Vector& sv = svd.singularValues();
      if (sv[n - 1] <= 1e-10 * sv[0] || edges.array().isNaN().any()) {
        if (eval.exhausted() || !rebuild(rho)) break;
        fresh_simplex = true;
        continue;
      }
      // Linear model gradient: edges * g = df.
      const Vector g = svd.solve(df);
      const double gnorm = g.norm();
      if (!(gnorm > 0) || !std::isfinite(gnorm)) {
        step_failed = true;
      } else {
        const Vector trial = project(pts[0] - (delta / gnorm) * g, options.bounds);
        const Vector step = trial - pts[0];
        if (step.norm() <= 1e-14 * (1.0 + pts[0].norm())) {
          step_failed = true;
        } else {
          if (eval.exhausted()) break;
          const double ft = eval(trial);
          const double predicted = -g.dot(step);
          if (ft < fv[0]) {
            const double ratio = predicted > 0 ? (fv[0] - ft) / predicted : 0.0;
            // Replace the vertex whose removal keeps the simplex volume
            // largest, weighted towards distant vertices. The volume ratio of
            // swapping vertex j is |coeff_j| where edges^T coeff = step.
            const Vector coeff = svd.matrixU() * (svd.matrixV().transpose() * step).cwiseQuotient(sv);
            std::size_t replace = 1;
            double best_score = -1;
            for (Eigen::Index j = 0; j < n; ++j) {
              const double dist = (pts[static_cast<std::size_t>(j + 1)] - trial).norm() / delta;
              const double score = std::abs(coeff[j]) * std::max(1.0, dist * dist);
              if (score > best_score) {
                best_score = score;
                replace = static_cast<std::size_t>(j + 1);
              }
            }
            pts[replace] = trial;
            fv[replace] = ft;
            if (ratio > 0.7) delta = std::min(2.0 * delta, delta_max);
            else if (ratio < 0.1) delta = std::max(0.5 * delta, rho);
            fresh_simplex = false;
            continue;
          }
          step_failed = true;
        }
      }
    }

    if (step_failed) {
      if (delta > rho) {
        delta = std::max(0.5 * delta, rho);
        continue;
      }
      double far = 0;
      for (Eigen::Index j = 1; j <= n; ++j) far = std::max(far, (pts[static_cast<std::size_t>(j)] - pts[0]).norm());
      if (!fresh_simplex && far > 2.0 * rho) {
        if (!rebuild(rho)) break;
        fresh_simplex = true;
        continue;
      }
      if (rho <= options.final_radius) return eval.finish(true, "trust radius reached its final value");
      rho = std::max(0.5 * rho, options.final_radius);
      delta = rho;
      if (!rebuild(rho)) break;
      fresh_simplex = true;
    }
  }
  return eval.finish(false, "evaluation budget exhausted");
}

OptimResult minimize_quasi_newton(const Objective& objective, Vector x0, const OptimOptions& options) {
  if (!objective.evaluate) throw std::invalid_argument("objective has no evaluate function");
  if (!objective.gradient) throw std::invalid_argument("quasi-Newton minimization needs a gradient");
  const Eigen::Index n = x0.size();
  validate(options, n);

  Vector x = project(x0, options.bounds);
  Recorder eval(objective, options.max_iters);
  double f = eval(x);
  if (!std::isfinite(f)) throw std::domain_error("objective is not finite at the starting point");
  Vector g = objective.gradient(x);
  if (g.size() != n || !g.allFinite()) throw std::domain_error("gradient is not finite at the starting point");

  std::deque<std::pair<Vector, Vector>> memory;  // (s, y), oldest first

  auto free_mask = [&](const Vector& at, const Vector& grad) {
    Eigen::Array<bool, Eigen::Dynamic, 1> free = Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(n, true);
    if (!options.bounds) return free;
    for (Eigen::Index i = 0; i < n; ++i) {
      const bool at_lower = at[i] <= options.bounds->lower[i] && grad[i] > 0;
      const bool at_upper = at[i] >= options.bounds->upper[i] && grad[i] < 0;
      free[i] = !(at_lower || at_upper);
    }
    return free;
  };

  while (true) {
    const auto free = free_mask(x, g);
    const Vector pg = free.select(g, Vector::Zero(n));
    if (pg.lpNorm<Eigen::Infinity>() <= options.g_tol) return eval.finish(true, "projected gradient below tolerance");
    if (eval.exhausted()) break;

    // Two-loop recursion for d = -H g.
    Vector q = pg;
    std::vector<double> alphas(memory.size());
    for (std::size_t i = memory.size(); i-- > 0;) {
      const auto& [s, y] = memory[i];
      alphas[i] = s.dot(q) / y.dot(s);
      q -= alphas[i] * y;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= s.dot(y) / y.dot(y);
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const auto& [s, y] = memory[i];
      const double beta = y.dot(q) / y.dot(s);
      q += (alphas[i] - beta) * s;
    }
    Vector d = free.select(-q, Vector::Zero(n));
    if (!(d.dot(g) < 0) || !d.allFinite()) {
      memory.clear();
      d = -pg;
    }

    double alpha = memory.empty() ? std::min(1.0, 1.0 / d.norm()) : 1.0;
    bool accepted = false;
    bool tiny_step = false;
    Vector xn;
    double fn = kInf;
    for (int halvings = 0; halvings < 60; ++halvings) {
      xn = project(x + alpha * d, options.bounds);
      const Vector step = xn - x;
      if (step.norm() <= options.x_tol * std::max(1.0, x.norm())) {
        tiny_step = true;
        break;
      }
      if (eval.exhausted()) break;
      fn = eval(xn);
      if (std::isfinite(fn) && fn <= f + 1e-4 * g.dot(step)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      if (tiny_step) return eval.finish(true, "line search step below tolerance");
      break;
    }

    const Vector gn = objective.gradient(xn);
    if (!gn.allFinite()) return eval.finish(false, "gradient became non-finite");
    const Vector s = xn - x;
    const Vector y = gn - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm() && sy > 0) {
      memory.emplace_back(s, y);
      if (static_cast<int>(memory.size()) > options.history) memory.pop_front();
    }
    const double decrease = f - fn;
    x = xn;
    f = fn;
    g = gn;
    if (decrease <= options.f_tol * std::max(1.0, std::abs(f)))
      return eval.finish(true, "objective change below tolerance");
    if (s.norm() <= options.x_tol * std::max(1.0, x.norm())) return eval.finish(true, "step below tolerance");
  }
  return eval.finish(false, "evaluation budget exhausted");
}

Vector finite_diff_gradient(const std::function<double(const Vector&)>& f, const Vector& x, double h) {
  if (!(h > 0)) throw std::invalid_argument("finite-difference step must be positive");
  Vector grad(x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + h;
    const double up = f(probe);
    probe[i] = x[i] - h;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) throw std::domain_error("objective not finite near x");
    grad[i] = (up - down) / (2 * h);
  }
  return grad;
}

Method parse_method(std::string_view name) {
  if (name == "cobyla") return Method::cobyla;
  if (name == "lbfgs") return Method::lbfgs;
  throw std::invalid_argument("unknown optimizer '" + std::string(name) + "' (want cobyla or lbfgs)");
}

std::string_view method_name(Method m) { return m == Method::cobyla ? "cobyla" : "lbfgs"; }

OptimResult minimize(Method method, const Objective& objective, Vector x0, const OptimOptions& options) {
  return method == Method::cobyla ? minimize_derivative_free(objective, std::move(x0), options)
                                  : minimize_quasi_newton(objective, std::move(x0), options);
}

}  // namespace qforecast::optimize
