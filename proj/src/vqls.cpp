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

#include "qforecast/vqls.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace qforecast::vqls {

AnsatzSpec AnsatzSpec::default_for(int num_qubits) {
  return {num_qubits, num_qubits <= 2 ? 1 : 2};
}

qsim::Circuit ansatz_circuit(const AnsatzSpec& spec, const Eigen::VectorXd& theta) {
  if (spec.num_qubits < 1 || spec.layers < 0) throw std::invalid_argument("invalid ansatz shape");
  if (theta.size() != spec.parameter_count())
    throw std::invalid_argument("ansatz expects " + std::to_string(spec.parameter_count()) +
                                " parameters, got " + std::to_string(theta.size()));
  const int k = spec.num_qubits;
  qsim::Circuit c(k);
  Eigen::Index p = 0;
  for (int layer = 0; layer <= spec.layers; ++layer) {
    if (layer > 0) {
      for (int q = 0; q + 1 < k; ++q) c.add(qsim::Gate::cnot(q, q + 1));
    }
    for (int q = 0; q < k; ++q) {
      c.add(qsim::Gate::ry(q, theta[p++]));
      c.add(qsim::Gate::rz(q, theta[p++]));
    }
  }
  return c;
}

VqlsProblem make_problem(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b, double prune_threshold) {
  if (a.rows() != b.size()) throw std::invalid_argument("matrix and right-hand side sizes differ");
  VqlsProblem p;
  p.decomposition = pauli::decompose(a, prune_threshold);
  p.b_norm = b.norm();
  if (!(p.b_norm > 0) || !std::isfinite(p.b_norm)) throw std::invalid_argument("right-hand side is zero");
  p.b_state = b / p.b_norm;
  p.a = a;
  return p;
}

VqlsProblem make_problem(const linsys::NormalSystem& system) {
  return make_problem(Eigen::MatrixXcd(system.a.cast<Complex>()), Eigen::VectorXcd(system.b.cast<Complex>()));
}

namespace {

void check_problem(const VqlsProblem& problem, const AnsatzSpec& spec) {
  if (spec.num_qubits != problem.num_qubits())
    throw std::invalid_argument("ansatz width differs from the problem's qubit count");
}

qsim::Statevector ansatz_state(const AnsatzSpec& spec, const Eigen::VectorXd& theta) {
  return qsim::run_circuit(ansatz_circuit(spec, theta));
}

Complex hadamard_overlap(const Eigen::MatrixXcd& u, const Estimator& estimator, std::mt19937_64* rng) {
  const double re = qsim::hadamard_test(u, qsim::OverlapPart::real, estimator.shots, rng);
  const double im = qsim::hadamard_test(u, qsim::OverlapPart::imaginary, estimator.shots, rng);
  return {re, im};
}

CostValue finish_cost(Complex overlap, double psi_norm_sq, const CostOptions& options) {
  CostValue v;
  v.overlap = overlap;
  v.psi_norm_sq = psi_norm_sq;
  if (options.unnormalized) {
    v.value = 1.0 - std::norm(overlap);
    return v;
  }
  if (!(psi_norm_sq > 1e-300)) {
    v.value = 1.0;
    v.degenerate = true;
    return v;
  }
  v.value = 1.0 - std::norm(overlap) / psi_norm_sq;
  return v;
}

}  // namespace

Complex overlap_term(const VqlsProblem& problem, std::size_t term, const AnsatzSpec& spec,
                     const Eigen::VectorXd& theta, const Estimator& estimator, std::mt19937_64* rng) {
  check_problem(problem, spec);
  if (term >= problem.term_count()) throw std::out_of_range("Pauli term index out of range");
  const auto& string = problem.decomposition.terms[term].string;
  if (estimator.kind == Estimator::Kind::analytic) {
    qsim::Statevector x = ansatz_state(spec, theta);
    qsim::apply_pauli_in_place(x, string);
    return problem.b_state.dot(x.amplitudes());
  }
  const Eigen::MatrixXcd u = qsim::prepare_state(problem.b_state).adjoint() * pauli::pauli_matrix(string) *
                             qsim::circuit_unitary(ansatz_circuit(spec, theta));
  return hadamard_overlap(u, estimator, rng);
}

CostValue evaluate_cost(const VqlsProblem& problem, const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                        const Estimator& estimator, const CostOptions& options, std::mt19937_64* rng) {
  check_problem(problem, spec);
  const auto& terms = problem.decomposition.terms;

  if (estimator.kind == Estimator::Kind::analytic) {
    const qsim::Statevector x = ansatz_state(spec, theta);
    Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(x.dim()));
    for (const auto& t : terms) {
      qsim::Statevector mx = x;
      qsim::apply_pauli_in_place(mx, t.string);
      psi += t.alpha * mx.amplitudes();
    }
    return finish_cost(problem.b_state.dot(psi), psi.squaredNorm(), options);
  }

  const Eigen::MatrixXcd v = qsim::circuit_unitary(ansatz_circuit(spec, theta));
  const Eigen::MatrixXcd b_adj = qsim::prepare_state(problem.b_state).adjoint();
  std::vector<Eigen::MatrixXcd> strings;
  strings.reserve(terms.size());
  for (const auto& t : terms) strings.push_back(pauli::pauli_matrix(t.string));

  Complex overlap = 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    overlap += terms[i].alpha * hadamard_overlap(b_adj * strings[i] * v, estimator, rng);
  }
  if (options.unnormalized) return finish_cost(overlap, 1.0, options);

  // <psi|psi> = sum_ij conj(alpha_i) alpha_j <x|M_i M_j|x>; the (j, i) entry
  // is the conjugate of (i, j).
  Complex norm_sq = 0.0;
  const Eigen::MatrixXcd v_adj = v.adjoint();
  for (std::size_t i = 0; i < terms.size(); ++i) {
    for (std::size_t j = i; j < terms.size(); ++j) {
      const Complex ov = hadamard_overlap(v_adj * strings[i] * strings[j] * v, estimator, rng);
      const Complex contribution = std::conj(terms[i].alpha) * terms[j].alpha * ov;
      norm_sq += i == j ? Complex(contribution.real(), 0.0) : 2.0 * Complex(contribution.real(), 0.0);
    }
  }
  return finish_cost(overlap, norm_sq.real(), options);
}

double cost(const VqlsProblem& problem, const AnsatzSpec& spec, const Eigen::VectorXd& theta,
            const Estimator& estimator, const CostOptions& options, std::mt19937_64* rng) {
  return evaluate_cost(problem, spec, theta, estimator, options, rng).value;
}

Rescaled rescale(const VqlsProblem& problem, const Eigen::VectorXcd& w_state) {
  if (w_state.size() != problem.a.cols()) throw std::invalid_argument("solution state has the wrong length");
  if (std::abs(w_state.norm() - 1.0) > 1e-8) throw std::invalid_argument("solution state is not unit norm");

  if (!((problem.a * w_state).norm() > 1e-300)) throw std::domain_error("A maps the solution state to zero");

  // Global phase making <b|A x> real and positive. A rank-deficient A leaves
  // null-space components whose phase the cost cannot see, so the phase is
  // read off A x rather than x. When the overlap vanishes fall back to the
  // phase maximizing |Re(e^{-i phi} x)|, phi = arg(sum x_i^2) / 2.
  const Complex overlap = problem.b_state.dot(problem.a * w_state);
  const double phi = std::abs(overlap) > 1e-12 ? std::arg(overlap)
                                                 : 0.5 * std::arg((w_state.array() * w_state.array()).sum());
  const Eigen::VectorXcd x = w_state * std::polar(1.0, -phi);

  const Eigen::VectorXcd ax = problem.a * x;
  const double ax_norm = ax.norm();

  Rescaled r;
  r.scale = problem.b_norm / ax_norm;
  const Eigen::VectorXcd b = problem.b_norm * problem.b_state;
  const double plus = (r.scale * ax - b).norm();
  const double minus = (-r.scale * ax - b).norm();
  r.sign = minus < plus ? -1 : 1;
  r.w = static_cast<double>(r.sign) * r.scale * x;
  return r;
}

VqlsResult solve(const VqlsProblem& problem, const VqlsOptions& options) {
  check_problem(problem, options.ansatz);
  if (options.restarts < 1) throw std::invalid_argument("restarts must be >= 1");

  std::mt19937_64 init_rng(options.seed);
  std::mt19937_64 shot_rng(options.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * std::numbers::pi);

  VqlsResult result;
  std::vector<double> trace;
  optimize::Objective objective;
  objective.evaluate = [&](const Eigen::VectorXd& theta) {
    return cost(problem, options.ansatz, theta, options.estimator, options.cost, &shot_rng);
  };
  if (options.method == optimize::Method::lbfgs) {
    objective.gradient = [&](const Eigen::VectorXd& theta) {
      return optimize::finite_diff_gradient(objective.evaluate, theta, options.gradient_step);
    };
  }

  double best = std::numeric_limits<double>::infinity();
  for (int r = 0; r < options.restarts; ++r) {
    Eigen::VectorXd theta0(options.ansatz.parameter_count());
    for (Eigen::Index i = 0; i < theta0.size(); ++i) theta0[i] = angle(init_rng);
    optimize::OptimResult run = optimize::minimize(options.method, objective, theta0, options.optim);
    for (const auto& e : run.trace.entries) result.cost_trace.push_back(e.value);
    result.evaluations += run.evaluations;
    if (run.f_best < best) {
      best = run.f_best;
      result.theta = run.x_best;
    }
  }

  result.final_cost = best;
  result.w_state = ansatz_state(options.ansatz, result.theta).amplitudes();
  result.converged = std::isfinite(best) && best <= options.convergence_cost;
  try {
    const Rescaled rescaled = rescale(problem, result.w_state);
    result.w = rescaled.w;
    result.scale = rescaled.scale;
    result.sign = rescaled.sign;
  } catch (const std::domain_error&) {
    result.w = Eigen::VectorXcd::Zero(result.w_state.size());
    result.converged = false;
  }
  return result;
}

}  // namespace qforecast::vqls
