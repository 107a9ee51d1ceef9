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

#include <complex>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qforecast/linsys.hpp"
#include "qforecast/optimize.hpp"
#include "qforecast/pauli.hpp"
#include "qforecast/qsim.hpp"

namespace qforecast::vqls {

using Complex = std::complex<double>;

/**
 * Hardware-efficient ansatz: a rotation layer (RY then RZ on every qubit),
 * then `layers` repetitions of [CNOT chain 0->1->...->k-1, rotation layer].
 *
 * Parameter order is layer-major, then qubit, then (RY, RZ). With two qubits
 * and one layer this is RY RZ | CNOT(0,1) | RY RZ.
 */
struct AnsatzSpec {
  int num_qubits = 2;
  int layers = 1;

  int parameter_count() const { return 2 * num_qubits * (layers + 1); }

  /** One layer for two qubits, two layers beyond that. */
  static AnsatzSpec default_for(int num_qubits);
};

qsim::Circuit ansatz_circuit(const AnsatzSpec& spec, const Eigen::VectorXd& theta);

/** A w = b with A held as a Pauli decomposition and b as a unit state. */
struct VqlsProblem {
  pauli::PauliDecomposition decomposition;
  Eigen::VectorXcd b_state;
  double b_norm = 0.0;
  Eigen::MatrixXcd a;

  int num_qubits() const { return decomposition.num_qubits; }
  std::size_t term_count() const { return decomposition.terms.size(); }
};

/** Throws std::invalid_argument for a non-Hermitian or wrongly sized A or a
 * zero b. */
VqlsProblem make_problem(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& b,
                         double prune_threshold = pauli::kDefaultPruneThreshold);
VqlsProblem make_problem(const linsys::NormalSystem& system);

struct Estimator {
  enum class Kind { analytic, hadamard };
  Kind kind = Kind::analytic;
  /** Hadamard mode only; empty means exact ancilla probabilities. */
  std::optional<int> shots;

  static Estimator analytic() { return {}; }
  static Estimator hadamard_exact() { return {Kind::hadamard, std::nullopt}; }
  static Estimator hadamard_sampled(int shots) { return {Kind::hadamard, shots}; }
};

/**
 * <b|M_i|x(theta)> for term i.
 *
 * Analytic mode takes inner products of statevectors. Hadamard mode runs the
 * real and imaginary Hadamard tests on U = B^dagger M_i V, where V is the
 * ansatz and B prepares |b>, so that <0|U|0> is the wanted overlap.
 * Sampled estimates draw from `rng`.
 */
Complex overlap_term(const VqlsProblem& problem, std::size_t term, const AnsatzSpec& spec,
                     const Eigen::VectorXd& theta, const Estimator& estimator,
                     std::mt19937_64* rng = nullptr);

struct CostOptions {
  /** 1 - |<b|psi>|^2 without dividing by <psi|psi>. */
  bool unnormalized = false;
};

struct CostValue {
  double value = 1.0;
  Complex overlap;        // <b|psi>
  double psi_norm_sq = 0;  // <psi|psi>
  bool degenerate = false;
};

/**
 * Global cost for |psi> = M |x(theta)>. Default: 1 - |<b|psi>|^2 / <psi|psi>,
 * defined as 1 (flagged degenerate) when <psi|psi> vanishes.
 */
CostValue evaluate_cost(const VqlsProblem& problem, const AnsatzSpec& spec, const Eigen::VectorXd& theta,
                        const Estimator& estimator, const CostOptions& options = {},
                        std::mt19937_64* rng = nullptr);

double cost(const VqlsProblem& problem, const AnsatzSpec& spec, const Eigen::VectorXd& theta,
            const Estimator& estimator, const CostOptions& options = {}, std::mt19937_64* rng = nullptr);

struct Rescaled {
  Eigen::VectorXcd w;
  double scale = 0.0;
  int sign = 1;
};

/**
 * w = sign * (|b| / |A w_state|) * w_state, with w_state first rotated so
 * that <b|A w_state> is real and positive and the sign picked to minimize
 * |A w - b|.
 * Throws std::domain_error when |A w_state| <= 1e-300.
 */
Rescaled rescale(const VqlsProblem& problem, const Eigen::VectorXcd& w_state);

struct VqlsOptions {
  static optimize::OptimOptions default_optim() {
    optimize::OptimOptions o;
    o.max_iters = 3000;
    o.final_radius = 1e-7;
    return o;
  }

  AnsatzSpec ansatz;
  optimize::Method method = optimize::Method::cobyla;
  optimize::OptimOptions optim = default_optim();
  int restarts = 5;
  std::uint64_t seed = 0;
  Estimator estimator;
  CostOptions cost;
  /** Final-cost threshold for the convergence flag. */
  double convergence_cost = 1e-4;
  /** Finite-difference step when the quasi-Newton method is chosen. */
  double gradient_step = 1e-6;
};

struct VqlsResult {
  Eigen::VectorXd theta;
  Eigen::VectorXcd w_state;
  Eigen::VectorXcd w;
  double scale = 0.0;
  int sign = 1;
  double final_cost = 1.0;
  std::vector<double> cost_trace;
  bool converged = false;
  int evaluations = 0;

  /** Real part of w; the imaginary part vanishes for real systems at convergence. */
  Eigen::VectorXd weights() const { return w.real(); }
};

/** Best of `restarts` runs from seeded uniform starts in [0, 2 pi). The
 * trace concatenates every objective evaluation across restarts. */
VqlsResult solve(const VqlsProblem& problem, const VqlsOptions& options);

}  // namespace qforecast::vqls
