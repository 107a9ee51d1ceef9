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
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "qforecast/pauli.hpp"

namespace qforecast::qsim {

using Complex = std::complex<double>;

inline constexpr int kMaxQubits = 16;
inline constexpr double kNormTolerance = 1e-10;
inline constexpr double kUnitaryTolerance = 1e-10;

/**
 * Unit-norm amplitude vector over 2^k basis states.
 *
 * Basis index bit (k - 1 - q) is the value of qubit q, so qubit 0 is the
 * most significant bit.
 */
class Statevector {
 public:
  /** |0...0> on `num_qubits` qubits. */
  explicit Statevector(int num_qubits);

  static Statevector basis(int num_qubits, std::uint64_t index);

  /** Throws std::invalid_argument unless the length is a power of two and
   * the norm is 1 within `tolerance`. */
  static Statevector from_amplitudes(Eigen::VectorXcd amplitudes,
                                     double tolerance = 1e-8);

  int num_qubits() const { return num_qubits_; }
  std::size_t dim() const { return static_cast<std::size_t>(amps_.size()); }
  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  Complex operator[](std::size_t i) const { return amps_[static_cast<Eigen::Index>(i)]; }
  double norm() const { return amps_.norm(); }

  /** Raw access for the in-place kernels below. */
  Eigen::VectorXcd& data() { return amps_; }

 private:
  Statevector(int num_qubits, Eigen::VectorXcd amps);

  int num_qubits_;
  Eigen::VectorXcd amps_;
};

enum class GateKind { rx, ry, rz, h, x, cnot, sdg, dense };

/**
 * A gate bound to the qubits it acts on.
 *
 * For CNOT, `qubits = {control, target}`. For dense gates the local matrix
 * index uses `qubits[0]` as its most significant bit.
 */
struct Gate {
  GateKind kind;
  std::vector<int> qubits;
  double angle = 0.0;
  std::shared_ptr<const Eigen::MatrixXcd> matrix;

  static Gate rx(int qubit, double angle);
  static Gate ry(int qubit, double angle);
  static Gate rz(int qubit, double angle);
  static Gate h(int qubit);
  static Gate x(int qubit);
  static Gate sdg(int qubit);
  static Gate cnot(int control, int target);
  /** Validates U^dagger U = I within kUnitaryTolerance. */
  static Gate dense(Eigen::MatrixXcd unitary, std::vector<int> qubits);

  /** The gate's local 2^r x 2^r matrix. */
  Eigen::MatrixXcd local_matrix() const;
};

class Circuit {
 public:
  explicit Circuit(int num_qubits);

  int num_qubits() const { return num_qubits_; }
  const std::vector<Gate>& gates() const { return gates_; }
  std::size_t size() const { return gates_.size(); }

  /** Throws std::out_of_range for a qubit index >= num_qubits. */
  Circuit& add(Gate gate);
  Circuit& append(const Circuit& other);

 private:
  int num_qubits_;
  std::vector<Gate> gates_;
};

void apply_in_place(Statevector& state, const Gate& gate);
Statevector apply_gate(Statevector state, const Gate& gate);

Statevector run_circuit(const Circuit& circuit, Statevector initial);
Statevector run_circuit(const Circuit& circuit);

/** Column j is the circuit applied to basis state j. */
Eigen::MatrixXcd circuit_unitary(const Circuit& circuit);

/** P|state>, with P applied as bit flips and phases. */
void apply_pauli_in_place(Statevector& state, const pauli::PauliString& p);

/** <state|P|state>. */
double expectation(const Statevector& state, const pauli::PauliString& p);

/** sum_i conj(a_i) b_i. */
Complex inner_product(const Statevector& a, const Statevector& b);

/** |<a|b>|^2. */
double fidelity(const Statevector& a, const Statevector& b);

/** Multiplies by the global phase that makes the first amplitude with
 * magnitude above 1e-12 real and positive. */
Statevector canonical_phase(const Statevector& state);

/**
 * Unitary U with U|0...0> = amplitudes, built from one Householder
 * reflection and a global phase.
 */
Eigen::MatrixXcd prepare_state(const Eigen::VectorXcd& amplitudes);

/** diag(I, U); the new qubit is the most significant one. */
Eigen::MatrixXcd controlled(const Eigen::MatrixXcd& unitary);

bool is_unitary(const Eigen::MatrixXcd& m, double tolerance = kUnitaryTolerance);

enum class OverlapPart { real, imaginary };

/**
 * Hadamard test on the ancilla-controlled `unitary`.
 *
 * Exact mode (`shots` empty) returns Re<0|U|0> or Im<0|U|0> from the ancilla
 * probability P(0) = (1 + value) / 2. Sampled mode draws `shots` ancilla
 * outcomes from `rng` and returns 2 * (zeros / shots) - 1.
 */
double hadamard_test(const Eigen::MatrixXcd& unitary, OverlapPart part,
                     std::optional<int> shots = std::nullopt,
                     std::mt19937_64* rng = nullptr);

/** Ancilla P(0) of the Hadamard-test circuit. */
double hadamard_test_probability(const Eigen::MatrixXcd& unitary, OverlapPart part);

/** Estimates |<a|b>|^2 through controlled swaps; same shot semantics as
 * hadamard_test. */
double swap_test(const Statevector& a, const Statevector& b,
                 std::optional<int> shots = std::nullopt,
                 std::mt19937_64* rng = nullptr);

}  // namespace qforecast::qsim
