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

#include "qforecast/qsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qforecast::qsim {

namespace {

// Plain arithmetic avoids the NaN-recovery path of std::complex operator*.
inline Complex mul(Complex a, Complex b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

int qubits_for_length(Eigen::Index n) {
  if (n < 2 || (n & (n - 1)) != 0)
    throw std::invalid_argument("amplitude count " + std::to_string(n) + " is not a power of two >= 2");
  int k = 0;
  while ((Eigen::Index{1} << k) < n) ++k;
  if (k > kMaxQubits) throw std::invalid_argument("too many qubits");
  return k;
}

void check_qubit_count(int k) {
  if (k < 1 || k > kMaxQubits)
    throw std::invalid_argument("qubit count " + std::to_string(k) + " out of range");
}

std::uint64_t bit_of(int num_qubits, int qubit) {
  return std::uint64_t{1} << (num_qubits - 1 - qubit);
}

void apply_single(Eigen::VectorXcd& amps, int num_qubits, int qubit, const Complex m[4]) {
  const std::uint64_t stride = bit_of(num_qubits, qubit);
  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  Complex* a = amps.data();
  for (std::uint64_t base = 0; base < dim; base += 2 * stride) {
    for (std::uint64_t i = base; i < base + stride; ++i) {
      const Complex a0 = a[i];
      const Complex a1 = a[i + stride];
      a[i] = mul(m[0], a0) + mul(m[1], a1);
      a[i + stride] = mul(m[2], a0) + mul(m[3], a1);
    }
  }
}

// RY has a real matrix; worth its own loop for the PQC hot path.
void apply_ry(Eigen::VectorXcd& amps, int num_qubits, int qubit, double angle) {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  const std::uint64_t stride = bit_of(num_qubits, qubit);
  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  Complex* a = amps.data();
  for (std::uint64_t base = 0; base < dim; base += 2 * stride) {
    for (std::uint64_t i = base; i < base + stride; ++i) {
      const Complex a0 = a[i];
      const Complex a1 = a[i + stride];
      a[i] = {c * a0.real() - s * a1.real(), c * a0.imag() - s * a1.imag()};
      a[i + stride] = {s * a0.real() + c * a1.real(), s * a0.imag() + c * a1.imag()};
    }
  }
}

void apply_rx(Eigen::VectorXcd& amps, int num_qubits, int qubit, double angle) {
  // [[c, -is], [-is, c]]
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  const std::uint64_t stride = bit_of(num_qubits, qubit);
  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  Complex* a = amps.data();
  for (std::uint64_t base = 0; base < dim; base += 2 * stride) {
    for (std::uint64_t i = base; i < base + stride; ++i) {
      const Complex a0 = a[i];
      const Complex a1 = a[i + stride];
      a[i] = {c * a0.real() + s * a1.imag(), c * a0.imag() - s * a1.real()};
      a[i + stride] = {s * a0.imag() + c * a1.real(), -s * a0.real() + c * a1.imag()};
    }
  }
}

void apply_cnot(Eigen::VectorXcd& amps, int num_qubits, int control, int target) {
  const std::uint64_t cbit = bit_of(num_qubits, control);
  const std::uint64_t tbit = bit_of(num_qubits, target);
  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  Complex* a = amps.data();
  for (std::uint64_t i = 0; i < dim; ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(a[i], a[i | tbit]);
  }
}

void apply_dense(Eigen::VectorXcd& amps, int num_qubits, const std::vector<int>& qubits,
                 const Eigen::MatrixXcd& u) {
  const std::size_t r = qubits.size();
  const std::size_t local_dim = std::size_t{1} << r;
  std::vector<std::uint64_t> offsets(local_dim, 0);
  std::uint64_t mask = 0;
  for (std::size_t l = 0; l < local_dim; ++l) {
    for (std::size_t j = 0; j < r; ++j) {
      if ((l >> (r - 1 - j)) & 1U) offsets[l] |= bit_of(num_qubits, qubits[j]);
    }
  }
  for (int q : qubits) mask |= bit_of(num_qubits, q);

  const std::uint64_t dim = static_cast<std::uint64_t>(amps.size());
  Eigen::VectorXcd local(static_cast<Eigen::Index>(local_dim));
  Eigen::VectorXcd out(static_cast<Eigen::Index>(local_dim));
  for (std::uint64_t base = 0; base < dim; ++base) {
    if (base & mask) continue;
    for (std::size_t l = 0; l < local_dim; ++l) local[static_cast<Eigen::Index>(l)] = amps[static_cast<Eigen::Index>(base | offsets[l])];
    out.noalias() = u * local;
    for (std::size_t l = 0; l < local_dim; ++l) amps[static_cast<Eigen::Index>(base | offsets[l])] = out[static_cast<Eigen::Index>(l)];
  }
}

}  // namespace

Statevector::Statevector(int num_qubits) : num_qubits_(num_qubits) {
  check_qubit_count(num_qubits);
  amps_ = Eigen::VectorXcd::Zero(Eigen::Index{1} << num_qubits);
  amps_[0] = 1.0;
}

Statevector::Statevector(int num_qubits, Eigen::VectorXcd amps)
    : num_qubits_(num_qubits), amps_(std::move(amps)) {}

Statevector Statevector::basis(int num_qubits, std::uint64_t index) {
  Statevector s(num_qubits);
  if (index >= s.dim()) throw std::out_of_range("basis index out of range");
  s.amps_[0] = 0.0;
  s.amps_[static_cast<Eigen::Index>(index)] = 1.0;
  return s;
}

Statevector Statevector::from_amplitudes(Eigen::VectorXcd amplitudes, double tolerance) {
  const int k = qubits_for_length(amplitudes.size());
  if (std::abs(amplitudes.norm() - 1.0) > tolerance)
    throw std::invalid_argument("amplitudes are not unit norm");
  return Statevector(k, std::move(amplitudes));
}

Gate Gate::rx(int qubit, double angle) { return {GateKind::rx, {qubit}, angle, nullptr}; }
Gate Gate::ry(int qubit, double angle) { return {GateKind::ry, {qubit}, angle, nullptr}; }
Gate Gate::rz(int qubit, double angle) { return {GateKind::rz, {qubit}, angle, nullptr}; }
Gate Gate::h(int qubit) { return {GateKind::h, {qubit}, 0.0, nullptr}; }
Gate Gate::x(int qubit) { return {GateKind::x, {qubit}, 0.0, nullptr}; }
Gate Gate::sdg(int qubit) { return {GateKind::sdg, {qubit}, 0.0, nullptr}; }

Gate Gate::cnot(int control, int target) {
  if (control == target) throw std::invalid_argument("CNOT control equals target");
  return {GateKind::cnot, {control, target}, 0.0, nullptr};
}

Gate Gate::dense(Eigen::MatrixXcd unitary, std::vector<int> qubits) {
  if (qubits.empty()) throw std::invalid_argument("dense gate needs target qubits");
  auto sorted = qubits;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("dense gate targets repeat a qubit");
  const Eigen::Index dim = Eigen::Index{1} << qubits.size();
  if (unitary.rows() != dim || unitary.cols() != dim)
    throw std::invalid_argument("dense gate matrix does not match its target count");
  if (!is_unitary(unitary)) throw std::invalid_argument("dense gate matrix is not unitary");
  return {GateKind::dense, std::move(qubits), 0.0,
          std::make_shared<const Eigen::MatrixXcd>(std::move(unitary))};
}

Eigen::MatrixXcd Gate::local_matrix() const {
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  const Complex i(0, 1);
  Eigen::MatrixXcd m(2, 2);
  switch (kind) {
    case GateKind::rx: m << c, -i * s, -i * s, c; return m;
    case GateKind::ry: m << c, -s, s, c; return m;
    case GateKind::rz: m << std::exp(-i * (angle / 2)), 0, 0, std::exp(i * (angle / 2)); return m;
    case GateKind::h: m << M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2; return m;
    case GateKind::x: m << 0, 1, 1, 0; return m;
    case GateKind::sdg: m << 1, 0, 0, -i; return m;
    case GateKind::cnot: {
      Eigen::MatrixXcd cx = Eigen::MatrixXcd::Zero(4, 4);
      cx(0, 0) = cx(1, 1) = cx(2, 3) = cx(3, 2) = 1;
      return cx;
    }
    case GateKind::dense: return *matrix;
  }
  return m;
}

Circuit::Circuit(int num_qubits) : num_qubits_(num_qubits) { check_qubit_count(num_qubits); }

Circuit& Circuit::add(Gate gate) {
  for (int q : gate.qubits) {
    if (q < 0 || q >= num_qubits_)
      throw std::out_of_range("gate qubit " + std::to_string(q) + " outside a " +
                              std::to_string(num_qubits_) + "-qubit circuit");
  }
  gates_.push_back(std::move(gate));
  return *this;
}

Circuit& Circuit::append(const Circuit& other) {
  if (other.num_qubits_ != num_qubits_) throw std::invalid_argument("circuit width mismatch");
  for (const auto& g : other.gates_) gates_.push_back(g);
  return *this;
}

void apply_in_place(Statevector& state, const Gate& gate) {
  const int k = state.num_qubits();
  for (int q : gate.qubits) {
    if (q < 0 || q >= k) throw std::out_of_range("gate qubit outside the state");
  }
  Eigen::VectorXcd& amps = state.data();
  const int q = gate.qubits[0];
  switch (gate.kind) {
    case GateKind::rx: apply_rx(amps, k, q, gate.angle); break;
    case GateKind::ry: apply_ry(amps, k, q, gate.angle); break;
    case GateKind::rz: {
      const Complex i(0, 1);
      const Complex m[4] = {std::exp(-i * (gate.angle / 2)), 0.0, 0.0, std::exp(i * (gate.angle / 2))};
      apply_single(amps, k, q, m);
      break;
    }
    case GateKind::h: {
      const Complex m[4] = {M_SQRT1_2, M_SQRT1_2, M_SQRT1_2, -M_SQRT1_2};
      apply_single(amps, k, q, m);
      break;
    }
    case GateKind::x: {
      const Complex m[4] = {0.0, 1.0, 1.0, 0.0};
      apply_single(amps, k, q, m);
      break;
    }
    case GateKind::sdg: {
      const Complex m[4] = {1.0, 0.0, 0.0, Complex(0, -1)};
      apply_single(amps, k, q, m);
      break;
    }
    case GateKind::cnot: apply_cnot(amps, k, gate.qubits[0], gate.qubits[1]); break;
    case GateKind::dense: apply_dense(amps, k, gate.qubits, *gate.matrix); break;
  }
}

Statevector apply_gate(Statevector state, const Gate& gate) {
  apply_in_place(state, gate);
  return state;
}

Statevector run_circuit(const Circuit& circuit, Statevector initial) {
  if (circuit.num_qubits() != initial.num_qubits())
    throw std::invalid_argument("circuit and state qubit counts differ");
  for (const auto& g : circuit.gates()) apply_in_place(initial, g);
  return initial;
}

Statevector run_circuit(const Circuit& circuit) {
  return run_circuit(circuit, Statevector(circuit.num_qubits()));
}

Eigen::MatrixXcd circuit_unitary(const Circuit& circuit) {
  const int k = circuit.num_qubits();
  const Eigen::Index dim = Eigen::Index{1} << k;
  Eigen::MatrixXcd u(dim, dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    u.col(j) = run_circuit(circuit, Statevector::basis(k, static_cast<std::uint64_t>(j))).amplitudes();
  }
  return u;
}

void apply_pauli_in_place(Statevector& state, const pauli::PauliString& p) {
  if (p.num_qubits() != state.num_qubits())
    throw std::invalid_argument("Pauli string width differs from the state");
  const std::uint64_t flip = p.flip_mask();
  const Eigen::VectorXcd in = state.amplitudes();
  Eigen::VectorXcd& out = state.data();
  for (std::uint64_t c = 0; c < state.dim(); ++c) {
    out[static_cast<Eigen::Index>(c ^ flip)] = mul(p.phase(c), in[static_cast<Eigen::Index>(c)]);
  }
}

double expectation(const Statevector& state, const pauli::PauliString& p) {
  if (p.num_qubits() != state.num_qubits())
    throw std::invalid_argument("Pauli string width differs from the state");
  const std::uint64_t flip = p.flip_mask();
  const Eigen::VectorXcd& a = state.amplitudes();
  Complex total = 0.0;
  for (std::uint64_t c = 0; c < state.dim(); ++c) {
    const Complex target = a[static_cast<Eigen::Index>(c ^ flip)];
    total += mul(std::conj(target), mul(p.phase(c), a[static_cast<Eigen::Index>(c)]));
  }
  return total.real();
}

Complex inner_product(const Statevector& a, const Statevector& b) {
  if (a.num_qubits() != b.num_qubits()) throw std::invalid_argument("state dimensions differ");
  return a.amplitudes().dot(b.amplitudes());
}

double fidelity(const Statevector& a, const Statevector& b) {
  return std::norm(inner_product(a, b));
}

Statevector canonical_phase(const Statevector& state) {
  Eigen::VectorXcd amps = state.amplitudes();
  for (Eigen::Index i = 0; i < amps.size(); ++i) {
    if (std::abs(amps[i]) > 1e-12) {
      amps *= std::polar(1.0, -std::arg(amps[i]));
      break;
    }
  }
  return Statevector::from_amplitudes(std::move(amps), 1e-6);
}

bool is_unitary(const Eigen::MatrixXcd& m, double tolerance) {
  if (m.rows() != m.cols()) return false;
  const Eigen::MatrixXcd gram = m.adjoint() * m;
  return (gram - Eigen::MatrixXcd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() <= tolerance;
}

Eigen::MatrixXcd prepare_state(const Eigen::VectorXcd& amplitudes) {
  qubits_for_length(amplitudes.size());
  if (std::abs(amplitudes.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("state preparation needs a unit-norm vector");
  const Eigen::Index dim = amplitudes.size();

  // Rotate the global phase so that the first entry is real and >= 0, then
  // reflect e0 onto the result with H = I - 2 w w^dagger / (w^dagger w).
  const Complex phase = std::abs(amplitudes[0]) > 0 ? std::polar(1.0, std::arg(amplitudes[0]))
                                                    : Complex(1.0);
  Eigen::VectorXcd u = amplitudes / phase;
  u[0] = u[0].real();
  Eigen::VectorXcd w = -u;
  w[0] += 1.0;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Identity(dim, dim);
  const double wnorm2 = w.squaredNorm();
  if (wnorm2 > 1e-30) h -= (2.0 / wnorm2) * (w * w.adjoint());
  return phase * h;
}

Eigen::MatrixXcd controlled(const Eigen::MatrixXcd& unitary) {
  if (!is_unitary(unitary)) throw std::invalid_argument("controlled() needs a unitary");
  const Eigen::Index d = unitary.rows();
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(2 * d, 2 * d);
  c.topLeftCorner(d, d).setIdentity();
  c.bottomRightCorner(d, d) = unitary;
  return c;
}

namespace {

double ancilla_zero_probability(const Statevector& s) {
  // Ancilla is qubit 0, the top half of the index range.
  return s.amplitudes().head(static_cast<Eigen::Index>(s.dim() / 2)).squaredNorm();
}

double estimate_from_probability(double p_zero, std::optional<int> shots, std::mt19937_64* rng) {
  if (!shots) return 2.0 * p_zero - 1.0;
  if (*shots <= 0) throw std::invalid_argument("shot count must be positive");
  if (rng == nullptr) throw std::invalid_argument("sampling needs a random engine");
  std::binomial_distribution<int> zeros(*shots, std::clamp(p_zero, 0.0, 1.0));
  return 2.0 * static_cast<double>(zeros(*rng)) / static_cast<double>(*shots) - 1.0;
}

}  // namespace

double hadamard_test_probability(const Eigen::MatrixXcd& unitary, OverlapPart part) {
  const int k = qubits_for_length(unitary.rows());
  if (k + 1 > kMaxQubits) throw std::invalid_argument("too many qubits for a Hadamard test");
  std::vector<int> all(static_cast<std::size_t>(k + 1));
  for (int q = 0; q <= k; ++q) all[static_cast<std::size_t>(q)] = q;

  Circuit c(k + 1);
  c.add(Gate::h(0));
  c.add(Gate::dense(controlled(unitary), all));
  if (part == OverlapPart::imaginary) c.add(Gate::sdg(0));
  c.add(Gate::h(0));
  return ancilla_zero_probability(run_circuit(c));
}

double hadamard_test(const Eigen::MatrixXcd& unitary, OverlapPart part, std::optional<int> shots,
                     std::mt19937_64* rng) {
  if (shots && *shots <= 0) throw std::invalid_argument("shot count must be positive");
  return estimate_from_probability(hadamard_test_probability(unitary, part), shots, rng);
}

double swap_test(const Statevector& a, const Statevector& b, std::optional<int> shots,
                 std::mt19937_64* rng) {
  if (a.num_qubits() != b.num_qubits()) throw std::invalid_argument("swap test state widths differ");
  if (shots && *shots <= 0) throw std::invalid_argument("shot count must be positive");
  const int k = a.num_qubits();
  const int total = 2 * k + 1;
  if (total > kMaxQubits) throw std::invalid_argument("too many qubits for a swap test");

  // |0> (x) |a> (x) |b>
  Eigen::VectorXcd joint = Eigen::VectorXcd::Zero(Eigen::Index{1} << total);
  const Eigen::Index db = static_cast<Eigen::Index>(b.dim());
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(a.dim()); ++i) {
    joint.segment(i * db, db) = a[static_cast<std::size_t>(i)] * b.amplitudes();
  }
  Statevector state = Statevector::from_amplitudes(std::move(joint), 1e-8);

  Eigen::MatrixXcd fredkin = Eigen::MatrixXcd::Identity(8, 8);
  fredkin(5, 5) = fredkin(6, 6) = 0;
  fredkin(5, 6) = fredkin(6, 5) = 1;

  apply_in_place(state, Gate::h(0));
  for (int q = 0; q < k; ++q) apply_in_place(state, Gate::dense(fredkin, {0, 1 + q, 1 + k + q}));
  apply_in_place(state, Gate::h(0));
  return estimate_from_probability(ancilla_zero_probability(state), shots, rng);
}

}  // namespace qforecast::qsim
