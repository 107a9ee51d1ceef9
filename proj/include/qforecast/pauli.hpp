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
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qforecast::pauli {

using Complex = std::complex<double>;

/** Single-qubit Pauli symbols; the numeric value is the base-4 digit. */
enum class Pauli : std::uint8_t { I = 0, X = 1, Y = 2, Z = 3 };

char to_char(Pauli p);
Pauli from_char(char c);

/**
 * Tensor product of single-qubit Paulis, one symbol per qubit.
 *
 * Position j holds the factor acting on qubit j. Qubit 0 is the leftmost
 * tensor factor, i.e. the most significant bit of a basis-state index. This
 * is the same convention the simulator uses, so `pauli_matrix(s)` and
 * applying `s` gate by gate to a statevector agree.
 */
class PauliString {
 public:
  PauliString() = default;
  explicit PauliString(std::vector<Pauli> ops);

  static PauliString identity(int num_qubits);

  /** String whose position j is the j-th base-4 digit of `index`, most
   * significant first (see base4_digits). */
  static PauliString from_index(std::uint64_t index, int num_qubits);

  /** Parses strings over {I, X, Y, Z}, e.g. "IXZY". */
  static PauliString parse(std::string_view text);

  int num_qubits() const { return static_cast<int>(ops_.size()); }
  Pauli operator[](int qubit) const { return ops_.at(qubit); }
  const std::vector<Pauli>& ops() const { return ops_; }

  std::string str() const;
  std::uint64_t index() const;
  int count(Pauli p) const;

  /** Basis-index bits flipped by the string (X or Y factors). */
  std::uint64_t flip_mask() const;

  /**
   * Phase picked up by basis state |c>: P|c> = phase(c) |c ^ flip_mask()>.
   */
  Complex phase(std::uint64_t basis_index) const;

  bool operator==(const PauliString&) const = default;

 private:
  std::vector<Pauli> ops_;
};

/**
 * Base-4 digits of `index`, most significant first. Digit j selects the Pauli
 * on qubit j, so index 6 on 7 qubits gives 0000012.
 */
std::vector<int> base4_digits(std::uint64_t index, int num_qubits);

/** Dense 2^k x 2^k matrix of the string. */
Eigen::MatrixXcd pauli_matrix(const PauliString& string);

struct PauliTerm {
  Complex alpha;
  PauliString string;
};

struct PauliDecomposition {
  int num_qubits = 0;
  std::vector<PauliTerm> terms;
};

inline constexpr double kDefaultPruneThreshold = 1e-12;
inline constexpr double kHermitianTolerance = 1e-8;

/**
 * Computes alpha_i = Tr(M_i M) / 2^k for all 4^k strings and drops those
 * with |alpha_i| below `prune_threshold`.
 *
 * Throws std::invalid_argument for non-square, non-power-of-two, or
 * non-Hermitian input.
 */
PauliDecomposition decompose(const Eigen::MatrixXcd& m,
                             double prune_threshold = kDefaultPruneThreshold);
PauliDecomposition decompose(const Eigen::MatrixXd& m,
                             double prune_threshold = kDefaultPruneThreshold);

Eigen::MatrixXcd reconstruct(const PauliDecomposition& d);

/** Removes terms with |alpha| < epsilon. */
PauliDecomposition prune(PauliDecomposition d, double epsilon);

/** One `alpha<TAB>string` line per term. */
std::string format_listing(const PauliDecomposition& d);

}  // namespace qforecast::pauli
