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

#include "qforecast/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace qforecast::pauli {

char to_char(Pauli p) {
  switch (p) {
    case Pauli::I: return 'I';
    case Pauli::X: return 'X';
    case Pauli::Y: return 'Y';
    case Pauli::Z: return 'Z';
  }
  return '?';
}

Pauli from_char(char c) {
  switch (c) {
    case 'I': return Pauli::I;
    case 'X': return Pauli::X;
    case 'Y': return Pauli::Y;
    case 'Z': return Pauli::Z;
    default:
      throw std::invalid_argument(std::string("invalid Pauli symbol '") + c + "'");
  }
}

PauliString::PauliString(std::vector<Pauli> ops) : ops_(std::move(ops)) {
  for (Pauli p : ops_) {
    if (static_cast<std::uint8_t>(p) > 3) throw std::invalid_argument("Pauli digit out of range");
  }
}

PauliString PauliString::identity(int num_qubits) {
  if (num_qubits < 1) throw std::invalid_argument("Pauli string needs at least one qubit");
  return PauliString(std::vector<Pauli>(static_cast<std::size_t>(num_qubits), Pauli::I));
}

PauliString PauliString::from_index(std::uint64_t index, int num_qubits) {
  std::vector<Pauli> ops;
  ops.reserve(static_cast<std::size_t>(num_qubits));
  for (int d : base4_digits(index, num_qubits)) ops.push_back(static_cast<Pauli>(d));
  return PauliString(std::move(ops));
}

PauliString PauliString::parse(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty Pauli string");
  std::vector<Pauli> ops;
  ops.reserve(text.size());
  for (char c : text) ops.push_back(from_char(c));
  return PauliString(std::move(ops));
}

std::string PauliString::str() const {
  std::string out;
  out.reserve(ops_.size());
  for (Pauli p : ops_) out.push_back(to_char(p));
  return out;
}

std::uint64_t PauliString::index() const {
  std::uint64_t i = 0;
  for (Pauli p : ops_) i = 4 * i + static_cast<std::uint64_t>(p);
  return i;
}

int PauliString::count(Pauli p) const {
  return static_cast<int>(std::count(ops_.begin(), ops_.end(), p));
}

std::uint64_t PauliString::flip_mask() const {
  const int k = num_qubits();
  std::uint64_t mask = 0;
  for (int q = 0; q < k; ++q) {
    if (ops_[q] == Pauli::X || ops_[q] == Pauli::Y) mask |= std::uint64_t{1} << (k - 1 - q);
  }
  return mask;
}

Complex PauliString::phase(std::uint64_t basis_index) const {
  // Y|0> = i|1>, Y|1> = -i|0>, Z|1> = -|1>.
  const int k = num_qubits();
  int quarter_turns = 0;
  for (int q = 0; q < k; ++q) {
    const bool bit = (basis_index >> (k - 1 - q)) & 1U;
    if (ops_[q] == Pauli::Y) quarter_turns += bit ? 3 : 1;
    else if (ops_[q] == Pauli::Z && bit) quarter_turns += 2;
  }
  static constexpr Complex kTurns[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  return kTurns[quarter_turns % 4];
}

std::vector<int> base4_digits(std::uint64_t index, int num_qubits) {
  if (num_qubits < 1 || num_qubits > 31) throw std::invalid_argument("qubit count out of range");
  const std::uint64_t limit = std::uint64_t{1} << (2 * num_qubits);
  if (index >= limit) throw std::out_of_range("Pauli index exceeds 4^k - 1");
  std::vector<int> digits(static_cast<std::size_t>(num_qubits));
  for (int j = num_qubits - 1; j >= 0; --j) {
    digits[static_cast<std::size_t>(j)] = static_cast<int>(index % 4);
    index /= 4;
  }
  return digits;
}

Eigen::MatrixXcd pauli_matrix(const PauliString& string) {
  const int k = string.num_qubits();
  const Eigen::Index dim = Eigen::Index{1} << k;
  const std::uint64_t flip = string.flip_mask();
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index c = 0; c < dim; ++c) {
    const auto col = static_cast<std::uint64_t>(c);
    m(static_cast<Eigen::Index>(col ^ flip), c) = string.phase(col);
  }
  return m;
}

namespace {

int qubits_for_dimension(Eigen::Index rows, Eigen::Index cols) {
  if (rows != cols) throw std::invalid_argument("matrix is not square");
  if (rows < 2 || (rows & (rows - 1)) != 0)
    throw std::invalid_argument("matrix dimension is not a power of two >= 2");
  int k = 0;
  while ((Eigen::Index{1} << k) < rows) ++k;
  return k;
}

}  // namespace

PauliDecomposition decompose(const Eigen::MatrixXcd& m, double prune_threshold) {
  const int k = qubits_for_dimension(m.rows(), m.cols());
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance * scale)
    throw std::invalid_argument("matrix is not Hermitian");

  const Eigen::Index dim = m.rows();
  const std::uint64_t count = std::uint64_t{1} << (2 * k);
  PauliDecomposition out{k, {}};
  for (std::uint64_t i = 0; i < count; ++i) {
    PauliString s = PauliString::from_index(i, k);
    // Tr(P M) = sum_r <r|P|r^f> M(r^f, r); P has one nonzero per column.
    const std::uint64_t flip = s.flip_mask();
    Complex trace = 0.0;
    for (Eigen::Index r = 0; r < dim; ++r) {
      const auto col = static_cast<std::uint64_t>(r) ^ flip;
      trace += s.phase(col) * m(static_cast<Eigen::Index>(col), r);
    }
    const Complex alpha = trace / static_cast<double>(dim);
    if (std::abs(alpha) >= prune_threshold) out.terms.push_back({alpha, std::move(s)});
  }
  return out;
}

PauliDecomposition decompose(const Eigen::MatrixXd& m, double prune_threshold) {
  return decompose(Eigen::MatrixXcd(m.cast<Complex>()), prune_threshold);
}

Eigen::MatrixXcd reconstruct(const PauliDecomposition& d) {
  const Eigen::Index dim = Eigen::Index{1} << d.num_qubits;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (const auto& term : d.terms) {
    const std::uint64_t flip = term.string.flip_mask();
    for (Eigen::Index c = 0; c < dim; ++c) {
      const auto col = static_cast<std::uint64_t>(c);
      m(static_cast<Eigen::Index>(col ^ flip), c) += term.alpha * term.string.phase(col);
    }
  }
  return m;
}

PauliDecomposition prune(PauliDecomposition d, double epsilon) {
  if (epsilon < 0) throw std::invalid_argument("prune epsilon must be >= 0");
  std::erase_if(d.terms, [epsilon](const PauliTerm& t) { return std::abs(t.alpha) < epsilon; });
  return d;
}

std::string format_listing(const PauliDecomposition& d) {
  std::string out;
  char buf[64];
  for (const auto& term : d.terms) {
    std::snprintf(buf, sizeof buf, "%.12g", term.alpha.real());
    out += buf;
    out += '\t';
    out += term.string.str();
    out += '\n';
  }
  return out;
}

}  // namespace qforecast::pauli
