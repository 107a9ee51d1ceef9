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

#include <cstdint>
#include <iosfwd>
#include <span>

#include <Eigen/Dense>

#include "qforecast/optimize.hpp"
#include "qforecast/pauli.hpp"
#include "qforecast/qsim.hpp"

namespace qforecast::pqc {

enum class Readout {
  pauli,   // <observable>
  mean_z,  // average of <Z_q> over all qubits
};

/**
 * Regressor circuit:
 *
 *   RY(feature_scale * x_q) on every qubit q,
 *   CNOT(0,1) CNOT(2,3) ... CNOT(n-2,n-1),
 *   RX(theta[0][q]) RY(theta[0][q]) on every qubit,
 *   CNOT(1,2) CNOT(3,4) ... CNOT(n-1,0),
 *   RX(theta[1][q]) RY(theta[1][q]) on every qubit,
 *
 * followed by the readout. `theta` is stored layer-major, qubit-minor, RX
 * before RY: index = 2 * n * layer + 2 * q + (0 for RX, 1 for RY).
 */
struct PqcModel {
  int num_qubits = 12;
  Eigen::VectorXd theta;
  pauli::PauliString observable;
  Readout readout = Readout::pauli;
  double feature_scale = 1.0;

  static constexpr int kLayers = 2;
  int parameter_count() const { return 2 * kLayers * num_qubits; }

  /** Z on qubit 0, theta uniform in [-0.1, 0.1] from `seed`. */
  static PqcModel initial(int num_qubits, std::uint64_t seed);
  /** Z on qubit 0, theta = 0. */
  static PqcModel zeros(int num_qubits);

  void validate() const;
};

qsim::Circuit feature_map(const PqcModel& model, std::span<const double> window);
qsim::Circuit model_circuit(const PqcModel& model, std::span<const double> window);

double predict(const PqcModel& model, std::span<const double> window);

/** Mean of (predict - label)^2 over the rows of `windows`. */
double loss(const PqcModel& model, const Eigen::MatrixXd& windows, const Eigen::VectorXd& labels);

enum class GradientMethod { parameter_shift, finite_difference, none };

/** Gradient of `loss` in theta. Parameter shift evaluates every rotation at
 * theta +- pi/2; finite differences use central steps of size `h`. */
Eigen::VectorXd gradient(const PqcModel& model, const Eigen::MatrixXd& windows, const Eigen::VectorXd& labels,
                         GradientMethod method, double h = 1e-5);

struct TrainConfig {
  optimize::Method optimizer = optimize::Method::lbfgs;
  int max_iters = 300;
  /** Seeds theta when the model arrives without parameters. */
  std::uint64_t seed = 0;
  GradientMethod gradient = GradientMethod::parameter_shift;
  double initial_step = 0.5;
};

struct TrainResult {
  PqcModel model;
  optimize::OptimTrace trace;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  bool diverged = false;
};

TrainResult train(PqcModel model, const Eigen::MatrixXd& windows, const Eigen::VectorXd& labels,
                  const TrainConfig& config);

void save_model(const PqcModel& model, std::ostream& out);
PqcModel load_model(std::istream& in);

}  // namespace qforecast::pqc
