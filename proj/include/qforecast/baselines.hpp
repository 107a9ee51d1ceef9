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
#include <vector>

#include <Eigen/Dense>

namespace qforecast::baselines {

/** Linear autoregression without intercept: prediction = w . window. */
struct LinearModel {
  Eigen::VectorXd w;
  bool fitted = false;

  double predict(std::span<const double> window) const;
};

/** Least-squares fit through the normal equations (pseudo-inverse when X is
 * rank deficient). Throws std::invalid_argument on empty data. */
LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/** Fully connected net in -> h1 -> h2 -> 1, ReLU on the hidden layers. */
struct MlpModel {
  Eigen::MatrixXd w1;  // h1 x in
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;  // h2 x h1
  Eigen::VectorXd b2;
  Eigen::RowVectorXd w3;  // 1 x h2
  double b3 = 0.0;

  int input_size() const { return static_cast<int>(w1.cols()); }
  int parameter_count() const;

  /** Zero weights with the given layer sizes. */
  static MlpModel zeros(int input, int hidden1, int hidden2);
  /** Glorot-uniform weights, zero biases. */
  static MlpModel initial(int input, int hidden1, int hidden2, std::uint64_t seed);

  /** Parameters flattened as w1 (row-major), b1, w2, b2, w3, b3. */
  Eigen::VectorXd flatten() const;
  void assign(const Eigen::VectorXd& params);

  void validate() const;
};

double mlp_forward(const MlpModel& model, std::span<const double> window);

struct MlpGradient {
  double loss = 0.0;  // (prediction - label)^2
  MlpModel grad;      // same shapes as the model
};

/** Reverse-mode gradient of (forward - label)^2. ReLU'(0) is taken as 0. */
MlpGradient mlp_backward(const MlpModel& model, std::span<const double> window, double label);

struct MlpTrainConfig {
  int epochs = 2000;
  double learning_rate = 0.01;
  double momentum = 0.9;
};

struct MlpTrainResult {
  MlpModel model;
  /** Training MSE before each epoch's update. */
  std::vector<double> trace;
  bool diverged = false;
};

/** Full-batch gradient descent with momentum on the mean squared error. */
MlpTrainResult mlp_train(MlpModel model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const MlpTrainConfig& config = {});

double mlp_mse(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

double mse(std::span<const double> predictions, std::span<const double> actuals);

void save_linear(const LinearModel& model, std::ostream& out);
LinearModel load_linear(std::istream& in);
void save_mlp(const MlpModel& model, std::ostream& out);
MlpModel load_mlp(std::istream& in);

}  // namespace qforecast::baselines
