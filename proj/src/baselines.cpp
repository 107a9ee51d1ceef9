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

#include "qforecast/baselines.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qforecast/linsys.hpp"

namespace qforecast::baselines {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  if (x.rows() == 0 || x.cols() == 0) throw std::invalid_argument("empty data");
  if (x.rows() != y.size()) throw std::invalid_argument("row and label counts differ");
}

std::string expect_header(std::istream& in, const std::string& key) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("model file ends before '" + key + "'");
  std::istringstream ls(line);
  std::string name, rest;
  ls >> name;
  std::getline(ls >> std::ws, rest);
  if (name != key) throw std::invalid_argument("model file: expected '" + key + "', found '" + name + "'");
  return rest;
}

Eigen::VectorXd read_values(std::istream& in, Eigen::Index count) {
  Eigen::VectorXd v(count);
  for (Eigen::Index i = 0; i < count; ++i) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("model file has too few parameters");
    v[i] = std::stod(line);
  }
  return v;
}

}  // namespace

double LinearModel::predict(std::span<const double> window) const {
  if (!fitted) throw std::logic_error("linear model is not fitted");
  return linsys::predict_next(w, window);
}

LinearModel fit_linear(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_data(x, y);
  linsys::NormalSystem system;
  system.a = x.transpose() * x;
  system.a = 0.5 * (system.a + system.a.transpose()).eval();
  system.b = x.transpose() * y;
  return {linsys::solve_classical(system), true};
}

int MlpModel::parameter_count() const {
  return static_cast<int>(w1.size() + b1.size() + w2.size() + b2.size() + w3.size() + 1);
}

MlpModel MlpModel::zeros(int input, int hidden1, int hidden2) {
  if (input < 1 || hidden1 < 1 || hidden2 < 1) throw std::invalid_argument("layer sizes must be positive");
  MlpModel m;
  m.w1 = Eigen::MatrixXd::Zero(hidden1, input);
  m.b1 = Eigen::VectorXd::Zero(hidden1);
  m.w2 = Eigen::MatrixXd::Zero(hidden2, hidden1);
  m.b2 = Eigen::VectorXd::Zero(hidden2);
  m.w3 = Eigen::RowVectorXd::Zero(hidden2);
  return m;
}

MlpModel MlpModel::initial(int input, int hidden1, int hidden2, std::uint64_t seed) {
  MlpModel m = zeros(input, hidden1, hidden2);
  std::mt19937_64 rng(seed);
  auto fill = [&](auto& w) {
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = u(rng);
  };
  fill(m.w1);
  fill(m.w2);
  fill(m.w3);
  return m;
}

Eigen::VectorXd MlpModel::flatten() const {
  Eigen::VectorXd p(parameter_count());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < w1.rows(); ++r)
    for (Eigen::Index c = 0; c < w1.cols(); ++c) p[k++] = w1(r, c);
  for (Eigen::Index i = 0; i < b1.size(); ++i) p[k++] = b1[i];
  for (Eigen::Index r = 0; r < w2.rows(); ++r)
    for (Eigen::Index c = 0; c < w2.cols(); ++c) p[k++] = w2(r, c);
  for (Eigen::Index i = 0; i < b2.size(); ++i) p[k++] = b2[i];
  for (Eigen::Index i = 0; i < w3.size(); ++i) p[k++] = w3[i];
  p[k] = b3;
  return p;
}

void MlpModel::assign(const Eigen::VectorXd& p) {
  if (p.size() != parameter_count()) throw std::invalid_argument("parameter vector has the wrong length");
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < w1.rows(); ++r)
    for (Eigen::Index c = 0; c < w1.cols(); ++c) w1(r, c) = p[k++];
  for (Eigen::Index i = 0; i < b1.size(); ++i) b1[i] = p[k++];
  for (Eigen::Index r = 0; r < w2.rows(); ++r)
    for (Eigen::Index c = 0; c < w2.cols(); ++c) w2(r, c) = p[k++];
  for (Eigen::Index i = 0; i < b2.size(); ++i) b2[i] = p[k++];
  for (Eigen::Index i = 0; i < w3.size(); ++i) w3[i] = p[k++];
  b3 = p[k];
}

void MlpModel::validate() const {
  if (w1.size() == 0 || b1.size() != w1.rows() || w2.cols() != w1.rows() || b2.size() != w2.rows() ||
      w3.size() != w2.rows())
    throw std::invalid_argument("inconsistent network shapes");
}

double mlp_forward(const MlpModel& model, std::span<const double> window) {
  model.validate();
  if (static_cast<int>(window.size()) != model.input_size())
    throw std::invalid_argument("window has " + std::to_string(window.size()) + " values, network expects " +
                                std::to_string(model.input_size()));
  const Eigen::VectorXd h1 = (model.w1 * as_vector(window) + model.b1).cwiseMax(0.0);
  const Eigen::VectorXd h2 = (model.w2 * h1 + model.b2).cwiseMax(0.0);
  return model.w3.dot(h2) + model.b3;
}

MlpGradient mlp_backward(const MlpModel& model, std::span<const double> window, double label) {
  model.validate();
  if (static_cast<int>(window.size()) != model.input_size())
    throw std::invalid_argument("window length differs from the network input size");
  const auto x = as_vector(window);
  const Eigen::VectorXd z1 = model.w1 * x + model.b1;
  const Eigen::VectorXd h1 = z1.cwiseMax(0.0);
  const Eigen::VectorXd z2 = model.w2 * h1 + model.b2;
  const Eigen::VectorXd h2 = z2.cwiseMax(0.0);
  const double out = model.w3.dot(h2) + model.b3;

  MlpGradient g;
  const double e = out - label;
  g.loss = e * e;
  const double d_out = 2.0 * e;
  g.grad.b3 = d_out;
  g.grad.w3 = d_out * h2.transpose();
  const Eigen::VectorXd d_z2 = (d_out * model.w3.transpose()).cwiseProduct((z2.array() > 0.0).cast<double>().matrix());
  g.grad.b2 = d_z2;
  g.grad.w2 = d_z2 * h1.transpose();
  const Eigen::VectorXd d_z1 = (model.w2.transpose() * d_z2).cwiseProduct((z1.array() > 0.0).cast<double>().matrix());
  g.grad.b1 = d_z1;
  g.grad.w1 = d_z1 * x.transpose();
  return g;
}

double mlp_mse(const MlpModel& model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
  check_data(x, y);
  double total = 0;
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
    const double e = mlp_forward(model, row) - y[r];
    total += e * e;
  }
  return total / static_cast<double>(x.rows());
}

MlpTrainResult mlp_train(MlpModel model, const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const MlpTrainConfig& config) {
  check_data(x, y);
  model.validate();
  if (config.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (!(config.learning_rate > 0)) throw std::invalid_argument("learning rate must be positive");

  MlpTrainResult result;
  Eigen::VectorXd params = model.flatten();
  Eigen::VectorXd velocity = Eigen::VectorXd::Zero(params.size());
  std::vector<double> row(static_cast<std::size_t>(x.cols()));
  const double inv_n = 1.0 / static_cast<double>(x.rows());

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    double loss = 0;
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      for (Eigen::Index c = 0; c < x.cols(); ++c) row[static_cast<std::size_t>(c)] = x(r, c);
      const MlpGradient g = mlp_backward(model, row, y[r]);
      loss += g.loss;
      grad += g.grad.flatten();
    }
    loss *= inv_n;
    result.trace.push_back(loss);
    if (!std::isfinite(loss) || !grad.allFinite()) {
      result.diverged = true;
      break;
    }
    velocity = config.momentum * velocity - config.learning_rate * inv_n * grad;
    params += velocity;
    model.assign(params);
  }
  result.model = std::move(model);
  return result;
}

double mse(std::span<const double> predictions, std::span<const double> actuals) {
  if (predictions.empty()) throw std::invalid_argument("mse of an empty sequence");
  if (predictions.size() != actuals.size()) throw std::invalid_argument("mse of sequences with different lengths");
  double total = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double e = predictions[i] - actuals[i];
    total += e * e;
  }
  return total / static_cast<double>(predictions.size());
}

void save_linear(const LinearModel& model, std::ostream& out) {
  if (!model.fitted) throw std::logic_error("linear model is not fitted");
  out << "model linear\n";
  out << "window " << model.w.size() << '\n';
  for (Eigen::Index i = 0; i < model.w.size(); ++i) out << fmt(model.w[i]) << '\n';
}

LinearModel load_linear(std::istream& in) {
  if (expect_header(in, "model") != "linear") throw std::invalid_argument("model file is not a linear model");
  const int m = std::stoi(expect_header(in, "window"));
  if (m < 1) throw std::invalid_argument("model file: window must be positive");
  return {read_values(in, m), true};
}

void save_mlp(const MlpModel& model, std::ostream& out) {
  model.validate();
  out << "model mlp\n";
  out << "layers " << model.w1.cols() << ' ' << model.w1.rows() << ' ' << model.w2.rows() << " 1\n";
  const Eigen::VectorXd p = model.flatten();
  for (Eigen::Index i = 0; i < p.size(); ++i) out << fmt(p[i]) << '\n';
}

MlpModel load_mlp(std::istream& in) {
  if (expect_header(in, "model") != "mlp") throw std::invalid_argument("model file is not an mlp model");
  std::istringstream sizes(expect_header(in, "layers"));
  int input = 0, h1 = 0, h2 = 0, outputs = 0;
  if (!(sizes >> input >> h1 >> h2 >> outputs) || outputs != 1)
    throw std::invalid_argument("model file: bad layer sizes");
  MlpModel m = MlpModel::zeros(input, h1, h2);
  m.assign(read_values(in, m.parameter_count()));
  return m;
}

}  // namespace qforecast::baselines
