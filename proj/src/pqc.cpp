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

#include "qforecast/pqc.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace qforecast::pqc {

namespace {

pauli::PauliString z_on_first(int num_qubits) {
  std::vector<pauli::Pauli> ops(static_cast<std::size_t>(num_qubits), pauli::Pauli::I);
  ops[0] = pauli::Pauli::Z;
  return pauli::PauliString(std::move(ops));
}

// Gate list of model_circuit with each trainable gate tagged by its
// parameter index (-1 for fixed gates).
struct Program {
  std::vector<qsim::Gate> gates;
  std::vector<int> param;
};

Program build_program(const PqcModel& model, std::span<const double> window) {
  model.validate();
  const int n = model.num_qubits;
  if (static_cast<int>(window.size()) != n)
    throw std::invalid_argument("window has " + std::to_string(window.size()) + " values, model expects " +
                                std::to_string(n));
  Program p;
  p.gates.reserve(static_cast<std::size_t>(6 * n));
  auto fixed = [&](qsim::Gate g) {
    p.gates.push_back(std::move(g));
    p.param.push_back(-1);
  };
  auto rotation_layer = [&](int layer) {
    for (int q = 0; q < n; ++q) {
      const int base = 2 * n * layer + 2 * q;
      p.gates.push_back(qsim::Gate::rx(q, model.theta[base]));
      p.param.push_back(base);
      p.gates.push_back(qsim::Gate::ry(q, model.theta[base + 1]));
      p.param.push_back(base + 1);
    }
  };
  for (int q = 0; q < n; ++q) fixed(qsim::Gate::ry(q, model.feature_scale * window[static_cast<std::size_t>(q)]));
  for (int q = 0; q + 1 < n; q += 2) fixed(qsim::Gate::cnot(q, q + 1));
  rotation_layer(0);
  for (int q = 1; q < n; q += 2) fixed(qsim::Gate::cnot(q, (q + 1) % n));
  rotation_layer(1);
  return p;
}

double readout(const PqcModel& model, const qsim::Statevector& state) {
  if (model.readout == Readout::pauli) return qsim::expectation(state, model.observable);
  const int n = model.num_qubits;
  double total = 0;
  const Eigen::VectorXcd& a = state.amplitudes();
  for (std::uint64_t i = 0; i < state.dim(); ++i) {
    const double p = std::norm(a[static_cast<Eigen::Index>(i)]);
    const int ones = std::popcount(i);
    total += p * static_cast<double>(n - 2 * ones);
  }
  return total / n;
}

double run_program(const PqcModel& model, const Program& p) {
  qsim::Statevector s(model.num_qubits);
  for (const auto& g : p.gates) qsim::apply_in_place(s, g);
  return readout(model, s);
}

void check_dataset(const PqcModel& model, const Eigen::MatrixXd& windows, const Eigen::VectorXd& labels) {
  if (windows.rows() == 0) throw std::invalid_argument("empty dataset");
  if (windows.rows() != labels.size()) throw std::invalid_argument("window and label counts differ");
  if (windows.cols() != model.num_qubits) throw std::invalid_argument("window width differs from the qubit count");
}

std::vector<double> row(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] = m(r, j);
  return out;
}

Eigen::VectorXd parameter_shift(const PqcModel& model, const Eigen::MatrixXd& windows,
                                const Eigen::VectorXd& labels) {
  const Eigen::Index count = windows.rows();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(model.parameter_count());
  constexpr double kShift = std::numbers::pi / 2;
  for (Eigen::Index r = 0; r < count; ++r) {
    const Program p = build_program(model, row(windows, r));
    // Forward pass, keeping the state in front of every trainable gate.
    std::vector<qsim::Statevector> before;
    std::vector<std::size_t> position;
    qsim::Statevector s(model.num_qubits);
    for (std::size_t g = 0; g < p.gates.size(); ++g) {
      if (p.param[g] >= 0) {
        before.push_back(s);
        position.push_back(g);
      }
      qsim::apply_in_place(s, p.gates[g]);
    }
    const double residual = readout(model, s) - labels[r];

    for (std::size_t k = 0; k < position.size(); ++k) {
      const std::size_t g0 = position[k];
      double shifted[2];
      for (int side = 0; side < 2; ++side) {
        qsim::Statevector t = before[k];
        qsim::Gate moved = p.gates[g0];
        moved.angle += side == 0 ? kShift : -kShift;
        qsim::apply_in_place(t, moved);
        for (std::size_t g = g0 + 1; g < p.gates.size(); ++g) qsim::apply_in_place(t, p.gates[g]);
        shifted[side] = readout(model, t);
      }
      const double d_pred = 0.5 * (shifted[0] - shifted[1]);
      grad[p.param[g0]] += 2.0 * residual * d_pred;
    }
  }
  return grad / static_cast<double>(count);
}

}  // namespace

PqcModel PqcModel::initial(int num_qubits, std::uint64_t seed) {
  PqcModel m = zeros(num_qubits);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.1, 0.1);
  for (Eigen::Index i = 0; i < m.theta.size(); ++i) m.theta[i] = u(rng);
  return m;
}

PqcModel PqcModel::zeros(int num_qubits) {
  if (num_qubits < 2 || num_qubits % 2 != 0 || num_qubits > qsim::kMaxQubits)
    throw std::invalid_argument("the regressor needs an even qubit count between 2 and 16");
  PqcModel m;
  m.num_qubits = num_qubits;
  m.theta = Eigen::VectorXd::Zero(2 * kLayers * num_qubits);
  m.observable = z_on_first(num_qubits);
  return m;
}

void PqcModel::validate() const {
  if (num_qubits < 2 || num_qubits % 2 != 0 || num_qubits > qsim::kMaxQubits)
    throw std::invalid_argument("the regressor needs an even qubit count between 2 and 16");
  if (theta.size() != parameter_count())
    throw std::invalid_argument("model has " + std::to_string(theta.size()) + " parameters, expected " +
                                std::to_string(parameter_count()));
  if (readout == Readout::pauli && observable.num_qubits() != num_qubits)
    throw std::invalid_argument("observable width differs from the qubit count");
}

qsim::Circuit feature_map(const PqcModel& model, std::span<const double> window) {
  if (static_cast<int>(window.size()) != model.num_qubits)
    throw std::invalid_argument("window length differs from the qubit count");
  qsim::Circuit c(model.num_qubits);
  for (int q = 0; q < model.num_qubits; ++q)
    c.add(qsim::Gate::ry(q, model.feature_scale * window[static_cast<std::size_t>(q)]));
  return c;
}

qsim::Circuit model_circuit(const PqcModel& model, std::span<const double> window) {
  Program p = build_program(model, window);
  qsim::Circuit c(model.num_qubits);
  for (auto& g : p.gates) c.add(std::move(g));
  return c;
}

double predict(const PqcModel& model, std::span<const double> window) {
  return run_program(model, build_program(model, window));
}

double loss(const PqcModel& model, const Eigen::MatrixXd& windows, const Eigen::VectorXd& labels) {
  check_dataset(model, windows, labels);
  double total = 0;
  for (Eigen::Index r = 0; r < windows.rows(); ++r) {
    const double e = predict(model, row(windows, r)) - labels[r];
    total += e * e;
  }
  return total / static_cast<double>(windows.rows());
}

Eigen::VectorXd gradient(const PqcModel& model, const Eigen::MatrixXd& windows, const Eigen::VectorXd& labels,
                         GradientMethod method, double h) {
  check_dataset(model, windows, labels);
  switch (method) {
    case GradientMethod::parameter_shift: return parameter_shift(model, windows, labels);
    case GradientMethod::finite_difference: {
      PqcModel probe = model;
      return optimize::finite_diff_gradient(
          [&](const Eigen::VectorXd& theta) {
            probe.theta = theta;
            return loss(probe, windows, labels);
          },
          model.theta, h);
    }
    case GradientMethod::none: break;
  }
  throw std::invalid_argument("gradient requested with gradient method 'none'");
}

TrainResult train(PqcModel model, const Eigen::MatrixXd& windows, const Eigen::VectorXd& labels,
                  const TrainConfig& config) {
  if (model.theta.size() == 0) {
    const PqcModel seeded = PqcModel::initial(model.num_qubits, config.seed);
    model.theta = seeded.theta;
    if (model.observable.num_qubits() == 0) model.observable = seeded.observable;
  }
  check_dataset(model, windows, labels);
  model.validate();
  if (config.max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (config.optimizer == optimize::Method::lbfgs && config.gradient == GradientMethod::none)
    throw std::invalid_argument("the quasi-Newton optimizer needs a gradient method");

  PqcModel probe = model;
  optimize::Objective objective;
  objective.evaluate = [&](const Eigen::VectorXd& theta) {
    probe.theta = theta;
    return loss(probe, windows, labels);
  };
  if (config.gradient != GradientMethod::none) {
    objective.gradient = [&](const Eigen::VectorXd& theta) {
      probe.theta = theta;
      return gradient(probe, windows, labels, config.gradient);
    };
  }
  optimize::OptimOptions options;
  options.max_iters = config.max_iters;
  options.initial_step = config.initial_step;

  TrainResult result;
  optimize::OptimResult run = optimize::minimize(config.optimizer, objective, model.theta, options);
  result.initial_loss = run.trace.entries.front().value;
  result.final_loss = run.f_best;
  result.diverged = !std::isfinite(run.f_best);
  model.theta = run.x_best;
  result.model = std::move(model);
  result.trace = std::move(run.trace);
  return result;
}

void save_model(const PqcModel& model, std::ostream& out) {
  model.validate();
  out << "num_qubits " << model.num_qubits << '\n';
  out << "observable " << (model.readout == Readout::mean_z ? std::string("mean-z") : model.observable.str()) << '\n';
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", model.feature_scale);
  out << "feature_scale " << buf << '\n';
  for (Eigen::Index i = 0; i < model.theta.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g", model.theta[i]);
    out << buf << '\n';
  }
}

PqcModel load_model(std::istream& in) {
  auto header = [&](const char* key) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument(std::string("model file ends before '") + key + "'");
    std::istringstream ls(line);
    std::string name, value;
    ls >> name >> value;
    if (name != key || value.empty()) throw std::invalid_argument(std::string("model file: expected '") + key + "'");
    return value;
  };
  const int n = std::stoi(header("num_qubits"));
  PqcModel m = PqcModel::zeros(n);
  const std::string obs = header("observable");
  if (obs == "mean-z") m.readout = Readout::mean_z;
  else m.observable = pauli::PauliString::parse(obs);
  m.feature_scale = std::stod(header("feature_scale"));
  for (Eigen::Index i = 0; i < m.theta.size(); ++i) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("model file has too few parameters");
    m.theta[i] = std::stod(line);
  }
  m.validate();
  return m;
}

}  // namespace qforecast::pqc
