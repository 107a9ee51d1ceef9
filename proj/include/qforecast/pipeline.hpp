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
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qforecast/linsys.hpp"

namespace qforecast::pipeline {

using linsys::Date;
using linsys::TimeSeries;

// ---- data generation -------------------------------------------------------

/**
 * value_t = (base + trend * t) * growth^t * (1 + amplitude * sin(2 pi (t + phase) / 12)) + noise_t,
 * clipped at zero, with noise_t ~ N(0, noise^2).
 */
struct GeneratorConfig {
  Date start{std::chrono::year{2019}, std::chrono::January, std::chrono::day{1}};
  int num_months = 67;
  double base = 1.2e6;
  double trend = 1.5e4;
  double amplitude = 0.3;
  double phase = 0.0;
  double noise = 1.0e5;
  double growth = 1.01;
  std::uint64_t seed = 0;

  void validate() const;
};

TimeSeries generate(const GeneratorConfig& config);

/** Independent sub-seed for a named consumer of `seed`. */
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

// ---- files -----------------------------------------------------------------

/** Two-column CSV `Date,<value_header>`. */
std::string series_csv(const TimeSeries& series, std::string_view value_header = "Sales");

/** Accepts a `Date,<name>` header. Errors name the source and line. */
TimeSeries parse_series_csv(std::istream& in, std::string_view source = "<input>");
TimeSeries read_series_csv(const std::filesystem::path& path);

/** Comma-separated reals, one matrix row per line. */
Eigen::MatrixXd parse_matrix_csv(std::istream& in, std::string_view source = "<input>");
/** A single row or a single column of reals. */
Eigen::VectorXd parse_vector_csv(std::istream& in, std::string_view source = "<input>");

std::string read_file(const std::filesystem::path& path);
/** Writes to a sibling temporary file and renames it over `path`. */
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// ---- preprocessing ---------------------------------------------------------

inline const Date kDefaultSplit{std::chrono::year{2021}, std::chrono::September, std::chrono::day{1}};

struct Preprocessed {
  TimeSeries raw;
  TimeSeries diffs;
  TimeSeries scaled;
  linsys::Scaler scaler{linsys::kDefaultHalfWidth, 1.0};
  Date split = kDefaultSplit;
  /** Differences dated before the split. */
  std::size_t train_count = 0;
};

/** Differences the series, then fits the scaler on differences dated before
 * `split`. */
Preprocessed preprocess(const TimeSeries& raw, Date split = kDefaultSplit,
                        double half_width = linsys::kDefaultHalfWidth);

/** Supervised rows over the scaled differences: a target at position t is
 * training data when dated before the split and test data otherwise. */
struct Dataset {
  int window = 0;
  Eigen::MatrixXd train_x, test_x;
  Eigen::VectorXd train_y, test_y;
  std::vector<std::size_t> train_pos, test_pos;  // target positions in `scaled`
};

/** Throws std::invalid_argument when fewer than window + 2 training
 * differences exist or nothing follows the split. */
Dataset make_dataset(const Preprocessed& data, int window);

// ---- models and reports ----------------------------------------------------

enum class ModelKind { pqc_cobyla, pqc_lbfgs, linear, mlp, vqls };

ModelKind parse_model(std::string_view name);
std::string_view model_name(ModelKind kind);

struct PipelineConfig {
  std::vector<ModelKind> models{ModelKind::pqc_cobyla, ModelKind::pqc_lbfgs, ModelKind::linear, ModelKind::mlp,
                                ModelKind::vqls};
  Date split = kDefaultSplit;
  std::uint64_t seed = 0;
  int pqc_max_iters = 300;
  int mlp_epochs = 2000;
  double mlp_learning_rate = 0.01;
  int vqls_qubits = 2;
  int vqls_layers = -1;  // negative: default for the qubit count
  int vqls_restarts = 5;
  int vqls_max_iters = 3000;
  std::optional<int> vqls_shots;
  bool unnormalized_cost = false;
};

struct PredictionRow {
  Date date;
  double actual = 0.0;     // euros
  double predicted = 0.0;  // euros
};

struct ModelRun {
  ModelKind kind = ModelKind::linear;
  int window = 0;
  double train_mse = 0.0;
  double test_mse = 0.0;
  /** Scaled one-step predictions at the training and test targets. */
  Eigen::VectorXd train_pred, test_pred;
  /** Every training and test target, by date. */
  std::vector<PredictionRow> predictions;
  /** Loss per objective evaluation (per epoch for the MLP); empty for the
   * closed-form linear fit. */
  std::vector<double> trace;
  /** Weights of the linear-system models (linear, vqls). */
  Eigen::VectorXd weights;
  std::optional<double> condition;
  /** Trained model in its persistence format (empty for vqls). */
  std::string model_file;
  double initial_loss = 0.0;
  bool converged = true;
};

struct RunReport {
  Preprocessed data;
  std::vector<ModelRun> runs;

  /** Aligned table with five-decimal MSEs, then conditioning and
   * convergence notes for the linear-system models. */
  std::string table() const;
  /** `model,train_mse,test_mse,condition,converged`. */
  std::string csv() const;
  bool all_converged() const;
};

RunReport run_pipeline(const TimeSeries& raw, const PipelineConfig& config);

/** `Date,Actual,Predicted`. */
std::string predictions_csv(const std::vector<PredictionRow>& rows);
std::vector<PredictionRow> parse_predictions_csv(std::istream& in, std::string_view source = "<input>");
/** `<index_name>,<value_name>` with 1-based indices. */
std::string trace_csv(const std::vector<double>& trace, std::string_view value_name = "loss",
                      std::string_view index_name = "iteration");

// ---- evaluation ------------------------------------------------------------

struct EvalRow {
  std::string name;
  double train_mse = 0.0;
  double test_mse = 0.0;
  std::size_t train_count = 0;
  std::size_t test_count = 0;
};

/**
 * MSEs on the preprocessed scale of euro predictions against `actuals`
 * preprocessed with the same split. Throws std::invalid_argument naming the
 * first prediction date without an actual value.
 */
EvalRow evaluate(std::string name, const std::vector<PredictionRow>& predictions, const TimeSeries& actuals,
                 Date split = kDefaultSplit);

std::string format_table(const std::vector<EvalRow>& rows);
std::string format_eval_csv(const std::vector<EvalRow>& rows);

}  // namespace qforecast::pipeline
