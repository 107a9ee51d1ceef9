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

// qforecast: data generation, preprocessing, model training and evaluation.
//
// Exit codes: 0 success, 1 input error, 2 a model or solver failed its
// convergence check (outputs are still written).

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qforecast/linsys.hpp"
#include "qforecast/pauli.hpp"
#include "qforecast/pipeline.hpp"
#include "qforecast/vqls.hpp"

namespace fs = std::filesystem;
namespace qp = qforecast::pipeline;
using qforecast::linsys::Date;

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 1;
constexpr int kNotConverged = 2;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") std::cout << content;
  else qp::write_file_atomic(path, content);
}

Date split_or_default(const std::string& text) {
  return text.empty() ? qp::kDefaultSplit : qforecast::linsys::parse_date(text);
}

std::string weights_csv(const Eigen::VectorXd& w) {
  std::string out = "w\n";
  for (Eigen::Index i = 0; i < w.size(); ++i) out += fmt("%.17g", w[i]) + "\n";
  return out;
}

struct Common {
  std::string input;
  std::string split;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("-i,--input", c.input, "Series CSV (Date,Sales)")->required();
  cmd->add_option("--split-date", c.split, "First test month, YYYY-MM-DD (default 2021-09-01)");
  cmd->add_option("--seed", c.seed, "Master seed");
}

qp::PipelineConfig base_config(const Common& c) {
  qp::PipelineConfig config;
  config.split = split_or_default(c.split);
  config.seed = c.seed;
  return config;
}

void write_run_outputs(const qp::ModelRun& run, const std::string& trace_out, const std::string& predictions_out) {
  if (!trace_out.empty()) qp::write_file_atomic(trace_out, qp::trace_csv(run.trace));
  if (!predictions_out.empty()) qp::write_file_atomic(predictions_out, qp::predictions_csv(run.predictions));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-series forecasting with simulated variational quantum models"};
  app.require_subcommand(1);
  int status = kOk;

  // generate
  qp::GeneratorConfig gen;
  std::string gen_start, gen_out;
  auto* generate = app.add_subcommand("generate", "Write a synthetic monthly sales series");
  generate->add_option("--start", gen_start, "First month, YYYY-MM-DD");
  generate->add_option("--months", gen.num_months, "Number of months")->capture_default_str();
  generate->add_option("--base", gen.base, "Base level")->capture_default_str();
  generate->add_option("--trend", gen.trend, "Linear trend per month")->capture_default_str();
  generate->add_option("--amplitude", gen.amplitude, "Seasonal amplitude (fraction)")->capture_default_str();
  generate->add_option("--phase", gen.phase, "Seasonal phase in months")->capture_default_str();
  generate->add_option("--noise", gen.noise, "Noise standard deviation")->capture_default_str();
  generate->add_option("--growth", gen.growth, "Monthly growth factor")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Seed")->capture_default_str();
  generate->add_option("-o,--out", gen_out, "Output CSV (default stdout)");
  generate->callback([&] {
    if (!gen_start.empty()) gen.start = qforecast::linsys::parse_date(gen_start);
    emit(gen_out, qp::series_csv(qp::generate(gen)));
  });

  // preprocess
  Common pre;
  std::string pre_out;
  auto* preprocess = app.add_subcommand("preprocess", "Difference and scale a series (Date,Value)");
  add_common(preprocess, pre);
  preprocess->add_option("-o,--out", pre_out, "Output CSV (default stdout)");
  preprocess->callback([&] {
    const qp::Preprocessed p = qp::preprocess(qp::read_series_csv(pre.input), split_or_default(pre.split));
    emit(pre_out, qp::series_csv(p.scaled, "Value"));
    std::cerr << "scale: max |diff| = " << fmt("%.10g", p.scaler.max_abs()) << " over " << p.train_count
              << " training differences\n";
  });

  // train-pqc
  Common tp;
  std::string tp_optimizer = "lbfgs", tp_trace, tp_model, tp_pred;
  int tp_iters = 300;
  auto* train_pqc = app.add_subcommand("train-pqc", "Train the 12-qubit circuit regressor");
  add_common(train_pqc, tp);
  train_pqc->add_option("--optimizer", tp_optimizer, "cobyla or lbfgs")
      ->check(CLI::IsMember({"cobyla", "lbfgs"}))
      ->capture_default_str();
  train_pqc->add_option("--max-iters", tp_iters, "Objective evaluation budget")->capture_default_str();
  train_pqc->add_option("--trace-out", tp_trace, "Loss trace CSV (iteration,loss)");
  train_pqc->add_option("--model-out", tp_model, "Trained model file");
  train_pqc->add_option("--predictions-out", tp_pred, "Prediction CSV (Date,Actual,Predicted)");
  train_pqc->callback([&] {
    qp::PipelineConfig config = base_config(tp);
    config.models = {tp_optimizer == "lbfgs" ? qp::ModelKind::pqc_lbfgs : qp::ModelKind::pqc_cobyla};
    config.pqc_max_iters = tp_iters;
    const qp::RunReport report = qp::run_pipeline(qp::read_series_csv(tp.input), config);
    const qp::ModelRun& run = report.runs.front();
    std::cout << report.table();
    std::cout << "initial loss " << fmt("%.6g", run.initial_loss) << ", final loss "
              << fmt("%.6g", report.runs.front().train_mse) << " after " << run.trace.size() << " evaluations\n";
    write_run_outputs(run, tp_trace, tp_pred);
    if (!tp_model.empty()) qp::write_file_atomic(tp_model, run.model_file);
    if (!report.all_converged()) status = kNotConverged;
  });

  // train-baseline
  Common tb;
  std::string tb_model = "linear", tb_trace, tb_model_out, tb_pred;
  int tb_epochs = 2000;
  double tb_lr = 0.01;
  auto* train_baseline = app.add_subcommand("train-baseline", "Fit the linear or neural-network baseline");
  add_common(train_baseline, tb);
  train_baseline->add_option("--model", tb_model, "linear or mlp")
      ->check(CLI::IsMember({"linear", "mlp"}))
      ->capture_default_str();
  train_baseline->add_option("--epochs", tb_epochs, "MLP epochs")->capture_default_str();
  train_baseline->add_option("--learning-rate", tb_lr, "MLP learning rate")->capture_default_str();
  train_baseline->add_option("--trace-out", tb_trace, "Loss trace CSV (iteration,loss)");
  train_baseline->add_option("--model-out", tb_model_out, "Fitted model file");
  train_baseline->add_option("--predictions-out", tb_pred, "Prediction CSV (Date,Actual,Predicted)");
  train_baseline->callback([&] {
    qp::PipelineConfig config = base_config(tb);
    config.models = {qp::parse_model(tb_model)};
    config.mlp_epochs = tb_epochs;
    config.mlp_learning_rate = tb_lr;
    const qp::RunReport report = qp::run_pipeline(qp::read_series_csv(tb.input), config);
    std::cout << report.table();
    write_run_outputs(report.runs.front(), tb_trace, tb_pred);
    if (!tb_model_out.empty()) qp::write_file_atomic(tb_model_out, report.runs.front().model_file);
    if (!report.all_converged()) status = kNotConverged;
  });

  // solve-vqls
  std::string sv_matrix, sv_rhs, sv_input, sv_split, sv_optimizer = "cobyla", sv_out, sv_trace;
  int sv_qubits = 0, sv_layers = -1, sv_iters = 3000, sv_restarts = 5, sv_window = 0, sv_shots = 0;
  std::uint64_t sv_seed = 0;
  bool sv_literal = false;
  auto* solve_vqls = app.add_subcommand("solve-vqls", "Solve A w = b variationally");
  solve_vqls->add_option("--matrix", sv_matrix, "Matrix CSV (rows of reals)");
  solve_vqls->add_option("--rhs", sv_rhs, "Right-hand side CSV (one row or column)");
  solve_vqls->add_option("-i,--input", sv_input, "Series CSV; solves the normal equations of its training windows");
  solve_vqls->add_option("--window", sv_window, "Window size for --input (a power of two)");
  solve_vqls->add_option("--split-date", sv_split, "First test month for --input");
  solve_vqls->add_option("--qubits", sv_qubits, "Qubit count (default: inferred)");
  solve_vqls->add_option("--layers", sv_layers, "Ansatz layers (default 1 for 2 qubits, else 2)");
  solve_vqls->add_option("--optimizer", sv_optimizer, "cobyla or lbfgs")
      ->check(CLI::IsMember({"cobyla", "lbfgs"}))
      ->capture_default_str();
  solve_vqls->add_option("--max-iters", sv_iters, "Evaluation budget per restart")->capture_default_str();
  solve_vqls->add_option("--shots", sv_shots, "Sampled Hadamard tests with this many shots (0: exact)");
  solve_vqls->add_option("--restarts", sv_restarts, "Random restarts")->capture_default_str();
  solve_vqls->add_option("--seed", sv_seed, "Seed")->capture_default_str();
  solve_vqls->add_flag("--unnormalized-cost", sv_literal, "Use 1 - |<b|psi>|^2 without normalization");
  solve_vqls->add_option("-o,--out", sv_out, "Solution CSV (default stdout)");
  solve_vqls->add_option("--trace-out", sv_trace, "Cost trace CSV (iteration,cost)");
  solve_vqls->callback([&] {
    qforecast::linsys::NormalSystem system;
    if (!sv_input.empty()) {
      if (!sv_matrix.empty() || !sv_rhs.empty()) throw std::invalid_argument("give --input or --matrix/--rhs, not both");
      int window = sv_window > 0 ? sv_window : (sv_qubits > 0 ? 1 << sv_qubits : 4);
      const qp::Preprocessed p = qp::preprocess(qp::read_series_csv(sv_input), split_or_default(sv_split));
      const qp::Dataset ds = qp::make_dataset(p, window);
      qforecast::linsys::WindowSystem ws{ds.train_x, ds.train_y, window};
      system = qforecast::linsys::normal_equations(ws);
    } else {
      if (sv_matrix.empty() || sv_rhs.empty()) throw std::invalid_argument("solve-vqls needs --matrix and --rhs, or --input");
      std::istringstream m(qp::read_file(sv_matrix)), r(qp::read_file(sv_rhs));
      system.a = qp::parse_matrix_csv(m, sv_matrix);
      system.b = qp::parse_vector_csv(r, sv_rhs);
    }
    const auto problem = qforecast::vqls::make_problem(system);
    if (sv_qubits > 0 && sv_qubits != problem.num_qubits())
      throw std::invalid_argument("--qubits " + std::to_string(sv_qubits) + " does not match a " +
                                  std::to_string(system.a.rows()) + "x" + std::to_string(system.a.cols()) + " system");
    qforecast::vqls::VqlsOptions options;
    options.ansatz = qforecast::vqls::AnsatzSpec::default_for(problem.num_qubits());
    if (sv_layers >= 0) options.ansatz.layers = sv_layers;
    options.method = qforecast::optimize::parse_method(sv_optimizer);
    options.optim.max_iters = sv_iters;
    options.restarts = sv_restarts;
    options.seed = sv_seed;
    if (sv_shots > 0) options.estimator = qforecast::vqls::Estimator::hadamard_sampled(sv_shots);
    options.cost.unnormalized = sv_literal;
    const auto result = qforecast::vqls::solve(problem, options);
    const Eigen::VectorXd w = result.weights();
    const double residual = (system.a * w - system.b).norm() / system.b.norm();
    emit(sv_out, weights_csv(w));
    std::cout << "cost " << fmt("%.6e", result.final_cost) << "\n"
              << "residual " << fmt("%.6e", residual) << "\n"
              << "condition " << fmt("%.6e", qforecast::linsys::condition_number(system.a)) << "\n"
              << "converged " << (result.converged ? "yes" : "no") << "\n";
    if (!sv_trace.empty()) qp::write_file_atomic(sv_trace, qp::trace_csv(result.cost_trace, "cost"));
    if (!result.converged) status = kNotConverged;
  });

  // decompose
  std::string dc_matrix;
  double dc_prune = qforecast::pauli::kDefaultPruneThreshold;
  auto* decompose = app.add_subcommand("decompose", "Print the Pauli decomposition of a Hermitian matrix");
  decompose->add_option("matrix", dc_matrix, "Matrix CSV (rows of reals)")->required();
  decompose->add_option("--prune", dc_prune, "Drop terms with |alpha| below this")->capture_default_str();
  decompose->callback([&] {
    std::istringstream in(qp::read_file(dc_matrix));
    const Eigen::MatrixXd m = qp::parse_matrix_csv(in, dc_matrix);
    std::cout << qforecast::pauli::format_listing(qforecast::pauli::decompose(m, dc_prune));
  });

  // forecast
  Common fc;
  std::string fc_models = "pqc-cobyla,pqc-lbfgs,linear,mlp,vqls", fc_dir;
  qp::PipelineConfig fc_knobs;
  int fc_shots = 0;
  auto* forecast = app.add_subcommand("forecast", "Run every requested model and write reports");
  add_common(forecast, fc);
  forecast->add_option("--models", fc_models, "Comma-separated models")->capture_default_str();
  forecast->add_option("--out-dir", fc_dir, "Directory for reports, predictions and traces")->required();
  forecast->add_option("--pqc-max-iters", fc_knobs.pqc_max_iters, "Circuit regressor budget")->capture_default_str();
  forecast->add_option("--mlp-epochs", fc_knobs.mlp_epochs, "MLP epochs")->capture_default_str();
  forecast->add_option("--mlp-learning-rate", fc_knobs.mlp_learning_rate, "MLP learning rate")->capture_default_str();
  forecast->add_option("--vqls-qubits", fc_knobs.vqls_qubits, "VQLS qubits (window = 2^qubits)")->capture_default_str();
  forecast->add_option("--vqls-restarts", fc_knobs.vqls_restarts, "VQLS restarts")->capture_default_str();
  forecast->add_option("--vqls-max-iters", fc_knobs.vqls_max_iters, "VQLS budget per restart")->capture_default_str();
  forecast->add_option("--shots", fc_shots, "VQLS sampled Hadamard tests (0: exact)");
  forecast->add_flag("--unnormalized-cost", fc_knobs.unnormalized_cost, "Unnormalized VQLS cost");
  forecast->callback([&] {
    qp::PipelineConfig config = fc_knobs;
    config.split = split_or_default(fc.split);
    config.seed = fc.seed;
    config.models.clear();
    std::stringstream names(fc_models);
    for (std::string name; std::getline(names, name, ',');)
      if (!name.empty()) config.models.push_back(qp::parse_model(name));
    if (config.models.empty()) throw std::invalid_argument("no models requested");
    if (fc_shots > 0) config.vqls_shots = fc_shots;
    const qp::RunReport report = qp::run_pipeline(qp::read_series_csv(fc.input), config);
    fs::create_directories(fc_dir);
    const fs::path dir(fc_dir);
    qp::write_file_atomic(dir / "report.txt", report.table());
    qp::write_file_atomic(dir / "report.csv", report.csv());
    qp::write_file_atomic(dir / "preprocessed.csv", qp::series_csv(report.data.scaled, "Value"));
    for (const auto& run : report.runs) {
      const std::string name(qp::model_name(run.kind));
      qp::write_file_atomic(dir / ("predictions_" + name + ".csv"), qp::predictions_csv(run.predictions));
      if (!run.trace.empty()) qp::write_file_atomic(dir / ("trace_" + name + ".csv"), qp::trace_csv(run.trace));
    }
    std::cout << report.table();
    if (!report.all_converged()) status = kNotConverged;
  });

  // evaluate
  std::string ev_actuals, ev_split, ev_csv;
  std::vector<std::string> ev_predictions;
  auto* evaluate = app.add_subcommand("evaluate", "Score prediction CSVs against actual values");
  evaluate->add_option("--actuals", ev_actuals, "Series CSV (Date,Sales)")->required();
  evaluate->add_option("--predictions", ev_predictions, "Prediction CSVs (Date,Actual,Predicted)")->required();
  evaluate->add_option("--split-date", ev_split, "First test month (default 2021-09-01)");
  evaluate->add_option("--csv-out", ev_csv, "Machine-readable table");
  evaluate->callback([&] {
    const auto actuals = qp::read_series_csv(ev_actuals);
    std::vector<qp::EvalRow> rows;
    for (const auto& path : ev_predictions) {
      std::istringstream in(qp::read_file(path));
      rows.push_back(qp::evaluate(fs::path(path).stem().string(), qp::parse_predictions_csv(in, path), actuals,
                                  split_or_default(ev_split)));
    }
    std::cout << qp::format_table(rows);
    if (!ev_csv.empty()) qp::write_file_atomic(ev_csv, qp::format_eval_csv(rows));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInputError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return status;
}
