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

#include "qforecast/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

#include "qforecast/baselines.hpp"
#include "qforecast/pqc.hpp"
#include "qforecast/vqls.hpp"

namespace qforecast::pipeline {

namespace {

constexpr int kClassicalWindow = 12;

std::string format(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(std::string_view source, std::size_t line, const std::string& what) {
  throw std::invalid_argument(std::string(source) + ":" + std::to_string(line) + ": " + what);
}

double parse_real(std::string_view field, std::string_view source, std::size_t line) {
  double v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v))
    fail(source, line, "not a finite number: '" + std::string(field) + "'");
  return v;
}

// Non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> content_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
    if (!trim(line).empty()) out.emplace_back(number, line);
  }
  return out;
}

std::size_t date_index(const TimeSeries& s, Date d) {
  const auto it = std::lower_bound(s.dates.begin(), s.dates.end(), d);
  if (it == s.dates.end() || *it != d) return s.size();
  return static_cast<std::size_t>(it - s.dates.begin());
}

double mse_or_nan(const std::vector<double>& errors) {
  if (errors.empty()) return std::numeric_limits<double>::quiet_NaN();
  double total = 0;
  for (double e : errors) total += e * e;
  return total / static_cast<double>(errors.size());
}

std::vector<double> row_of(const Eigen::MatrixXd& m, Eigen::Index r) {
  std::vector<double> v(static_cast<std::size_t>(m.cols()));
  for (Eigen::Index c = 0; c < m.cols(); ++c) v[static_cast<std::size_t>(c)] = m(r, c);
  return v;
}

template <class Save, class Model>
std::string serialize(Save&& save, const Model& model) {
  std::ostringstream out;
  save(model, out);
  return out.str();
}

template <class Predict>
void fill_predictions(ModelRun& run, const Preprocessed& data, const Dataset& ds, Predict&& predict) {
  run.train_pred.resize(ds.train_x.rows());
  run.test_pred.resize(ds.test_x.rows());
  for (Eigen::Index r = 0; r < ds.train_x.rows(); ++r) run.train_pred[r] = predict(row_of(ds.train_x, r));
  for (Eigen::Index r = 0; r < ds.test_x.rows(); ++r) run.test_pred[r] = predict(row_of(ds.test_x, r));
  run.train_mse = baselines::mse(std::span<const double>(run.train_pred.data(), run.train_pred.size()),
                                 std::span<const double>(ds.train_y.data(), ds.train_y.size()));
  run.test_mse = baselines::mse(std::span<const double>(run.test_pred.data(), run.test_pred.size()),
                                std::span<const double>(ds.test_y.data(), ds.test_y.size()));

  auto emit = [&](std::size_t pos, double scaled) {
    // Diff position t spans raw positions t and t + 1.
    const double previous = data.raw.values[pos];
    run.predictions.push_back({data.raw.dates[pos + 1], data.raw.values[pos + 1],
                               previous + data.scaler.invert(scaled)});
  };
  for (std::size_t i = 0; i < ds.train_pos.size(); ++i) emit(ds.train_pos[i], run.train_pred[static_cast<Eigen::Index>(i)]);
  for (std::size_t i = 0; i < ds.test_pos.size(); ++i) emit(ds.test_pos[i], run.test_pred[static_cast<Eigen::Index>(i)]);
}

linsys::NormalSystem training_system(const Dataset& ds) {
  linsys::WindowSystem ws;
  ws.x = ds.train_x;
  ws.y = ds.train_y;
  ws.window = ds.window;
  return linsys::normal_equations(ws);
}

ModelRun run_pqc(ModelKind kind, const Preprocessed& data, const PipelineConfig& config) {
  const Dataset ds = make_dataset(data, kClassicalWindow);
  ModelRun run;
  run.kind = kind;
  run.window = ds.window;
  pqc::TrainConfig tc;
  tc.optimizer = kind == ModelKind::pqc_lbfgs ? optimize::Method::lbfgs : optimize::Method::cobyla;
  tc.gradient = kind == ModelKind::pqc_lbfgs ? pqc::GradientMethod::parameter_shift : pqc::GradientMethod::none;
  tc.max_iters = config.pqc_max_iters;
  const pqc::PqcModel start = pqc::PqcModel::initial(kClassicalWindow, derive_seed(config.seed, "pqc-init"));
  const pqc::TrainResult trained = pqc::train(start, ds.train_x, ds.train_y, tc);
  for (const auto& e : trained.trace.entries) run.trace.push_back(e.value);
  run.initial_loss = trained.initial_loss;
  run.converged = !trained.diverged;
  run.model_file = serialize(pqc::save_model, trained.model);
  fill_predictions(run, data, ds, [&](const std::vector<double>& w) { return pqc::predict(trained.model, w); });
  return run;
}

ModelRun run_linear(const Preprocessed& data) {
  const Dataset ds = make_dataset(data, kClassicalWindow);
  ModelRun run;
  run.kind = ModelKind::linear;
  run.window = ds.window;
  const baselines::LinearModel model = baselines::fit_linear(ds.train_x, ds.train_y);
  run.weights = model.w;
  run.condition = linsys::condition_number(training_system(ds).a);
  run.model_file = serialize(baselines::save_linear, model);
  fill_predictions(run, data, ds, [&](const std::vector<double>& w) { return model.predict(w); });
  return run;
}

ModelRun run_mlp(const Preprocessed& data, const PipelineConfig& config) {
  const Dataset ds = make_dataset(data, kClassicalWindow);
  ModelRun run;
  run.kind = ModelKind::mlp;
  run.window = ds.window;
  baselines::MlpTrainConfig tc;
  tc.epochs = config.mlp_epochs;
  tc.learning_rate = config.mlp_learning_rate;
  const auto start = baselines::MlpModel::initial(kClassicalWindow, 12, 12, derive_seed(config.seed, "mlp-init"));
  const baselines::MlpTrainResult trained = baselines::mlp_train(start, ds.train_x, ds.train_y, tc);
  run.trace = trained.trace;
  run.initial_loss = trained.trace.front();
  run.converged = !trained.diverged;
  run.model_file = serialize(baselines::save_mlp, trained.model);
  fill_predictions(run, data, ds, [&](const std::vector<double>& w) { return baselines::mlp_forward(trained.model, w); });
  return run;
}

ModelRun run_vqls(const Preprocessed& data, const PipelineConfig& config) {
  if (config.vqls_qubits < 1 || config.vqls_qubits > 4) throw std::invalid_argument("vqls qubits must be 1..4");
  const Dataset ds = make_dataset(data, 1 << config.vqls_qubits);
  ModelRun run;
  run.kind = ModelKind::vqls;
  run.window = ds.window;
  const linsys::NormalSystem system = training_system(ds);
  run.condition = linsys::condition_number(system.a);

  vqls::VqlsOptions options;
  options.ansatz = vqls::AnsatzSpec::default_for(config.vqls_qubits);
  if (config.vqls_layers >= 0) options.ansatz.layers = config.vqls_layers;
  options.restarts = config.vqls_restarts;
  options.seed = derive_seed(config.seed, "vqls");
  options.optim.max_iters = config.vqls_max_iters;
  if (config.vqls_shots) options.estimator = vqls::Estimator::hadamard_sampled(*config.vqls_shots);
  options.cost.unnormalized = config.unnormalized_cost;
  const vqls::VqlsResult result = vqls::solve(vqls::make_problem(system), options);
  run.weights = result.weights();
  run.trace = result.cost_trace;
  run.initial_loss = run.trace.empty() ? 0.0 : run.trace.front();
  run.converged = result.converged;
  fill_predictions(run, data, ds, [&](const std::vector<double>& w) { return linsys::predict_next(run.weights, w); });
  return run;
}

}  // namespace

void GeneratorConfig::validate() const {
  if (!start.ok()) throw std::invalid_argument("start date is invalid");
  if (num_months < 24) throw std::invalid_argument("num_months must be >= 24");
  for (double v : {base, trend, amplitude, phase, noise, growth})
    if (!std::isfinite(v)) throw std::invalid_argument("generator parameters must be finite");
  if (noise < 0) throw std::invalid_argument("noise must be >= 0");
  if (!(growth > 0)) throw std::invalid_argument("growth must be positive");
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  std::uint64_t z = seed ^ h;
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

TimeSeries generate(const GeneratorConfig& config) {
  config.validate();
  std::mt19937_64 rng(derive_seed(config.seed, "data"));
  std::normal_distribution<double> gauss(0.0, 1.0);
  TimeSeries s;
  const std::chrono::year_month first{config.start.year(), config.start.month()};
  for (int t = 0; t < config.num_months; ++t) {
    const auto ym = first + std::chrono::months{t};
    s.dates.emplace_back(ym.year(), ym.month(), config.start.day());
    const double seasonal = 1.0 + config.amplitude * std::sin(2.0 * std::numbers::pi * (t + config.phase) / 12.0);
    const double noise = config.noise > 0 ? config.noise * gauss(rng) : 0.0;
    const double v = (config.base + config.trend * t) * std::pow(config.growth, t) * seasonal + noise;
    s.values.push_back(std::max(0.0, v));
  }
  s.validate();
  return s;
}

std::string series_csv(const TimeSeries& series, std::string_view value_header) {
  std::string out = "Date," + std::string(value_header) + "\n";
  for (std::size_t i = 0; i < series.size(); ++i)
    out += linsys::format_date(series.dates[i]) + "," + format("%.17g", series.values[i]) + "\n";
  return out;
}

TimeSeries parse_series_csv(std::istream& in, std::string_view source) {
  const auto lines = content_lines(in);
  if (lines.empty()) throw std::invalid_argument(std::string(source) + ": empty file");
  const auto header = split_fields(lines[0].second);
  if (header.size() != 2 || header[0] != "Date" || header[1].empty())
    fail(source, lines[0].first, "expected header 'Date,<name>'");
  TimeSeries s;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [number, text] = lines[i];
    const auto fields = split_fields(text);
    if (fields.size() != 2) fail(source, number, "expected 2 fields, found " + std::to_string(fields.size()));
    try {
      s.dates.push_back(linsys::parse_date(fields[0]));
    } catch (const std::invalid_argument& e) {
      fail(source, number, e.what());
    }
    if (s.dates.size() > 1) {
      const auto& a = s.dates[s.dates.size() - 2];
      const auto expected = std::chrono::year_month{a.year(), a.month()} + std::chrono::months{1};
      const auto& b = s.dates.back();
      if (std::chrono::year_month{b.year(), b.month()} != expected || b.day() != a.day())
        fail(source, number, "date " + linsys::format_date(b) + " does not follow " + linsys::format_date(a) +
                                 " by one month");
    }
    s.values.push_back(parse_real(fields[1], source, number));
  }
  if (s.size() == 0) throw std::invalid_argument(std::string(source) + ": no data rows");
  s.validate();
  return s;
}

TimeSeries read_series_csv(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return parse_series_csv(in, path.string());
}

Eigen::MatrixXd parse_matrix_csv(std::istream& in, std::string_view source) {
  const auto lines = content_lines(in);
  if (lines.empty()) throw std::invalid_argument(std::string(source) + ": empty matrix");
  std::vector<std::vector<double>> rows;
  for (const auto& [number, text] : lines) {
    const auto fields = split_fields(text);
    std::vector<double> r;
    for (auto f : fields) r.push_back(parse_real(f, source, number));
    if (!rows.empty() && r.size() != rows[0].size())
      fail(source, number, "row has " + std::to_string(r.size()) + " values, expected " + std::to_string(rows[0].size()));
    rows.push_back(std::move(r));
  }
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return m;
}

Eigen::VectorXd parse_vector_csv(std::istream& in, std::string_view source) {
  const Eigen::MatrixXd m = parse_matrix_csv(in, source);
  if (m.rows() == 1) return m.row(0).transpose();
  if (m.cols() == 1) return m.col(0);
  throw std::invalid_argument(std::string(source) + ": expected a single row or column");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Preprocessed preprocess(const TimeSeries& raw, Date split, double half_width) {
  raw.validate();
  if (raw.size() < 3) throw std::invalid_argument("series needs at least 3 points");
  Preprocessed p;
  p.raw = raw;
  p.split = split;
  p.diffs = linsys::difference(raw);
  p.train_count = static_cast<std::size_t>(
      std::lower_bound(p.diffs.dates.begin(), p.diffs.dates.end(), split) - p.diffs.dates.begin());
  if (p.train_count == 0)
    throw std::invalid_argument("no differences dated before the split " + linsys::format_date(split));
  p.scaler = linsys::fit_scaler(std::span<const double>(p.diffs.values.data(), p.train_count), half_width);
  p.scaled.dates = p.diffs.dates;
  p.scaled.values = p.scaler.apply(p.diffs.values);
  return p;
}

Dataset make_dataset(const Preprocessed& data, int window) {
  if (window < 1) throw std::invalid_argument("window must be >= 1");
  if (data.train_count < static_cast<std::size_t>(window) + 2)
    throw std::invalid_argument("split leaves " + std::to_string(data.train_count) +
                                " training differences; window " + std::to_string(window) + " needs " +
                                std::to_string(window + 2));
  const auto& v = data.scaled.values;
  Dataset ds;
  ds.window = window;
  for (std::size_t t = static_cast<std::size_t>(window); t < v.size(); ++t)
    (t < data.train_count ? ds.train_pos : ds.test_pos).push_back(t);
  if (ds.test_pos.empty()) throw std::invalid_argument("no data after the split " + linsys::format_date(data.split));
  auto fill = [&](const std::vector<std::size_t>& pos, Eigen::MatrixXd& x, Eigen::VectorXd& y) {
    x.resize(static_cast<Eigen::Index>(pos.size()), window);
    y.resize(static_cast<Eigen::Index>(pos.size()));
    for (std::size_t i = 0; i < pos.size(); ++i) {
      for (int j = 0; j < window; ++j)
        x(static_cast<Eigen::Index>(i), j) = v[pos[i] - static_cast<std::size_t>(window) + static_cast<std::size_t>(j)];
      y[static_cast<Eigen::Index>(i)] = v[pos[i]];
    }
  };
  fill(ds.train_pos, ds.train_x, ds.train_y);
  fill(ds.test_pos, ds.test_x, ds.test_y);
  return ds;
}

ModelKind parse_model(std::string_view name) {
  for (ModelKind k : {ModelKind::pqc_cobyla, ModelKind::pqc_lbfgs, ModelKind::linear, ModelKind::mlp, ModelKind::vqls})
    if (model_name(k) == name) return k;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected pqc-cobyla, pqc-lbfgs, linear, mlp or vqls)");
}

std::string_view model_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::pqc_cobyla: return "pqc-cobyla";
    case ModelKind::pqc_lbfgs: return "pqc-lbfgs";
    case ModelKind::linear: return "linear";
    case ModelKind::mlp: return "mlp";
    case ModelKind::vqls: return "vqls";
  }
  return "?";
}

RunReport run_pipeline(const TimeSeries& raw, const PipelineConfig& config) {
  RunReport report;
  report.data = preprocess(raw, config.split);
  for (ModelKind kind : config.models) {
    switch (kind) {
      case ModelKind::pqc_cobyla:
      case ModelKind::pqc_lbfgs: report.runs.push_back(run_pqc(kind, report.data, config)); break;
      case ModelKind::linear: report.runs.push_back(run_linear(report.data)); break;
      case ModelKind::mlp: report.runs.push_back(run_mlp(report.data, config)); break;
      case ModelKind::vqls: report.runs.push_back(run_vqls(report.data, config)); break;
    }
  }
  return report;
}

std::string RunReport::table() const {
  std::vector<EvalRow> rows;
  for (const auto& r : runs)
    rows.push_back({std::string(model_name(r.kind)), r.train_mse, r.test_mse, static_cast<std::size_t>(r.train_pred.size()),
                    static_cast<std::size_t>(r.test_pred.size())});
  std::string out = format_table(rows);
  for (const auto& r : runs) {
    if (r.condition)
      out += "condition(A) " + std::string(model_name(r.kind)) + " (m=" + std::to_string(r.window) +
             "): " + format("%.6e", *r.condition) + "\n";
    if (r.kind == ModelKind::vqls) {
      const double best = r.trace.empty() ? std::numeric_limits<double>::quiet_NaN()
                                          : *std::min_element(r.trace.begin(), r.trace.end());
      out += "vqls converged: " + std::string(r.converged ? "yes" : "no") + " (final cost " + format("%.6e", best) +
             ")\n";
    } else if (!r.converged) {
      out += std::string(model_name(r.kind)) + " diverged\n";
    }
  }
  return out;
}

std::string RunReport::csv() const {
  std::string out = "model,train_mse,test_mse,condition,converged\n";
  for (const auto& r : runs) {
    out += std::string(model_name(r.kind)) + "," + format("%.10g", r.train_mse) + "," + format("%.10g", r.test_mse) +
           "," + (r.condition ? format("%.10g", *r.condition) : std::string()) + "," + (r.converged ? "1" : "0") +
           "\n";
  }
  return out;
}

bool RunReport::all_converged() const {
  return std::all_of(runs.begin(), runs.end(), [](const ModelRun& r) { return r.converged; });
}

std::string predictions_csv(const std::vector<PredictionRow>& rows) {
  std::string out = "Date,Actual,Predicted\n";
  for (const auto& r : rows)
    out += linsys::format_date(r.date) + "," + format("%.6f", r.actual) + "," + format("%.6f", r.predicted) + "\n";
  return out;
}

std::vector<PredictionRow> parse_predictions_csv(std::istream& in, std::string_view source) {
  const auto lines = content_lines(in);
  if (lines.empty()) throw std::invalid_argument(std::string(source) + ": empty file");
  const auto header = split_fields(lines[0].second);
  if (header.size() != 3 || header[0] != "Date" || header[1] != "Actual" || header[2] != "Predicted")
    fail(source, lines[0].first, "expected header 'Date,Actual,Predicted'");
  std::vector<PredictionRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const auto [number, text] = lines[i];
    const auto fields = split_fields(text);
    if (fields.size() != 3) fail(source, number, "expected 3 fields, found " + std::to_string(fields.size()));
    PredictionRow r;
    try {
      r.date = linsys::parse_date(fields[0]);
    } catch (const std::invalid_argument& e) {
      fail(source, number, e.what());
    }
    r.actual = parse_real(fields[1], source, number);
    r.predicted = parse_real(fields[2], source, number);
    rows.push_back(r);
  }
  return rows;
}

std::string trace_csv(const std::vector<double>& trace, std::string_view value_name, std::string_view index_name) {
  std::string out = std::string(index_name) + "," + std::string(value_name) + "\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out += std::to_string(i + 1) + "," + format("%.17g", trace[i]) + "\n";
  return out;
}

EvalRow evaluate(std::string name, const std::vector<PredictionRow>& predictions, const TimeSeries& actuals,
                 Date split) {
  const Preprocessed data = preprocess(actuals, split);
  std::vector<double> train_err, test_err;
  for (const auto& p : predictions) {
    const std::size_t i = date_index(data.raw, p.date);
    if (i == data.raw.size()) throw std::invalid_argument("no actual value for " + linsys::format_date(p.date));
    if (i == 0) throw std::invalid_argument("no previous actual value for " + linsys::format_date(p.date));
    const double e = data.scaler.apply(p.predicted - data.raw.values[i]);
    (p.date < split ? train_err : test_err).push_back(e);
  }
  return {std::move(name), mse_or_nan(train_err), mse_or_nan(test_err), train_err.size(), test_err.size()};
}

std::string format_table(const std::vector<EvalRow>& rows) {
  std::size_t width = 5;
  for (const auto& r : rows) width = std::max(width, r.name.size());
  auto cell = [](double v) { return std::isnan(v) ? std::string("-") : format("%.5f", v); };
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-*s  %10s  %10s\n", static_cast<int>(width), "Model", "Train MSE", "Test MSE");
  std::string out = buf;
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-*s  %10s  %10s\n", static_cast<int>(width), r.name.c_str(),
                  cell(r.train_mse).c_str(), cell(r.test_mse).c_str());
    out += buf;
  }
  return out;
}

std::string format_eval_csv(const std::vector<EvalRow>& rows) {
  std::string out = "model,train_mse,test_mse,train_count,test_count\n";
  for (const auto& r : rows)
    out += r.name + "," + (std::isnan(r.train_mse) ? std::string() : format("%.10g", r.train_mse)) + "," +
           (std::isnan(r.test_mse) ? std::string() : format("%.10g", r.test_mse)) + "," +
           std::to_string(r.train_count) + "," + std::to_string(r.test_count) + "\n";
  return out;
}

}  // namespace qforecast::pipeline
