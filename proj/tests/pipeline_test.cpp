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

#include <cmath>
#include <filesystem>
#include <regex>
#include <sstream>

#include <gtest/gtest.h>

namespace qp = qforecast::pipeline;
namespace ls = qforecast::linsys;

namespace {

qp::GeneratorConfig noiseless() {
  qp::GeneratorConfig c;
  c.noise = 0;
  c.amplitude = 0;
  c.trend = 0;
  c.growth = 1;
  return c;
}

qp::TimeSeries parse(const std::string& text) {
  std::istringstream in(text);
  return qp::parse_series_csv(in, "test.csv");
}

std::string error_of(const std::string& text) {
  try {
    parse(text);
  } catch (const std::invalid_argument& e) {
    return e.what();
  }
  return "";
}

qp::PipelineConfig cheap(std::vector<qp::ModelKind> models) {
  qp::PipelineConfig c;
  c.models = std::move(models);
  c.mlp_epochs = 100;
  c.vqls_restarts = 2;
  c.vqls_max_iters = 400;
  c.seed = 5;
  return c;
}

}  // namespace

TEST(Generate, ConstantSeries) {
  const auto s = qp::generate(noiseless());
  ASSERT_EQ(s.size(), 67u);
  for (double v : s.values) EXPECT_EQ(v, 1.2e6);
  EXPECT_EQ(ls::format_date(s.dates.front()), "2019-01-01");
  EXPECT_EQ(ls::format_date(s.dates.back()), "2024-07-01");
}

TEST(Generate, GeometricProgression) {
  auto c = noiseless();
  c.growth = 1.1;
  const auto s = qp::generate(c);
  for (std::size_t t = 1; t < s.size(); ++t) EXPECT_NEAR(s.values[t] / s.values[t - 1], 1.1, 1e-12);
}

TEST(Generate, SeedDeterminesOutput) {
  qp::GeneratorConfig c;
  c.seed = 99;
  EXPECT_EQ(qp::series_csv(qp::generate(c)), qp::series_csv(qp::generate(c)));
  qp::GeneratorConfig d = c;
  d.seed = 100;
  EXPECT_NE(qp::series_csv(qp::generate(c)), qp::series_csv(qp::generate(d)));
}

TEST(Generate, ClipsAtZeroAndValidates) {
  auto c = noiseless();
  c.trend = -1e5;
  for (double v : qp::generate(c).values) EXPECT_GE(v, 0.0);
  c.num_months = 23;
  EXPECT_THROW(qp::generate(c), std::invalid_argument);
  c = noiseless();
  c.noise = -1;
  EXPECT_THROW(qp::generate(c), std::invalid_argument);
}

TEST(Seeds, TagsGiveIndependentStreams) {
  EXPECT_NE(qp::derive_seed(1, "data"), qp::derive_seed(1, "init"));
  EXPECT_NE(qp::derive_seed(1, "data"), qp::derive_seed(2, "data"));
  EXPECT_EQ(qp::derive_seed(1, "data"), qp::derive_seed(1, "data"));
}

TEST(Csv, RoundTripIsExact) {
  qp::GeneratorConfig c;
  c.seed = 4;
  const auto s = qp::generate(c);
  const auto back = parse(qp::series_csv(s));
  EXPECT_EQ(back.values, s.values);
  EXPECT_EQ(back.dates, s.dates);
}

TEST(Csv, AcceptsValueHeaderAndCrLf) {
  const auto s = parse("Date,Value\r\n2020-01-01,1.5\r\n2020-02-01,2\r\n\r\n");
  EXPECT_EQ(s.values, (std::vector<double>{1.5, 2}));
}

TEST(Csv, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("Month,Sales\n2020-01-01,1\n").find("test.csv:1:"), std::string::npos);
  EXPECT_NE(error_of("Date,Sales\n2020-01-01,1\n2020-02-01,abc\n").find("test.csv:3:"), std::string::npos);
  EXPECT_NE(error_of("Date,Sales\n2020-01-01,1\n2020-03-01,2\n").find("test.csv:3:"), std::string::npos);
  EXPECT_NE(error_of("Date,Sales\n2020-01-01,1,2\n").find("test.csv:2:"), std::string::npos);
  EXPECT_NE(error_of("Date,Sales\n01/02/2020,1\n").find("test.csv:2:"), std::string::npos);
  EXPECT_NE(error_of("Date,Sales\n2020-01-01,1 000\n").find("test.csv:2:"), std::string::npos);
  EXPECT_FALSE(error_of("").empty());
}

TEST(Csv, MatrixAndVector) {
  std::istringstream m("1, 2\n3,4\n");
  const Eigen::MatrixXd a = qp::parse_matrix_csv(m);
  EXPECT_EQ(a(1, 0), 3);
  std::istringstream ragged("1,2\n3\n");
  EXPECT_THROW(qp::parse_matrix_csv(ragged), std::invalid_argument);
  std::istringstream row("1,2,3\n"), col("1\n2\n3\n"), both("1,2\n3,4\n");
  EXPECT_EQ(qp::parse_vector_csv(row), Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(qp::parse_vector_csv(col), Eigen::Vector3d(1, 2, 3));
  EXPECT_THROW(qp::parse_vector_csv(both), std::invalid_argument);
}

TEST(Files, AtomicWriteLeavesNoTemporary) {
  const auto dir = std::filesystem::temp_directory_path() / "qforecast_pipeline_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "out.csv";
  qp::write_file_atomic(path, "a\n");
  qp::write_file_atomic(path, "b\n");
  EXPECT_EQ(qp::read_file(path), "b\n");
  EXPECT_FALSE(std::filesystem::exists(dir / "out.csv.tmp"));
  std::filesystem::remove_all(dir);
}

TEST(Preprocess, TrainingDiffsHitTheBound) {
  qp::GeneratorConfig c;
  c.seed = 8;
  const auto p = qp::preprocess(qp::generate(c));
  ASSERT_EQ(p.train_count, 31u);  // 2019-02 .. 2021-08
  double max_abs = 0;
  int hits = 0;
  for (std::size_t i = 0; i < p.train_count; ++i) {
    max_abs = std::max(max_abs, std::abs(p.scaled.values[i]));
    if (std::abs(p.scaled.values[i]) == 0.25) ++hits;
  }
  EXPECT_EQ(max_abs, 0.25);
  EXPECT_GE(hits, 1);
}

TEST(Preprocess, InverseReconstructsSeries) {
  qp::GeneratorConfig c;
  c.seed = 9;
  const auto raw = qp::generate(c);
  const auto p = qp::preprocess(raw);
  const auto diffs = p.scaler.invert(p.scaled.values);
  const auto back = ls::invert_difference({p.scaled.dates, diffs}, raw.values[0]);
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_NEAR(back.values[i], raw.values[i + 1], 1e-9 * raw.values[i + 1]);
}

TEST(Preprocess, SplitBeforeDataFails) {
  qp::GeneratorConfig c;
  EXPECT_THROW(qp::preprocess(qp::generate(c), ls::parse_date("2018-01-01")), std::invalid_argument);
}

TEST(Dataset, PartitionByDate) {
  qp::GeneratorConfig c;
  const auto p = qp::preprocess(qp::generate(c));
  const auto ds = qp::make_dataset(p, 12);
  EXPECT_EQ(ds.train_x.rows(), 19);
  EXPECT_EQ(ds.test_x.rows(), 35);
  EXPECT_EQ(ds.train_x.cols(), 12);
  EXPECT_EQ(ds.train_x(0, 0), p.scaled.values[0]);
  EXPECT_EQ(ds.train_y[0], p.scaled.values[12]);
  for (std::size_t pos : ds.test_pos) EXPECT_GE(p.scaled.dates[pos], p.split);
  EXPECT_THROW(qp::make_dataset(p, 30), std::invalid_argument);
}

TEST(Models, NamesRoundTrip) {
  for (auto k : {qp::ModelKind::pqc_cobyla, qp::ModelKind::pqc_lbfgs, qp::ModelKind::linear, qp::ModelKind::mlp,
                 qp::ModelKind::vqls})
    EXPECT_EQ(qp::parse_model(qp::model_name(k)), k);
  EXPECT_THROW(qp::parse_model("svm"), std::invalid_argument);
}

TEST(Pipeline, LinearFitsNoiselessTrendExactly) {
  auto c = noiseless();
  c.trend = 2e4;
  const auto report = qp::run_pipeline(qp::generate(c), cheap({qp::ModelKind::linear}));
  EXPECT_LE(report.runs.front().test_mse, 1e-10);
}

TEST(Pipeline, TableHasOneFiveDecimalRowPerModel) {
  qp::GeneratorConfig c;
  const auto report = qp::run_pipeline(qp::generate(c), cheap({qp::ModelKind::linear, qp::ModelKind::mlp}));
  const std::string table = report.table();
  const std::regex row(R"((linear|mlp) +\d+\.\d{5} +\d+\.\d{5}\n)");
  EXPECT_EQ(std::distance(std::sregex_iterator(table.begin(), table.end(), row), std::sregex_iterator()), 2);
  EXPECT_EQ(table.rfind("Model", 0), 0u);
  EXPECT_NE(table.find("condition(A) linear (m=12)"), std::string::npos);
  for (const auto& r : report.runs) {
    EXPECT_GE(r.train_mse, 0.0);
    EXPECT_GE(r.test_mse, 0.0);
  }
}

TEST(Pipeline, EuroPredictionsInvertThePreprocessing) {
  qp::GeneratorConfig c;
  c.seed = 2;
  const auto report = qp::run_pipeline(qp::generate(c), cheap({qp::ModelKind::linear, qp::ModelKind::vqls}));
  const auto& data = report.data;
  for (const auto& run : report.runs) {
    const auto ds = qp::make_dataset(data, run.window);
    ASSERT_EQ(run.predictions.size(), ds.train_pos.size() + ds.test_pos.size());
    for (std::size_t i = 0; i < ds.test_pos.size(); ++i) {
      const std::size_t t = ds.test_pos[i];
      const auto& row = run.predictions[ds.train_pos.size() + i];
      const double expected = data.raw.values[t] + data.scaler.invert(run.test_pred[static_cast<Eigen::Index>(i)]);
      EXPECT_NEAR(row.predicted, expected, 1e-9 * std::abs(expected));
      EXPECT_EQ(row.actual, data.raw.values[t + 1]);
      EXPECT_EQ(row.date, data.raw.dates[t + 1]);
    }
  }
}

TEST(Pipeline, ModelsShareIdenticalPreprocessing) {
  qp::GeneratorConfig c;
  c.seed = 3;
  const auto raw = qp::generate(c);
  const auto a = qp::run_pipeline(raw, cheap({qp::ModelKind::vqls}));
  const auto b = qp::run_pipeline(raw, cheap({qp::ModelKind::linear}));
  EXPECT_EQ(qp::series_csv(a.data.scaled, "Value"), qp::series_csv(b.data.scaled, "Value"));
}

TEST(Pipeline, DeterministicOutputs) {
  qp::GeneratorConfig c;
  c.seed = 6;
  const auto raw = qp::generate(c);
  const auto config = cheap({qp::ModelKind::linear, qp::ModelKind::mlp, qp::ModelKind::vqls});
  const auto a = qp::run_pipeline(raw, config), b = qp::run_pipeline(raw, config);
  EXPECT_EQ(a.table(), b.table());
  EXPECT_EQ(a.csv(), b.csv());
  for (std::size_t i = 0; i < a.runs.size(); ++i) {
    EXPECT_EQ(qp::predictions_csv(a.runs[i].predictions), qp::predictions_csv(b.runs[i].predictions));
    EXPECT_EQ(qp::trace_csv(a.runs[i].trace), qp::trace_csv(b.runs[i].trace));
  }
}

TEST(Pipeline, MinimalSeriesRejected) {
  auto c = noiseless();
  c.trend = 1e4;
  c.num_months = 24;
  // Split leaves only 9 training differences for a window of 12.
  auto config = cheap({qp::ModelKind::linear});
  config.split = ls::parse_date("2019-11-01");
  EXPECT_THROW(qp::run_pipeline(qp::generate(c), config), std::invalid_argument);
}

TEST(Evaluate, PerfectPredictionsScoreZero) {
  qp::GeneratorConfig c;
  const auto raw = qp::generate(c);
  std::vector<qp::PredictionRow> rows;
  for (std::size_t i = 1; i < raw.size(); ++i) rows.push_back({raw.dates[i], raw.values[i], raw.values[i]});
  const auto r = qp::evaluate("same", rows, raw);
  EXPECT_EQ(r.train_mse, 0.0);
  EXPECT_EQ(r.test_mse, 0.0);
  EXPECT_EQ(r.train_count + r.test_count, raw.size() - 1);
}

TEST(Evaluate, HandComputedPair) {
  const auto actuals = parse("Date,Sales\n2020-01-01,100\n2020-02-01,110\n2020-03-01,130\n2020-04-01,120\n");
  // Training diffs 10 and 20 set the scale 0.25 / 20.
  std::istringstream preds("Date,Actual,Predicted\n2020-02-01,110,104\n2020-03-01,130,130\n2020-04-01,120,128\n");
  const auto r = qp::evaluate("m", qp::parse_predictions_csv(preds), actuals, ls::parse_date("2020-04-01"));
  EXPECT_DOUBLE_EQ(r.train_mse, (0.075 * 0.075) / 2);
  EXPECT_DOUBLE_EQ(r.test_mse, 0.1 * 0.1);
  EXPECT_EQ(r.train_count, 2u);
  EXPECT_EQ(r.test_count, 1u);
}

TEST(Evaluate, NamesFirstUnmatchedDate) {
  const auto actuals = parse("Date,Sales\n2020-01-01,100\n2020-02-01,110\n2020-03-01,130\n");
  std::vector<qp::PredictionRow> rows{{ls::parse_date("2020-02-01"), 0, 1},
                                      {ls::parse_date("2021-05-01"), 0, 1},
                                      {ls::parse_date("2021-06-01"), 0, 1}};
  try {
    qp::evaluate("m", rows, actuals, ls::parse_date("2020-03-01"));
    FAIL() << "expected an error";
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("2021-05-01"), std::string::npos);
  }
}

TEST(Evaluate, AgreesWithPipelineScores) {
  qp::GeneratorConfig c;
  c.seed = 12;
  const auto raw = qp::generate(c);
  const auto report = qp::run_pipeline(raw, cheap({qp::ModelKind::linear}));
  const auto& run = report.runs.front();
  const auto r = qp::evaluate("linear", run.predictions, raw);
  EXPECT_NEAR(r.train_mse, run.train_mse, 1e-12);
  EXPECT_NEAR(r.test_mse, run.test_mse, 1e-12);
}

TEST(Evaluate, TableAndCsv) {
  const std::vector<qp::EvalRow> rows{{"a", 0.012345678, 0.5, 3, 4}, {"b", std::nan(""), 0.25, 0, 2}};
  EXPECT_EQ(qp::format_table(rows),
            "Model   Train MSE    Test MSE\n"
            "a         0.01235     0.50000\n"
            "b               -     0.25000\n");
  EXPECT_EQ(qp::format_eval_csv(rows),
            "model,train_mse,test_mse,train_count,test_count\na,0.012345678,0.5,3,4\nb,,0.25,0,2\n");
}

TEST(Traces, CsvShape) {
  EXPECT_EQ(qp::trace_csv({0.5, 0.25}), "iteration,loss\n1,0.5\n2,0.25\n");
  EXPECT_EQ(qp::trace_csv({1.0}, "cost"), "iteration,cost\n1,1\n");
}
