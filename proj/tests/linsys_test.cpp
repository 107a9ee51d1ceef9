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

#include "qforecast/linsys.hpp"

#include <cmath>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace ls = qforecast::linsys;
using namespace std::chrono;

namespace {

ls::TimeSeries monthly(std::vector<double> values) {
  ls::TimeSeries s;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const auto ym = year_month{year{2020}, January} + months{static_cast<int>(i)};
    s.dates.emplace_back(ym.year(), ym.month(), day{1});
  }
  s.values = std::move(values);
  return s;
}

double binomial(int n, int k) {
  double r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Largest eigenvalue of a symmetric positive definite matrix.
double power_iteration(const Eigen::MatrixXd& a) {
  Eigen::VectorXd v = Eigen::VectorXd::Ones(a.rows());
  double lambda = 0;
  for (int it = 0; it < 5000; ++it) {
    const Eigen::VectorXd w = a * v;
    lambda = v.dot(w) / v.dot(v);
    v = w / w.norm();
  }
  return lambda;
}

}  // namespace

TEST(Dates, ParseAndFormat) {
  const ls::Date d = ls::parse_date("2021-09-01");
  EXPECT_EQ(d, year_month_day(year{2021}, September, day{1}));
  EXPECT_EQ(ls::format_date(d), "2021-09-01");
  for (const char* bad : {"2021-9-01", "2021-13-01", "2021-02-30", "abcd-ef-gh", ""})
    EXPECT_THROW(ls::parse_date(bad), std::invalid_argument) << bad;
}

TEST(TimeSeries, ValidateRejectsGapsAndMismatch) {
  ls::TimeSeries s = monthly({1, 2, 3});
  EXPECT_NO_THROW(s.validate());
  s.dates[2] = year_month_day(year{2020}, May, day{1});
  EXPECT_THROW(s.validate(), std::invalid_argument);
  s = monthly({1, 2});
  s.values.push_back(3);
  EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Difference, ValuesAndDates) {
  const auto d = ls::difference(monthly({10, 13, 11, 20}));
  EXPECT_EQ(d.values, (std::vector<double>{3, -2, 9}));
  EXPECT_EQ(ls::format_date(d.dates.front()), "2020-02-01");
  EXPECT_THROW(ls::difference(monthly({1})), std::invalid_argument);
}

TEST(Difference, RoundTripIsExact) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1e6);
  std::vector<double> v(60);
  for (auto& x : v) x = std::round(u(rng));
  const auto s = monthly(v);
  const auto back = ls::invert_difference(ls::difference(s), s.values[0]);
  ASSERT_EQ(back.size(), s.size() - 1);
  for (std::size_t i = 0; i < back.size(); ++i) EXPECT_NEAR(back.values[i], s.values[i + 1], 1e-12 * s.values[i + 1]);
}

TEST(Scaler, MapsTrainingMaxToBound) {
  const std::vector<double> diffs{3, -8, 4, 1};
  const ls::Scaler s = ls::fit_scaler(diffs);
  const auto scaled = s.apply(diffs);
  EXPECT_DOUBLE_EQ(scaled[1], -0.25);
  for (double v : scaled) EXPECT_LE(std::abs(v), 0.25);
  const auto back = s.invert(scaled);
  for (std::size_t i = 0; i < diffs.size(); ++i) EXPECT_NEAR(back[i], diffs[i], 1e-12 * 8);
}

TEST(Scaler, RejectsDegenerateInput) {
  EXPECT_THROW(ls::fit_scaler(std::vector<double>{0, 0, 0}), std::invalid_argument);
  EXPECT_THROW(ls::fit_scaler(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(ls::Scaler(0.0, 1.0), std::invalid_argument);
}

TEST(Windows, Layout) {
  const std::vector<double> v{1, 2, 3, 4, 5};
  const auto ws = ls::build_windows(v, 2);
  ASSERT_EQ(ws.x.rows(), 3);
  EXPECT_EQ(ws.x(0, 0), 1);
  EXPECT_EQ(ws.x(0, 1), 2);
  EXPECT_EQ(ws.x(2, 1), 4);
  EXPECT_EQ(ws.y[2], 5);
  EXPECT_THROW(ls::build_windows(v, 5), std::invalid_argument);
  EXPECT_THROW(ls::build_windows(v, 0), std::invalid_argument);
}

TEST(NormalEquations, SymmetricGram) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> v(30);
  for (auto& x : v) x = g(rng);
  const auto ws = ls::build_windows(v, 4);
  const auto ns = ls::normal_equations(ws);
  EXPECT_LE((ns.a - ws.x.transpose() * ws.x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(ns.a, ns.a.transpose());
  EXPECT_LE((ns.b - ws.x.transpose() * ws.y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SolveClassical, MatchesQrOracle) {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 6 + trial % 10, m = 1 + trial % 5;
    Eigen::MatrixXd x(n, m);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
      y[i] = g(rng);
      for (int j = 0; j < m; ++j) x(i, j) = g(rng);
    }
    const Eigen::VectorXd w = ls::solve_classical({x.transpose() * x, x.transpose() * y});
    EXPECT_LE((w - oracle::least_squares(x, y)).cwiseAbs().maxCoeff(), 1e-8) << "trial " << trial;
  }
}

TEST(SolveClassical, RankDeficientGivesMinimumNorm) {
  Eigen::MatrixXd a(2, 2);
  a << 1, 1, 1, 1;
  Eigen::VectorXd b(2);
  b << 2, 2;
  const Eigen::VectorXd w = ls::solve_classical({a, b});
  EXPECT_NEAR(w[0], 1.0, 1e-12);
  EXPECT_NEAR(w[1], 1.0, 1e-12);
}

TEST(Condition, HilbertFourAgainstInverseOracle) {
  const int n = 4;
  Eigen::MatrixXd h(n, n), inv(n, n);
  for (int i = 1; i <= n; ++i) {
    for (int j = 1; j <= n; ++j) {
      h(i - 1, j - 1) = 1.0 / (i + j - 1);
      const double b = binomial(i + j - 2, i - 1);
      inv(i - 1, j - 1) = ((i + j) % 2 ? -1.0 : 1.0) * (i + j - 1) * binomial(n + i - 1, n - j) *
                          binomial(n + j - 1, n - i) * b * b;
    }
  }
  ASSERT_LE((h * inv - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff(), 1e-10);
  const double expected = power_iteration(h) * power_iteration(inv);
  EXPECT_NEAR(ls::condition_number(h), expected, 1e-6 * expected);
}

TEST(Condition, IdentityAndSingular) {
  EXPECT_NEAR(ls::condition_number(Eigen::MatrixXd::Identity(3, 3)), 1.0, 1e-14);
  Eigen::MatrixXd s(2, 2);
  s << 1, 2, 2, 4;
  EXPECT_TRUE(std::isinf(ls::condition_number(s)) || ls::condition_number(s) > 1e15);
  EXPECT_THROW(ls::condition_number(Eigen::MatrixXd::Zero(2, 2)), std::invalid_argument);
}

TEST(Forecast, PredictNextIsDotProduct) {
  Eigen::VectorXd w(3);
  w << 0.5, -1, 2;
  EXPECT_DOUBLE_EQ(ls::predict_next(w, std::vector<double>{1, 2, 3}), 0.5 - 2 + 6);
  EXPECT_THROW(ls::predict_next(w, std::vector<double>{1, 2}), std::invalid_argument);
}

TEST(Forecast, LinearExtrapolationBothModes) {
  Eigen::VectorXd w(2);
  w << -1, 2;  // x[t+1] = 2 x[t] - x[t-1]
  const std::vector<double> full{1, 2, 3, 4, 5, 6};
  const auto recursive = ls::roll_forecast(w, std::span(full).first(3), 3, 3, ls::ForecastMode::recursive);
  EXPECT_EQ(recursive, (std::vector<double>{4, 5, 6}));
  const auto one_step = ls::roll_forecast(w, full, 3, 3, ls::ForecastMode::one_step_true);
  EXPECT_EQ(one_step, (std::vector<double>{4, 5, 6}));
}

TEST(Forecast, OneStepReadsActualLags) {
  Eigen::VectorXd w(1);
  w << 1;  // persistence
  const std::vector<double> s{1, 5, 2, 8};
  EXPECT_EQ(ls::roll_forecast(w, s, 1, 3, ls::ForecastMode::one_step_true), (std::vector<double>{1, 5, 2}));
  EXPECT_EQ(ls::roll_forecast(w, s, 1, 3, ls::ForecastMode::recursive), (std::vector<double>{1, 1, 1}));
  EXPECT_THROW(ls::roll_forecast(w, s, 0, 1, ls::ForecastMode::recursive), std::invalid_argument);
  EXPECT_THROW(ls::roll_forecast(w, s, 2, 4, ls::ForecastMode::one_step_true), std::invalid_argument);
}
