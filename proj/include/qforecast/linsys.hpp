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

#include <chrono>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace qforecast::linsys {

using Date = std::chrono::year_month_day;

/** Parses `YYYY-MM-DD`; throws std::invalid_argument otherwise. */
Date parse_date(std::string_view text);
std::string format_date(Date d);

/** Monthly series: dates strictly increasing one calendar month apart. */
struct TimeSeries {
  std::vector<Date> dates;
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  /** Throws std::invalid_argument on length mismatch or irregular spacing. */
  void validate() const;
};

/** value[t] = input[t + 1] - input[t], dated at the later month. */
TimeSeries difference(const TimeSeries& series);

/** Cumulative sum of `diffs` starting from `anchor`; keeps the diff dates. */
TimeSeries invert_difference(const TimeSeries& diffs, double anchor);

/** Maps differences linearly so that the largest training magnitude lands
 * on +-half_width. Test values are not clipped. */
class Scaler {
 public:
  Scaler(double half_width, double max_abs);

  double half_width() const { return half_width_; }
  double max_abs() const { return max_abs_; }

  double apply(double value) const { return half_width_ * value / max_abs_; }
  double invert(double scaled) const { return scaled * max_abs_ / half_width_; }
  std::vector<double> apply(std::span<const double> values) const;
  std::vector<double> invert(std::span<const double> values) const;

 private:
  double half_width_;
  double max_abs_;
};

inline constexpr double kDefaultHalfWidth = 0.25;

Scaler fit_scaler(std::span<const double> training_diffs, double half_width = kDefaultHalfWidth);

/** Row t of x is values[t .. t + m - 1]; y[t] = values[t + m]. */
struct WindowSystem {
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  int window = 0;
};

WindowSystem build_windows(std::span<const double> values, int window);

/** a = x^T x, b = x^T y. */
struct NormalSystem {
  Eigen::MatrixXd a;
  Eigen::VectorXd b;
};

NormalSystem normal_equations(const WindowSystem& ws);

inline constexpr double kPseudoInverseCutoff = 1e-10;

/** Minimum-norm solution through the SVD; singular values below
 * kPseudoInverseCutoff * sigma_max are treated as zero. */
Eigen::VectorXd solve_classical(const NormalSystem& system);

/** sigma_max / sigma_min, or +infinity when sigma_min <= 1e-300. */
double condition_number(const Eigen::MatrixXd& a);

double predict_next(const Eigen::VectorXd& w, std::span<const double> window);

enum class ForecastMode { one_step_true, recursive };

/**
 * Forecasts positions origin, origin + 1, ..., origin + horizon - 1 of
 * `series`.
 *
 * one_step_true reads every lag from `series`, so `series` must hold actual
 * values up to position origin + horizon - 2. recursive reads actual values
 * before `origin` and feeds predictions back after that.
 */
std::vector<double> roll_forecast(const Eigen::VectorXd& w, std::span<const double> series,
                                  std::size_t origin, int horizon, ForecastMode mode);

}  // namespace qforecast::linsys
