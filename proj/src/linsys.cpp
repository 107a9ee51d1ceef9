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

#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace qforecast::linsys {

Date parse_date(std::string_view text) {
  auto bad = [&] { return std::invalid_argument("invalid date '" + std::string(text) + "' (want YYYY-MM-DD)"); };
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') throw bad();
  auto field = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    const char* first = text.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, v);
    if (ec != std::errc() || ptr != first + len) throw bad();
    return v;
  };
  const Date d{std::chrono::year{field(0, 4)}, std::chrono::month{static_cast<unsigned>(field(5, 2))},
               std::chrono::day{static_cast<unsigned>(field(8, 2))}};
  if (!d.ok()) throw bad();
  return d;
}

std::string format_date(Date d) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

void TimeSeries::validate() const {
  if (dates.size() != values.size()) throw std::invalid_argument("dates and values differ in length");
  for (std::size_t i = 1; i < dates.size(); ++i) {
    if (dates[i - 1] + std::chrono::months{1} != dates[i])
      throw std::invalid_argument("dates " + format_date(dates[i - 1]) + " and " +
                                  format_date(dates[i]) + " are not one month apart");
  }
}

TimeSeries difference(const TimeSeries& series) {
  if (series.size() < 2) throw std::invalid_argument("differencing needs at least two values");
  TimeSeries out;
  out.dates.assign(series.dates.begin() + 1, series.dates.end());
  out.values.reserve(series.size() - 1);
  for (std::size_t t = 0; t + 1 < series.size(); ++t)
    out.values.push_back(series.values[t + 1] - series.values[t]);
  return out;
}

TimeSeries invert_difference(const TimeSeries& diffs, double anchor) {
  TimeSeries out;
  out.dates = diffs.dates;
  out.values.reserve(diffs.size());
  double level = anchor;
  for (double d : diffs.values) {
    level += d;
    out.values.push_back(level);
  }
  return out;
}

Scaler::Scaler(double half_width, double max_abs) : half_width_(half_width), max_abs_(max_abs) {
  if (!(half_width > 0)) throw std::invalid_argument("scaler half width must be positive");
  if (!(max_abs > 0) || !std::isfinite(max_abs)) throw std::invalid_argument("degenerate scale: max |difference| is zero");
}

std::vector<double> Scaler::apply(std::span<const double> values) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(apply(v));
  return out;
}

std::vector<double> Scaler::invert(std::span<const double> values) const {
  std::vector<double> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(invert(v));
  return out;
}

Scaler fit_scaler(std::span<const double> training_diffs, double half_width) {
  if (training_diffs.empty()) throw std::invalid_argument("scaler needs training data");
  double max_abs = 0;
  for (double d : training_diffs) max_abs = std::max(max_abs, std::abs(d));
  return Scaler(half_width, max_abs);
}

WindowSystem build_windows(std::span<const double> values, int window) {
  const auto n = static_cast<Eigen::Index>(values.size());
  if (window < 1) throw std::invalid_argument("window size must be >= 1");
  if (window >= n) throw std::invalid_argument("window size must be smaller than the series length");
  const Eigen::Index rows = n - window;
  WindowSystem ws{Eigen::MatrixXd(rows, window), Eigen::VectorXd(rows), window};
  for (Eigen::Index t = 0; t < rows; ++t) {
    for (Eigen::Index j = 0; j < window; ++j) ws.x(t, j) = values[static_cast<std::size_t>(t + j)];
    ws.y[t] = values[static_cast<std::size_t>(t + window)];
  }
  return ws;
}

NormalSystem normal_equations(const WindowSystem& ws) {
  NormalSystem sys{ws.x.transpose() * ws.x, ws.x.transpose() * ws.y};
  // Symmetrize away the last-bit asymmetry of the product.
  sys.a = 0.5 * (sys.a + sys.a.transpose()).eval();
  return sys;
}

Eigen::VectorXd solve_classical(const NormalSystem& system) {
  if (system.a.rows() != system.a.cols() || system.a.rows() != system.b.size())
    throw std::invalid_argument("normal system shapes do not match");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(system.a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::VectorXd& sigma = svd.singularValues();
  const double cutoff = kPseudoInverseCutoff * (sigma.size() > 0 ? sigma[0] : 0.0);
  Eigen::VectorXd utb = svd.matrixU().transpose() * system.b;
  for (Eigen::Index i = 0; i < sigma.size(); ++i) utb[i] = sigma[i] > cutoff ? utb[i] / sigma[i] : 0.0;
  return svd.matrixV() * utb;
}

double condition_number(const Eigen::MatrixXd& a) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a);
  const Eigen::VectorXd& sigma = svd.singularValues();
  if (sigma.size() == 0 || sigma[0] == 0.0) throw std::invalid_argument("condition number of a zero matrix");
  const double smin = sigma[sigma.size() - 1];
  if (smin <= 1e-300) return std::numeric_limits<double>::infinity();
  return sigma[0] / smin;
}

double predict_next(const Eigen::VectorXd& w, std::span<const double> window) {
  if (static_cast<std::size_t>(w.size()) != window.size())
    throw std::invalid_argument("weight and window lengths differ");
  double total = 0;
  for (std::size_t j = 0; j < window.size(); ++j) total += w[static_cast<Eigen::Index>(j)] * window[j];
  return total;
}

std::vector<double> roll_forecast(const Eigen::VectorXd& w, std::span<const double> series,
                                  std::size_t origin, int horizon, ForecastMode mode) {
  const auto m = static_cast<std::size_t>(w.size());
  if (horizon <= 0) throw std::invalid_argument("forecast horizon must be positive");
  if (origin < m) throw std::invalid_argument("forecast origin leaves fewer than m lags");
  if (origin > series.size()) throw std::invalid_argument("forecast origin beyond the series");
  const auto h = static_cast<std::size_t>(horizon);
  if (mode == ForecastMode::one_step_true && origin + h - 1 > series.size())
    throw std::invalid_argument("one-step-true forecasting needs actual lags for the whole horizon");

  std::vector<double> out;
  out.reserve(h);
  if (mode == ForecastMode::one_step_true) {
    for (std::size_t t = origin; t < origin + h; ++t) out.push_back(predict_next(w, series.subspan(t - m, m)));
    return out;
  }
  std::vector<double> buffer(series.begin() + static_cast<std::ptrdiff_t>(origin - m),
                             series.begin() + static_cast<std::ptrdiff_t>(origin));
  for (std::size_t i = 0; i < h; ++i) {
    const double next = predict_next(w, std::span<const double>(buffer).last(m));
    out.push_back(next);
    buffer.push_back(next);
  }
  return out;
}

}  // namespace qforecast::linsys
