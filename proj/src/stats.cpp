// Copyright 2026 The mitrainer Authors
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

#include "mitrainer/stats.hpp"

#include <algorithm>
#include <cmath>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace mitrainer {

using Wide = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<256, boost::multiprecision::digit_base_2>,
                                          boost::multiprecision::et_off>;

RatingMatrix::RatingMatrix(std::vector<std::vector<double>> rows) : rows_(std::move(rows)) {
  if (rows_.size() < 2) throw InvalidArgument("rating matrix needs at least 2 subjects");
  const auto k = rows_.front().size();
  if (k < 2) throw InvalidArgument("rating matrix needs at least 2 raters");
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].size() != k) throw InvalidArgument("rating matrix row " + std::to_string(i) + " is ragged");
    for (const double v : rows_[i]) {
      if (!std::isfinite(v)) throw InvalidArgument("rating matrix row " + std::to_string(i) + " has a non-finite cell");
    }
  }
}

AnovaTable two_way_anova(const RatingMatrix& m) {
  const auto n = m.subjects();
  const auto k = m.raters();
  std::vector<double> row_mean(n, 0.0);
  std::vector<double> col_mean(k, 0.0);
  double grand = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      row_mean[i] += m.at(i, j);
      col_mean[j] += m.at(i, j);
      grand += m.at(i, j);
    }
  }
  for (auto& v : row_mean) v /= static_cast<double>(k);
  for (auto& v : col_mean) v /= static_cast<double>(n);
  grand /= static_cast<double>(n * k);

  double ss_rows = 0;
  double ss_cols = 0;
  double ss_err = 0;
  for (std::size_t i = 0; i < n; ++i) ss_rows += (row_mean[i] - grand) * (row_mean[i] - grand);
  for (std::size_t j = 0; j < k; ++j) ss_cols += (col_mean[j] - grand) * (col_mean[j] - grand);
  // Residual summed directly rather than as SST - SSR - SSC, which cancels badly.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const double r = m.at(i, j) - row_mean[i] - col_mean[j] + grand;
      ss_err += r * r;
    }
  }
  ss_rows *= static_cast<double>(k);
  ss_cols *= static_cast<double>(n);

  AnovaTable t;
  t.ms_rows = ss_rows / static_cast<double>(n - 1);
  t.ms_columns = ss_cols / static_cast<double>(k - 1);
  t.ms_error = ss_err / static_cast<double>((n - 1) * (k - 1));
  return t;
}

double icc_absolute_agreement(const RatingMatrix& m) {
  const auto& first = m.at(0, 0);
  bool constant = true;
  for (const auto& row : m.rows()) {
    for (const double v : row) constant = constant && v == first;
  }
  if (constant) throw DegenerateVariance("all ratings are identical");

  const auto t = two_way_anova(m);
  const double n = static_cast<double>(m.subjects());
  const double k = static_cast<double>(m.raters());
  const double denom = t.ms_rows + (k - 1) * t.ms_error + (k / n) * (t.ms_columns - t.ms_error);
  if (denom == 0.0) throw DegenerateVariance("ICC denominator is zero");
  return (t.ms_rows - t.ms_error) / denom;
}

namespace {

constexpr int kMaxBinomialN = 10000;

void check_domain(int n, int k, double p0) {
  if (n < 0 || n > kMaxBinomialN) throw InvalidArgument("binomial n must be in [0, 10000]");
  if (k < 0 || k > n) throw InvalidArgument("binomial k must be in [0, n]");
  if (!(p0 > 0.0 && p0 < 1.0)) throw InvalidArgument("binomial p0 must be in (0, 1)");
}

/// Sum of C(n,i) p^i (1-p)^(n-i) over i in [lo, hi], carried in 256-bit binary
/// floating point so rounding stays far below double resolution for any n we accept.
Wide pmf_sum(int n, int lo, int hi, double p0) {
  const Wide p = p0;
  const Wide q = Wide(1) - p;
  const Wide ratio = p / q;
  Wide term = boost::multiprecision::pow(q, n);  // i = 0
  Wide sum = 0;
  for (int i = 0; i <= hi; ++i) {
    if (i >= lo) sum += term;
    term *= n - i;
    term /= i + 1;
    term *= ratio;
  }
  return sum;
}

}  // namespace

double exact_binomial_upper(int n, int k, double p0) {
  check_domain(n, k, p0);
  if (k == 0) return 1.0;
  return std::min(1.0, static_cast<double>(pmf_sum(n, k, n, p0)));
}

double binomial_pmf(int n, int k, double p0) {
  check_domain(n, k, p0);
  return static_cast<double>(pmf_sum(n, k, k, p0));
}

RatingSummary rating_summary(const RatingMatrix& m) {
  double sum = 0;
  std::size_t count = 0;
  for (const auto& row : m.rows()) {
    for (const double v : row) {
      sum += v;
      ++count;
    }
  }
  RatingSummary s;
  s.mean = sum / static_cast<double>(count);
  double ss = 0;
  for (const auto& row : m.rows()) {
    for (const double v : row) ss += (v - s.mean) * (v - s.mean);
  }
  s.sd = std::sqrt(ss / static_cast<double>(count - 1));
  return s;
}

}  // namespace mitrainer
