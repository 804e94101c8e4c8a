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

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mitrainer/errors.hpp"

namespace mitrainer {

/// Zero between-subject and residual variance: the ICC is 0/0.
class DegenerateVariance : public Error {
 public:
  explicit DegenerateVariance(const std::string& message)
      : Error(ErrorCode::invalid_argument, "degenerate variance: " + message) {}
};

/// n subjects (rows) by k raters (columns), n >= 2, k >= 2, finite cells.
class RatingMatrix {
 public:
  /// Throws InvalidArgument unless rectangular, at least 2x2 and finite.
  explicit RatingMatrix(std::vector<std::vector<double>> rows);

  std::size_t subjects() const noexcept { return rows_.size(); }
  std::size_t raters() const noexcept { return rows_.front().size(); }
  double at(std::size_t subject, std::size_t rater) const { return rows_.at(subject).at(rater); }
  const std::vector<std::vector<double>>& rows() const noexcept { return rows_; }

 private:
  std::vector<std::vector<double>> rows_;
};

struct AnovaTable {
  double ms_rows = 0;     // subjects
  double ms_columns = 0;  // raters
  double ms_error = 0;
};

AnovaTable two_way_anova(const RatingMatrix& m);

/// ICC(A,1): two-way model, absolute agreement, single rater.
/// Throws DegenerateVariance when every cell is equal or the denominator is zero.
double icc_absolute_agreement(const RatingMatrix& m);

/// P(X >= k) for X ~ Binomial(n, p0), summed exactly: p0 is taken as the
/// dyadic rational it represents and only the final quotient is rounded.
/// Throws InvalidArgument unless 0 <= k <= n <= 10000 and 0 < p0 < 1.
double exact_binomial_upper(int n, int k, double p0);

/// P(X = k), computed the same way.
double binomial_pmf(int n, int k, double p0);

struct RatingSummary {
  double mean = 0;
  double sd = 0;  // sample (n - 1) standard deviation
};

/// Over every cell of the matrix.
RatingSummary rating_summary(const RatingMatrix& m);

}  // namespace mitrainer
