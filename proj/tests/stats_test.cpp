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

#include <gtest/gtest.h>

#include <boost/math/distributions/binomial.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "mitrainer/fidelity.hpp"
#include "mitrainer/stats.hpp"

using namespace mitrainer;

namespace {

// Independent oracle for small n: integer Pascal row times long double powers.
long double pascal_upper(int n, int k, long double p) {
  std::vector<std::uint64_t> row{1};
  for (int i = 1; i <= n; ++i) {
    std::vector<std::uint64_t> next(static_cast<std::size_t>(i) + 1, 1);
    for (int j = 1; j < i; ++j) next[j] = row[j - 1] + row[j];
    row = std::move(next);
  }
  long double sum = 0;
  for (int i = k; i <= n; ++i) {
    sum += static_cast<long double>(row[i]) * std::pow(p, static_cast<long double>(i)) *
           std::pow(1.0L - p, static_cast<long double>(n - i));
  }
  return sum;
}

// Two-way sums of squares, computed from the textbook decomposition.
double oracle_icc(const std::vector<std::vector<double>>& x) {
  const auto n = static_cast<long double>(x.size());
  const auto k = static_cast<long double>(x[0].size());
  long double grand = 0;
  for (const auto& r : x) for (const double v : r) grand += v;
  grand /= n * k;
  long double sst = 0, ssr = 0, ssc = 0;
  for (const auto& r : x) {
    long double rm = 0;
    for (const double v : r) {
      rm += v;
      sst += (v - grand) * (v - grand);
    }
    rm /= k;
    ssr += k * (rm - grand) * (rm - grand);
  }
  for (std::size_t j = 0; j < x[0].size(); ++j) {
    long double cm = 0;
    for (const auto& r : x) cm += r[j];
    cm /= n;
    ssc += n * (cm - grand) * (cm - grand);
  }
  const long double msr = ssr / (n - 1);
  const long double msc = ssc / (k - 1);
  const long double mse = (sst - ssr - ssc) / ((n - 1) * (k - 1));
  return static_cast<double>((msr - mse) / (msr + (k - 1) * mse + k * (msc - mse) / n));
}

const std::vector<std::vector<double>> kFixture{{9, 2, 5}, {6, 1, 3}, {8, 4, 6},
                                               {7, 1, 2}, {10, 5, 6}, {6, 2, 4}};

}  // namespace

TEST(Binomial, KnownValues) {
  EXPECT_NEAR(exact_binomial_upper(18, 17, 1.0 / 3.0), 37.0 / std::pow(3.0, 18), 1e-20);
  EXPECT_DOUBLE_EQ(exact_binomial_upper(10, 0, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(exact_binomial_upper(4, 4, 0.5), 1.0 / 16.0);
  EXPECT_DOUBLE_EQ(exact_binomial_upper(4, 2, 0.5), 11.0 / 16.0);
  EXPECT_DOUBLE_EQ(binomial_pmf(5, 2, 0.5), 10.0 / 32.0);
  EXPECT_NEAR(exact_binomial_upper(22, 22, 1.0 / 16.0), std::pow(1.0 / 16.0, 22), 1e-40);
}

TEST(Binomial, MatchesPascalOracle) {
  for (const double p : {1.0 / 3.0, 1.0 / 6.0, 0.2, 1.0 / 16.0, 0.5, 0.97}) {
    for (int n = 1; n <= 60; n += 7) {
      for (int k = 0; k <= n; ++k) {
        const long double expected = pascal_upper(n, k, p);
        const double got = exact_binomial_upper(n, k, p);
        EXPECT_NEAR(got, static_cast<double>(expected), 1e-12 * std::max(1.0L, expected) + 1e-15 * expected)
            << n << " " << k << " " << p;
        if (expected > 1e-300L) {
          EXPECT_NEAR(got / static_cast<double>(expected), 1.0, 1e-12) << n << " " << k << " " << p;
        }
      }
    }
  }
}

TEST(Binomial, MatchesBoostForLargeN) {
  for (const int n : {100, 500, 2000, 10000}) {
    const double p = 0.2;
    const boost::math::binomial_distribution<double> dist(n, p);
    for (const int k : {1, n / 10, n / 5, n / 4, n / 3}) {
      const double expected = boost::math::cdf(boost::math::complement(dist, k - 1));
      EXPECT_NEAR(exact_binomial_upper(n, k, p) / expected, 1.0, 1e-10) << n << " " << k;
    }
  }
}

TEST(Binomial, PmfSumsToOneAndUpperIsMonotone) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = static_cast<int>(gen() % 64) + 1;
    const double p = u(gen);
    double sum = 0;
    for (int k = 0; k <= n; ++k) sum += binomial_pmf(n, k, p);
    EXPECT_NEAR(sum, 1.0, 1e-12);
    double prev = 1.0;
    for (int k = 0; k <= n; ++k) {
      const double v = exact_binomial_upper(n, k, p);
      EXPECT_LE(v, prev + 1e-15);
      EXPECT_GE(v, 0.0);
      prev = v;
    }
  }
}

TEST(Binomial, RejectsBadArguments) {
  EXPECT_THROW(exact_binomial_upper(5, 6, 0.5), InvalidArgument);
  EXPECT_THROW(exact_binomial_upper(5, -1, 0.5), InvalidArgument);
  EXPECT_THROW(exact_binomial_upper(10001, 1, 0.5), InvalidArgument);
  EXPECT_THROW(exact_binomial_upper(5, 1, 0.0), InvalidArgument);
  EXPECT_THROW(exact_binomial_upper(5, 1, 1.0), InvalidArgument);
  EXPECT_THROW(exact_binomial_upper(5, 1, std::nan("")), InvalidArgument);
  EXPECT_THROW(binomial_pmf(-1, 0, 0.5), InvalidArgument);
}

TEST(Icc, FixtureValue) {
  const RatingMatrix m(kFixture);
  const auto a = two_way_anova(m);
  EXPECT_NEAR(a.ms_rows, 69.0 / 10.0, 1e-12);
  EXPECT_NEAR(a.ms_columns, 247.0 / 6.0, 1e-12);
  EXPECT_NEAR(a.ms_error, 17.0 / 30.0, 1e-12);
  EXPECT_NEAR(icc_absolute_agreement(m), 19.0 / 85.0, 1e-9);
}

TEST(Icc, PerfectAgreementAndDegenerateCases) {
  EXPECT_NEAR(icc_absolute_agreement(RatingMatrix({{1, 1}, {4, 4}, {2, 2}})), 1.0, 1e-12);
  EXPECT_THROW(icc_absolute_agreement(RatingMatrix({{3, 3}, {3, 3}})), DegenerateVariance);
  EXPECT_THROW(RatingMatrix({{1, 2}}), InvalidArgument);
  EXPECT_THROW(RatingMatrix({{1}, {2}}), InvalidArgument);
  EXPECT_THROW(RatingMatrix({{1, 2}, {3}}), InvalidArgument);
  EXPECT_THROW(RatingMatrix({{1, 2}, {3, std::nan("")}}), InvalidArgument);
}

TEST(Icc, RandomMatricesMatchOracleAndInvariances) {
  std::mt19937_64 gen(19);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = gen() % 10 + 2, k = gen() % 5 + 2;
    std::vector<std::vector<double>> x(n, std::vector<double>(k));
    for (auto& r : x) for (auto& v : r) v = static_cast<double>(gen() % 5 + 1);
    double icc = 0;
    try {
      icc = icc_absolute_agreement(RatingMatrix(x));
    } catch (const DegenerateVariance&) {
      continue;
    }
    ++checked;
    EXPECT_NEAR(icc, oracle_icc(x), 1e-9);
    EXPECT_LE(icc, 1.0 + 1e-12);

    auto shifted = x;
    for (auto& r : shifted) for (auto& v : r) v += 17.5;
    EXPECT_NEAR(icc_absolute_agreement(RatingMatrix(shifted)), icc, 1e-9);

    auto rows = x;
    std::shuffle(rows.begin(), rows.end(), gen);
    EXPECT_NEAR(icc_absolute_agreement(RatingMatrix(rows)), icc, 1e-9);

    auto cols = x;
    for (auto& r : cols) std::reverse(r.begin(), r.end());
    EXPECT_NEAR(icc_absolute_agreement(RatingMatrix(cols)), icc, 1e-9);
  }
  EXPECT_GT(checked, 250);
}

TEST(Icc, RatingSummary) {
  const auto s = rating_summary(RatingMatrix({{1, 2}, {3, 4}}));
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  EXPECT_NEAR(s.sd, std::sqrt(5.0 / 3.0), 1e-12);
}

// ---------------------------------------------------------------------------

TEST(Fidelity, OptionCountsAndChance) {
  EXPECT_EQ(option_count(PersonaAttribute::gender), 3U);
  EXPECT_EQ(option_count(PersonaAttribute::age), 6U);
  EXPECT_EQ(option_count(PersonaAttribute::ethnicity), 5U);
  EXPECT_EQ(option_count(PersonaAttribute::occupation), 5U);
  EXPECT_EQ(option_count(PersonaAttribute::personality), 16U);
  FidelityTrial t;
  EXPECT_THROW(t.p_value(), InvalidArgument);
}

TEST(Fidelity, PerfectAndWrongGuessers) {
  FidelityProbeConfig config;
  config.script = default_probe_script();
  const auto perfect = fidelity_probe(PersonaCatalog::builtin(), config, perfect_guess);
  EXPECT_EQ(perfect.sessions.size(), 22U);
  for (const auto& t : perfect.trials) {
    EXPECT_EQ(t.n_trials, 22);
    EXPECT_DOUBLE_EQ(t.accuracy(), 1.0);
    EXPECT_NEAR(t.p_value() / std::pow(t.chance_p, 22), 1.0, 1e-12);
  }
  const auto wrong = fidelity_probe(PersonaCatalog::builtin(), config, wrong_guess);
  for (const auto& t : wrong.trials) {
    EXPECT_EQ(t.n_correct, 0);
    EXPECT_DOUBLE_EQ(t.p_value(), 1.0);
  }
}

TEST(Fidelity, KeywordGuesserTally) {
  FidelityProbeConfig config;
  config.script = default_probe_script();
  const auto report = fidelity_probe(PersonaCatalog::builtin(), config, keyword_guess);
  const std::array<int, 5> expected{22, 4, 6, 22, 2};  // gender, age, ethnicity, occupation, personality
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(report.trials[i].n_correct, expected[i]) << enum_name(report.trials[i].attribute);
    EXPECT_EQ(report.trials[i].n_trials, 22);
  }
  EXPECT_LT(report.trials[0].p_value(), 1e-9);
  EXPECT_GT(report.trials[4].p_value(), 0.05);
  const Json j = fidelity_table_json(report);
  EXPECT_EQ(j["schema"], "fidelity_v1");
  EXPECT_EQ(j["rows"].size(), 5U);
  EXPECT_EQ(fidelity_table_json(report), fidelity_table_json(fidelity_probe(PersonaCatalog::builtin(), config, keyword_guess)));
  EXPECT_NE(fidelity_table_text(report).find("occupation"), std::string::npos);
}

TEST(Fidelity, RejectsEmptyProbe) {
  FidelityProbeConfig config;
  config.script = default_probe_script();
  config.sessions_per_persona = 0;
  EXPECT_THROW(fidelity_probe(PersonaCatalog::builtin(), config, keyword_guess), InvalidArgument);
  config.sessions_per_persona = 1;
  config.script.clear();
  EXPECT_THROW(fidelity_probe(PersonaCatalog::builtin(), config, keyword_guess), InvalidArgument);
  config.script = default_probe_script();
  config.persona_ids = {"p99"};
  EXPECT_THROW(fidelity_probe(PersonaCatalog::builtin(), config, keyword_guess), NotFound);
}
