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

#include <map>
#include <random>

#include "mitrainer/metrics.hpp"
#include "mitrainer/persona_catalog.hpp"
#include "mitrainer/report.hpp"
#include "support.hpp"

using namespace mitrainer;
using BC = BehaviorCode;

namespace {

GlobalScores scores(int partnership, int empathy, int cultivating, int softening) {
  GlobalScores g;
  g.partnership = {partnership, "r"};
  g.empathy = {empathy, "r"};
  g.cultivating_change_talk = {cultivating, "r"};
  g.softening_sustain_talk = {softening, "r"};
  return g;
}

struct Crafted {
  const char* name;
  std::vector<std::vector<BC>> turns;
  int adherent, non_adherent, neutral;
  std::optional<double> adherent_pct, non_adherent_pct;
  std::optional<double> adherent_pct_total, non_adherent_pct_total;
  std::optional<double> pct_cr;
  Band pct_cr_band;
  std::optional<double> rq;
  Band rq_band;
};

// Expected values worked out by hand against the default thresholds
// (%CR fair 40 good 50, R:Q fair 1 good 2).
const std::vector<Crafted>& crafted() {
  using std::nullopt;
  static const std::vector<Crafted> cases{
      {"one_of_each_reflection", {{BC::question}, {BC::simple_reflection}, {BC::complex_reflection}},
       0, 0, 3, nullopt, nullopt, 0.0, 0.0, 50.0, Band::good, 2.0, Band::good},
      {"question_heavy", {{BC::question}, {BC::question}, {BC::simple_reflection}},
       0, 0, 3, nullopt, nullopt, 0.0, 0.0, 0.0, Band::below_fair, 0.5, Band::below_fair},
      {"mostly_complex",
       {{BC::complex_reflection}, {BC::complex_reflection}, {BC::simple_reflection}, {BC::question}, {BC::question}},
       0, 0, 5, nullopt, nullopt, 0.0, 0.0, 200.0 / 3.0, Band::good, 1.5, Band::fair},
      {"non_adherent_mix", {{BC::question, BC::affirmation}, {BC::persuading}, {BC::confront}},
       1, 2, 1, 100.0 / 3.0, 200.0 / 3.0, 25.0, 50.0, nullopt, Band::not_computable, 0.0, Band::below_fair},
      {"uncoded", {{}, {}}, 0, 0, 0, nullopt, nullopt, nullopt, nullopt, nullopt, Band::not_computable,
       nullopt, Band::not_computable},
      {"balanced",
       {{BC::simple_reflection}, {BC::simple_reflection}, {BC::complex_reflection}, {BC::complex_reflection},
        {BC::question}, {BC::question}},
       0, 0, 6, nullopt, nullopt, 0.0, 0.0, 50.0, Band::good, 2.0, Band::good},
      {"fair_boundaries",
       {{BC::complex_reflection}, {BC::complex_reflection}, {BC::simple_reflection}, {BC::simple_reflection},
        {BC::simple_reflection}, {BC::question}, {BC::question}, {BC::question}, {BC::question}, {BC::question}},
       0, 0, 10, nullopt, nullopt, 0.0, 0.0, 40.0, Band::fair, 1.0, Band::fair},
      {"just_below_fair",
       {{BC::complex_reflection}, {BC::simple_reflection}, {BC::simple_reflection}, {BC::question}, {BC::question}},
       0, 0, 5, nullopt, nullopt, 0.0, 0.0, 100.0 / 3.0, Band::below_fair, 1.5, Band::fair},
      {"all_adherent",
       {{BC::seeking_collaboration, BC::emphasizing_autonomy}, {BC::affirmation}, {BC::giving_information},
        {BC::persuading_with_permission}},
       3, 0, 2, 100.0, 0.0, 60.0, 0.0, nullopt, Band::not_computable, nullopt, Band::not_computable},
      {"question_and_reflection_together", {{BC::question, BC::complex_reflection}},
       0, 0, 2, nullopt, nullopt, 0.0, 0.0, 100.0, Band::good, 1.0, Band::fair},
  };
  return cases;
}

void expect_opt_near(const std::optional<double>& actual, const std::optional<double>& expected,
                     const std::string& what) {
  ASSERT_EQ(actual.has_value(), expected.has_value()) << what;
  if (expected) EXPECT_NEAR(*actual, *expected, 1e-9) << what;
}

SessionRecord record_with(std::vector<TranscriptEntry> transcript) {
  SessionRecord r;
  r.session_id = "u-s1";
  r.participant_id = "u";
  r.persona_id = "p01";
  r.status = SessionStatus::ended;
  r.transcript = std::move(transcript);
  return r;
}

}  // namespace

TEST(Metrics, CraftedTranscripts) {
  const ThresholdConfig t;
  for (const auto& c : crafted()) {
    SCOPED_TRACE(c.name);
    const auto transcript = fixtures::coded_transcript(c.turns);
    const auto freq = count_behaviors(transcript);
    const auto a = adherence_breakdown(freq);
    EXPECT_EQ(a.adherent_count, c.adherent);
    EXPECT_EQ(a.non_adherent_count, c.non_adherent);
    EXPECT_EQ(a.neutral_count, c.neutral);
    expect_opt_near(a.adherent_pct, c.adherent_pct, "adherent_pct");
    expect_opt_near(a.non_adherent_pct, c.non_adherent_pct, "non_adherent_pct");
    expect_opt_near(a.adherent_pct_of_total, c.adherent_pct_total, "adherent_pct_of_total");
    expect_opt_near(a.non_adherent_pct_of_total, c.non_adherent_pct_total, "non_adherent_pct_of_total");
    const auto comp = competencies(nullptr, freq, t);
    expect_opt_near(comp[2].value, c.pct_cr, "pct_cr");
    EXPECT_EQ(comp[2].band, c.pct_cr_band);
    expect_opt_near(comp[3].value, c.rq, "rq");
    EXPECT_EQ(comp[3].band, c.rq_band);
    EXPECT_EQ(comp[0].band, Band::not_computable);
    EXPECT_EQ(comp[1].band, Band::not_computable);
  }
}

TEST(Metrics, SummaryScores) {
  const ThresholdConfig t;
  struct Row {
    GlobalScores g;
    double rel;
    Band rel_band;
    double tech;
    Band tech_band;
  };
  const std::vector<Row> rows{
      {scores(4, 4, 4, 4), 4.0, Band::good, 4.0, Band::good},
      {scores(4, 3, 3, 3), 3.5, Band::fair, 3.0, Band::fair},
      {scores(3, 3, 2, 3), 3.0, Band::below_fair, 2.5, Band::below_fair},
      {scores(5, 4, 5, 2), 4.5, Band::good, 3.5, Band::fair},
      {scores(1, 1, 1, 1), 1.0, Band::below_fair, 1.0, Band::below_fair},
  };
  for (const auto& r : rows) {
    EXPECT_DOUBLE_EQ(relational_score(r.g), r.rel);
    EXPECT_DOUBLE_EQ(technical_score(r.g), r.tech);
    const auto comp = competencies(&r.g, BehaviorFrequency{}, t);
    EXPECT_EQ(comp[0].band, r.rel_band);
    EXPECT_EQ(comp[1].band, r.tech_band);
    EXPECT_EQ(comp[0].threshold, t.relational);
  }
}

TEST(Metrics, BandBoundaries) {
  const Threshold th{3.5, 4.0};
  EXPECT_EQ(band(4.0, th), Band::good);
  EXPECT_EQ(band(3.9999, th), Band::fair);
  EXPECT_EQ(band(3.5, th), Band::fair);
  EXPECT_EQ(band(3.4999, th), Band::below_fair);
  EXPECT_EQ(band(std::nullopt, th), Band::not_computable);
  EXPECT_EQ(band(2.0, Threshold{2.0, 2.0}), Band::good);
  EXPECT_THROW(band(1.0, Threshold{4.0, 3.0}), InvalidConfiguration);
  ThresholdConfig bad;
  bad.technical = {4.5, 4.0};
  EXPECT_THROW(bad.validate(), InvalidConfiguration);
}

TEST(Metrics, BandIsMonotoneInValue) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  const auto rank = [](Band b) { return b == Band::good ? 2 : b == Band::fair ? 1 : 0; };
  for (int i = 0; i < 2000; ++i) {
    double fair = u(gen), good = u(gen);
    if (fair > good) std::swap(fair, good);
    double lo = u(gen), hi = u(gen);
    if (lo > hi) std::swap(lo, hi);
    EXPECT_LE(rank(band(lo, {fair, good})), rank(band(hi, {fair, good})));
  }
}

TEST(Metrics, CountingMatchesIndependentTallyOnRandomTranscripts) {
  // Oracle: tally code names as strings and classify with its own lists.
  static const std::vector<std::string> adherent_names{"affirmation", "seeking_collaboration",
                                                       "emphasizing_autonomy"};
  static const std::vector<std::string> non_adherent_names{"persuading", "confront"};
  const auto in = [](const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
  };
  std::mt19937_64 gen(2024);
  for (int trial = 0; trial < 1000; ++trial) {
    const int turns = std::uniform_int_distribution<int>(0, 20)(gen);
    std::vector<std::vector<BC>> coded;
    std::map<std::string, int> tally;
    int total = 0;
    for (int t = 0; t < turns; ++t) {
      std::vector<BC> codes;
      for (int c = 0; c < 10; ++c) {
        if (std::uniform_int_distribution<int>(0, 3)(gen) == 0) {
          codes.push_back(static_cast<BC>(c));
          ++tally[std::string(EnumNames<BC>::names[c])];
          ++total;
        }
      }
      coded.push_back(codes);
    }
    const auto transcript = fixtures::coded_transcript(coded);
    const auto freq = count_behaviors(transcript);
    ASSERT_EQ(freq.total, total);
    for (const auto code : enum_values<BC>()) {
      ASSERT_EQ(freq.count(code), tally[std::string(enum_name(code))]);
    }
    int adh = 0, non = 0;
    for (const auto& [name, n] : tally) {
      if (in(adherent_names, name)) adh += n;
      if (in(non_adherent_names, name)) non += n;
    }
    const auto a = adherence_breakdown(freq);
    ASSERT_EQ(a.adherent_count, adh);
    ASSERT_EQ(a.non_adherent_count, non);
    ASSERT_EQ(a.adherent_count + a.non_adherent_count + a.neutral_count, freq.total);
    if (adh + non > 0) {
      ASSERT_NEAR(*a.adherent_pct + *a.non_adherent_pct, 100.0, 1e-9);
      ASSERT_NEAR(*a.adherent_pct, 100.0 * adh / (adh + non), 1e-12);
    } else {
      ASSERT_FALSE(a.adherent_pct.has_value());
    }
    const int cr = tally["complex_reflection"], sr = tally["simple_reflection"], q = tally["question"];
    const auto pct = pct_complex_reflections(freq);
    ASSERT_EQ(pct.has_value(), cr + sr > 0);
    if (pct) ASSERT_NEAR(*pct, 100.0 * cr / (cr + sr), 1e-12);
    const auto rq = reflection_question_ratio(freq);
    ASSERT_EQ(rq.has_value(), q > 0);
    if (rq) ASSERT_NEAR(*rq, static_cast<double>(cr + sr) / q, 1e-12);
  }
}

TEST(Metrics, PatientEntriesAreNotCounted) {
  auto t = fixtures::coded_transcript({{BC::question}});
  t[1].annotation = UtteranceAnnotation{{{BC::confront, "x"}}};
  EXPECT_EQ(count_behaviors(t).total, 1);
}

TEST(Report, FullReportHasAllModules) {
  const auto rec = record_with(fixtures::coded_transcript({{BC::question}, {BC::complex_reflection}}));
  ReportInputs in;
  in.session = &rec;
  in.global_scores = scores(4, 4, 3, 3);
  in.summary = "Strength: good. Area for improvement: more.";
  in.mi_description = std::string(builtin_mi_description());
  const auto r = build_report(in);
  EXPECT_TRUE(r.unavailable_modules.empty());
  EXPECT_EQ(r.report_id, "report-u-s1");
  EXPECT_EQ(r.factor_trajectory.size(), 2U);
  const Json j = report_json(r);
  EXPECT_EQ(j["schema"], "report_v1");
  const std::vector<std::string> keys{"session_summary", "mi_description", "global_scores", "behavior_frequency",
                                      "adherence", "competencies", "cognitive_factors", "transcript"};
  ASSERT_EQ(j["modules"].size(), keys.size());
  std::size_t i = 0;
  for (const auto& [k, _] : j["modules"].items()) EXPECT_EQ(k, keys[i++]);
  EXPECT_EQ(serialize_report(r), serialize_report(build_report(in)));
  EXPECT_EQ(serialize_report(r).back(), '\n');
  EXPECT_EQ(serialize_report(r), Json::parse(serialize_report(r)).dump(2) + "\n");
}

TEST(Report, MissingInputsNameTheGap) {
  const auto rec = record_with(fixtures::coded_transcript({{BC::question}}));
  ReportInputs in;
  in.session = &rec;
  in.summary = "s";
  in.mi_description = "d";
  try {
    build_report(in);
    FAIL();
  } catch (const IncompleteReport& e) {
    EXPECT_EQ(e.gap(), "global_scores");
  }
  in.global_scores = scores(3, 3, 3, 3);
  in.summary.reset();
  EXPECT_THROW(build_report(in), IncompleteReport);

  const auto empty = record_with({});
  in.session = &empty;
  try {
    build_partial_report(in);
    FAIL();
  } catch (const IncompleteReport& e) {
    EXPECT_EQ(e.gap(), "transcript");
  }
}

TEST(Report, PartialReportMarksUnavailableModules) {
  const auto rec = record_with(fixtures::coded_transcript({{BC::question}, {BC::simple_reflection}}));
  ReportInputs in;
  in.session = &rec;
  in.mi_description = "d";
  in.errors = {"global_scoring: failed"};
  const auto r = build_partial_report(in);
  EXPECT_EQ(r.unavailable_modules,
            (std::vector<DashboardModule>{DashboardModule::session_summary, DashboardModule::global_scores}));
  EXPECT_EQ(r.competencies[0].band, Band::not_computable);
  EXPECT_EQ(r.competencies[3].band, Band::fair);
  const Json j = report_json(r);
  EXPECT_TRUE(j["modules"]["global_scores"].is_null());
  EXPECT_EQ(j["errors"][0], "global_scoring: failed");
}

TEST(Report, AnalysisGapsCarryThrough) {
  auto t = fixtures::coded_transcript({{BC::question}, {BC::question}});
  t[3].analysis_available = false;
  t[2].analysis_available = false;
  t[2].annotation = UtteranceAnnotation{};
  const auto rec = record_with(t);
  ReportInputs in;
  in.session = &rec;
  in.mi_description = "d";
  const auto r = build_partial_report(in);
  ASSERT_EQ(r.factor_trajectory.size(), 2U);
  EXPECT_TRUE(r.factor_trajectory[0].available);
  EXPECT_FALSE(r.factor_trajectory[1].available);
  EXPECT_EQ(r.frequencies.total, 1);
  EXPECT_FALSE(report_json(r)["modules"]["transcript"][2]["analysis_available"].get<bool>());
}

TEST(Report, TranscriptJsonHidesTimestamps) {
  auto t = fixtures::coded_transcript({{BC::question}});
  t[0].timestamp = Timestamp{std::chrono::milliseconds{12345}};
  const Json e = report_transcript_entry_json(t[0]);
  EXPECT_FALSE(e.contains("timestamp"));
  EXPECT_TRUE(e.contains("codes"));
}
