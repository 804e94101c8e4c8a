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

#include "mitrainer/metrics.hpp"

#include "mitrainer/errors.hpp"

namespace mitrainer {

const GlobalScore& GlobalScores::get(GlobalDimension d) const noexcept {
  switch (d) {
    case GlobalDimension::partnership: return partnership;
    case GlobalDimension::empathy: return empathy;
    case GlobalDimension::cultivating_change_talk: return cultivating_change_talk;
    case GlobalDimension::softening_sustain_talk: return softening_sustain_talk;
  }
  return partnership;
}

GlobalScore& GlobalScores::get(GlobalDimension d) noexcept {
  return const_cast<GlobalScore&>(static_cast<const GlobalScores&>(*this).get(d));
}

void GlobalScores::validate() const {
  for (const auto d : enum_values<GlobalDimension>()) {
    const auto& s = get(d);
    if (s.score < kGlobalScoreMin || s.score > kGlobalScoreMax) {
      throw InvalidArgument(std::string(enum_name(d)) + " score " + std::to_string(s.score) +
                            " outside [1, 5]");
    }
    if (s.rationale.empty()) throw InvalidArgument(std::string(enum_name(d)) + " rationale is empty");
  }
}

const Threshold& ThresholdConfig::get(CompetencyMetric m) const noexcept {
  switch (m) {
    case CompetencyMetric::relational: return relational;
    case CompetencyMetric::technical: return technical;
    case CompetencyMetric::pct_complex_reflections: return pct_complex_reflections;
    case CompetencyMetric::reflection_question_ratio: return reflection_question_ratio;
  }
  return relational;
}

Threshold& ThresholdConfig::get(CompetencyMetric m) noexcept {
  return const_cast<Threshold&>(static_cast<const ThresholdConfig&>(*this).get(m));
}

void ThresholdConfig::validate() const {
  for (const auto m : enum_values<CompetencyMetric>()) {
    const auto& t = get(m);
    if (!(t.fair <= t.good)) {
      throw InvalidConfiguration("threshold " + std::string(enum_name(m)) + " has fair " +
                                 std::to_string(t.fair) + " > good " + std::to_string(t.good));
    }
  }
}

BehaviorFrequency count_behaviors(std::span<const TranscriptEntry> transcript) {
  BehaviorFrequency freq;
  for (const auto& entry : transcript) {
    if (entry.speaker != Speaker::counselor || !entry.annotation) continue;
    for (const auto& coded : entry.annotation->codes) {
      ++freq.counts[static_cast<std::size_t>(coded.code)];
      ++freq.total;
    }
  }
  return freq;
}

AdherenceBreakdown adherence_breakdown(const BehaviorFrequency& freq) {
  AdherenceBreakdown out;
  for (const auto code : enum_values<BehaviorCode>()) {
    const int n = freq.count(code);
    switch (adherence_class(code)) {
      case AdherenceClass::adherent: out.adherent_count += n; break;
      case AdherenceClass::non_adherent: out.non_adherent_count += n; break;
      case AdherenceClass::neutral: out.neutral_count += n; break;
    }
  }
  const int pie = out.adherent_count + out.non_adherent_count;
  if (pie > 0) {
    out.adherent_pct = 100.0 * out.adherent_count / pie;
    out.non_adherent_pct = 100.0 * out.non_adherent_count / pie;
  }
  if (freq.total > 0) {
    out.adherent_pct_of_total = 100.0 * out.adherent_count / freq.total;
    out.non_adherent_pct_of_total = 100.0 * out.non_adherent_count / freq.total;
  }
  return out;
}

double relational_score(const GlobalScores& g) noexcept {
  return (g.empathy.score + g.partnership.score) / 2.0;
}

double technical_score(const GlobalScores& g) noexcept {
  return (g.softening_sustain_talk.score + g.cultivating_change_talk.score) / 2.0;
}

std::optional<double> pct_complex_reflections(const BehaviorFrequency& freq) noexcept {
  const int complex = freq.count(BehaviorCode::complex_reflection);
  const int reflections = complex + freq.count(BehaviorCode::simple_reflection);
  if (reflections == 0) return std::nullopt;
  return 100.0 * complex / reflections;
}

std::optional<double> reflection_question_ratio(const BehaviorFrequency& freq) noexcept {
  const int questions = freq.count(BehaviorCode::question);
  if (questions == 0) return std::nullopt;
  const int reflections =
      freq.count(BehaviorCode::complex_reflection) + freq.count(BehaviorCode::simple_reflection);
  return static_cast<double>(reflections) / questions;
}

Band band(std::optional<double> value, Threshold thresholds) {
  if (!(thresholds.fair <= thresholds.good)) {
    throw InvalidConfiguration("fair threshold exceeds good threshold");
  }
  if (!value) return Band::not_computable;
  if (*value >= thresholds.good) return Band::good;
  if (*value >= thresholds.fair) return Band::fair;
  return Band::below_fair;
}

std::array<CompetencyResult, 4> competencies(const GlobalScores* scores, const BehaviorFrequency& freq,
                                             const ThresholdConfig& config) {
  std::array<CompetencyResult, 4> out{};
  for (const auto m : enum_values<CompetencyMetric>()) {
    std::optional<double> value;
    switch (m) {
      case CompetencyMetric::relational:
        if (scores) value = relational_score(*scores);
        break;
      case CompetencyMetric::technical:
        if (scores) value = technical_score(*scores);
        break;
      case CompetencyMetric::pct_complex_reflections: value = pct_complex_reflections(freq); break;
      case CompetencyMetric::reflection_question_ratio: value = reflection_question_ratio(freq); break;
    }
    const Threshold& t = config.get(m);
    out[static_cast<std::size_t>(m)] = CompetencyResult{m, value, band(value, t), t};
  }
  return out;
}

DashboardMetrics compute_metrics(std::span<const TranscriptEntry> transcript,
                                 const GlobalScores* scores, const ThresholdConfig& config) {
  DashboardMetrics m;
  m.frequencies = count_behaviors(transcript);
  m.adherence = adherence_breakdown(m.frequencies);
  m.competencies = competencies(scores, m.frequencies, config);
  return m;
}

}  // namespace mitrainer
