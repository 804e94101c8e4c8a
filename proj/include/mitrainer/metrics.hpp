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

#include <array>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mitrainer/domain.hpp"

namespace mitrainer {

enum class GlobalDimension { partnership, empathy, cultivating_change_talk, softening_sustain_talk };

template <>
struct EnumNames<GlobalDimension> {
  static constexpr std::array<std::string_view, 4> names{
      "partnership", "empathy", "cultivating_change_talk", "softening_sustain_talk"};
};

inline constexpr int kGlobalScoreMin = 1;
inline constexpr int kGlobalScoreMax = 5;

struct GlobalScore {
  int score = kGlobalScoreMin;
  std::string rationale;

  friend bool operator==(const GlobalScore&, const GlobalScore&) = default;
};

struct GlobalScores {
  GlobalScore partnership;
  GlobalScore empathy;
  GlobalScore cultivating_change_talk;
  GlobalScore softening_sustain_talk;

  const GlobalScore& get(GlobalDimension d) const noexcept;
  GlobalScore& get(GlobalDimension d) noexcept;
  /// Throws InvalidArgument on a score outside 1..5 or an empty rationale.
  void validate() const;

  friend bool operator==(const GlobalScores&, const GlobalScores&) = default;
};

struct BehaviorFrequency {
  std::array<int, 10> counts{};  // indexed by BehaviorCode
  int total = 0;

  int count(BehaviorCode code) const noexcept { return counts[static_cast<std::size_t>(code)]; }
  friend bool operator==(const BehaviorFrequency&, const BehaviorFrequency&) = default;
};

/// Two percentage families: `*_pct` over adherent + non-adherent (the pie),
/// `*_pct_of_total` over every code. nullopt when the denominator is zero.
struct AdherenceBreakdown {
  int adherent_count = 0;
  int non_adherent_count = 0;
  int neutral_count = 0;
  std::optional<double> adherent_pct;
  std::optional<double> non_adherent_pct;
  std::optional<double> adherent_pct_of_total;
  std::optional<double> non_adherent_pct_of_total;

  friend bool operator==(const AdherenceBreakdown&, const AdherenceBreakdown&) = default;
};

enum class CompetencyMetric { relational, technical, pct_complex_reflections, reflection_question_ratio };

template <>
struct EnumNames<CompetencyMetric> {
  static constexpr std::array<std::string_view, 4> names{
      "relational", "technical", "pct_complex_reflections", "reflection_question_ratio"};
};

struct Threshold {
  double fair = 0.0;
  double good = 0.0;

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

/// Proficiency thresholds; defaults follow the MITI 4.2.1 fair/good levels.
struct ThresholdConfig {
  Threshold relational{3.5, 4.0};
  Threshold technical{3.0, 4.0};
  Threshold pct_complex_reflections{40.0, 50.0};
  Threshold reflection_question_ratio{1.0, 2.0};

  const Threshold& get(CompetencyMetric m) const noexcept;
  Threshold& get(CompetencyMetric m) noexcept;
  /// Throws InvalidConfiguration when fair > good for any metric.
  void validate() const;

  friend bool operator==(const ThresholdConfig&, const ThresholdConfig&) = default;
};

enum class Band { good, fair, below_fair, not_computable };

template <>
struct EnumNames<Band> {
  static constexpr std::array<std::string_view, 4> names{"good", "fair", "below_fair",
                                                         "not_computable"};
};

struct CompetencyResult {
  CompetencyMetric metric = CompetencyMetric::relational;
  std::optional<double> value;
  Band band = Band::not_computable;
  Threshold threshold;

  friend bool operator==(const CompetencyResult&, const CompetencyResult&) = default;
};

BehaviorFrequency count_behaviors(std::span<const TranscriptEntry> transcript);
AdherenceBreakdown adherence_breakdown(const BehaviorFrequency& freq);

double relational_score(const GlobalScores& g) noexcept;
double technical_score(const GlobalScores& g) noexcept;
/// 100 * CR / (CR + SR).
std::optional<double> pct_complex_reflections(const BehaviorFrequency& freq) noexcept;
/// (CR + SR) / questions.
std::optional<double> reflection_question_ratio(const BehaviorFrequency& freq) noexcept;

/// good iff value >= good; fair iff fair <= value < good; else below_fair.
/// Throws InvalidConfiguration when fair > good.
Band band(std::optional<double> value, Threshold thresholds);

/// The four competency bars. Relational and technical are not computable
/// without global scores.
std::array<CompetencyResult, 4> competencies(const GlobalScores* scores, const BehaviorFrequency& freq,
                                             const ThresholdConfig& config);

/// Everything the summary agent sees besides the transcript and scores.
struct DashboardMetrics {
  BehaviorFrequency frequencies;
  AdherenceBreakdown adherence;
  std::array<CompetencyResult, 4> competencies{};
};

DashboardMetrics compute_metrics(std::span<const TranscriptEntry> transcript,
                                 const GlobalScores* scores, const ThresholdConfig& config);

}  // namespace mitrainer
