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

#include <optional>
#include <string>
#include <vector>

#include "mitrainer/domain.hpp"
#include "mitrainer/json_io.hpp"
#include "mitrainer/metrics.hpp"

namespace mitrainer {

inline constexpr std::string_view kReportSchema = "report_v1";

/// The eight dashboard modules, in display order.
enum class DashboardModule {
  session_summary,
  mi_description,
  global_scores,
  behavior_frequency,
  adherence,
  competencies,
  cognitive_factors,
  transcript,
};

template <>
struct EnumNames<DashboardModule> {
  static constexpr std::array<std::string_view, 8> names{
      "session_summary", "mi_description", "global_scores",     "behavior_frequency",
      "adherence",       "competencies",   "cognitive_factors", "transcript"};
};

struct TrajectoryPoint {
  int turn_index = 0;
  CognitiveState state;
  bool available = true;

  friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

struct DashboardReport {
  std::string report_id;
  std::string session_id;
  std::string participant_id;
  std::string persona_id;
  int session_number = 1;

  std::optional<std::string> summary;
  std::string mi_description;
  std::optional<GlobalScores> global_scores;
  BehaviorFrequency frequencies;
  AdherenceBreakdown adherence;
  std::array<CompetencyResult, 4> competencies{};
  std::vector<TrajectoryPoint> factor_trajectory;
  std::vector<TranscriptEntry> transcript;

  std::vector<DashboardModule> unavailable_modules;
  std::vector<std::string> errors;

  friend bool operator==(const DashboardReport&, const DashboardReport&) = default;
};

struct ReportInputs {
  const SessionRecord* session = nullptr;
  std::optional<GlobalScores> global_scores;
  std::optional<std::string> summary;
  ThresholdConfig thresholds;
  std::string mi_description;
  std::vector<std::string> errors;
};

std::string report_id_for(std::string_view session_id);

/// All eight modules. Throws IncompleteReport naming the first missing input.
DashboardReport build_report(const ReportInputs& inputs);
/// As build_report, but a missing summary or global scores marks that module
/// unavailable instead of failing. Still requires a session with at least
/// one exchange.
DashboardReport build_partial_report(const ReportInputs& inputs);

Json global_scores_json(const GlobalScores& g);
GlobalScores global_scores_from_json(const Json& j);
Json frequencies_json(const BehaviorFrequency& f);
Json adherence_json(const AdherenceBreakdown& a);
Json competency_json(const CompetencyResult& c);
Json metrics_json(const DashboardMetrics& m);
Json thresholds_json(const ThresholdConfig& t);
ThresholdConfig thresholds_from_json(const Json& j, ThresholdConfig base = {});

/// Transcript entry without wall-clock fields.
Json report_transcript_entry_json(const TranscriptEntry& e);

Json report_json(const DashboardReport& report);
/// Canonical bytes: two-space indent, trailing newline.
std::string serialize_report(const DashboardReport& report);
/// Plain-text rendering for terminals.
std::string report_text(const DashboardReport& report);

}  // namespace mitrainer
