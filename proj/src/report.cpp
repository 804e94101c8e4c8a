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

#include "mitrainer/report.hpp"

#include <iomanip>
#include <sstream>

#include "mitrainer/errors.hpp"

namespace mitrainer {

namespace {

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

DashboardReport assemble(const ReportInputs& in) {
  if (in.session == nullptr) throw IncompleteReport("session");
  const SessionRecord& s = *in.session;
  if (s.completed_exchanges() == 0) throw IncompleteReport("transcript");
  in.thresholds.validate();

  DashboardReport r;
  r.report_id = report_id_for(s.session_id);
  r.session_id = s.session_id;
  r.participant_id = s.participant_id;
  r.persona_id = s.persona_id;
  r.session_number = s.session_number;
  r.summary = in.summary;
  r.mi_description = in.mi_description;
  r.global_scores = in.global_scores;
  if (r.global_scores) r.global_scores->validate();

  const DashboardMetrics m =
      compute_metrics(s.transcript, r.global_scores ? &*r.global_scores : nullptr, in.thresholds);
  r.frequencies = m.frequencies;
  r.adherence = m.adherence;
  r.competencies = m.competencies;

  for (const auto& e : s.transcript) {
    if (e.speaker == Speaker::patient && e.cognitive_snapshot) {
      r.factor_trajectory.push_back({e.turn_index, *e.cognitive_snapshot, e.analysis_available});
    }
  }
  r.transcript = s.transcript;
  r.errors = in.errors;
  return r;
}

}  // namespace

std::string report_id_for(std::string_view session_id) {
  return "report-" + std::string(session_id);
}

DashboardReport build_report(const ReportInputs& inputs) {
  if (!inputs.global_scores) throw IncompleteReport("global_scores");
  if (!inputs.summary) throw IncompleteReport("summary");
  if (inputs.mi_description.empty()) throw IncompleteReport("mi_description");
  return assemble(inputs);
}

DashboardReport build_partial_report(const ReportInputs& inputs) {
  DashboardReport r = assemble(inputs);
  if (!r.summary) r.unavailable_modules.push_back(DashboardModule::session_summary);
  if (r.mi_description.empty()) r.unavailable_modules.push_back(DashboardModule::mi_description);
  if (!r.global_scores) r.unavailable_modules.push_back(DashboardModule::global_scores);
  return r;
}

Json global_scores_json(const GlobalScores& g) {
  Json j = Json::object();
  for (const auto d : enum_values<GlobalDimension>()) {
    j[std::string(enum_name(d))] = Json{{"score", g.get(d).score}, {"rationale", g.get(d).rationale}};
  }
  return j;
}

GlobalScores global_scores_from_json(const Json& j) {
  reject_unknown_fields(
      j, {"partnership", "empathy", "cultivating_change_talk", "softening_sustain_talk"},
      "global scores");
  GlobalScores g;
  for (const auto d : enum_values<GlobalDimension>()) {
    const Json& item = require_field(j, enum_name(d));
    g.get(d).score = static_cast<int>(require_integer(item, "score"));
    g.get(d).rationale = require_string(item, "rationale");
  }
  g.validate();
  return g;
}

Json frequencies_json(const BehaviorFrequency& f) {
  Json counts = Json::object();
  for (const auto code : enum_values<BehaviorCode>()) counts[std::string(enum_name(code))] = f.count(code);
  return Json{{"counts", std::move(counts)}, {"total", f.total}};
}

Json adherence_json(const AdherenceBreakdown& a) {
  Json j = Json::object();
  j["adherent_count"] = a.adherent_count;
  j["non_adherent_count"] = a.non_adherent_count;
  j["neutral_count"] = a.neutral_count;
  j["adherent_pct"] = optional_number(a.adherent_pct);
  j["non_adherent_pct"] = optional_number(a.non_adherent_pct);
  j["adherent_pct_of_total"] = optional_number(a.adherent_pct_of_total);
  j["non_adherent_pct_of_total"] = optional_number(a.non_adherent_pct_of_total);
  return j;
}

Json competency_json(const CompetencyResult& c) {
  Json j = Json::object();
  j["metric"] = enum_json(c.metric);
  j["value"] = optional_number(c.value);
  j["band"] = enum_json(c.band);
  j["fair"] = c.threshold.fair;
  j["good"] = c.threshold.good;
  return j;
}

Json metrics_json(const DashboardMetrics& m) {
  Json competencies = Json::array();
  for (const auto& c : m.competencies) competencies.push_back(competency_json(c));
  return Json{{"behavior_frequency", frequencies_json(m.frequencies)},
              {"adherence", adherence_json(m.adherence)},
              {"competencies", std::move(competencies)}};
}

Json thresholds_json(const ThresholdConfig& t) {
  Json j = Json::object();
  for (const auto m : enum_values<CompetencyMetric>()) {
    j[std::string(enum_name(m))] = Json{{"fair", t.get(m).fair}, {"good", t.get(m).good}};
  }
  return j;
}

ThresholdConfig thresholds_from_json(const Json& j, ThresholdConfig base) {
  reject_unknown_fields(
      j, {"relational", "technical", "pct_complex_reflections", "reflection_question_ratio"},
      "thresholds");
  for (const auto m : enum_values<CompetencyMetric>()) {
    const auto it = j.find(std::string(enum_name(m)));
    if (it == j.end()) continue;
    reject_unknown_fields(*it, {"fair", "good"}, "threshold");
    for (const char* key : {"fair", "good"}) {
      if (!it->contains(key)) continue;
      const Json& v = (*it)[key];
      if (!v.is_number()) throw InvalidConfiguration(std::string(enum_name(m)) + "." + key + " must be a number");
      (std::string_view(key) == "fair" ? base.get(m).fair : base.get(m).good) = v.get<double>();
    }
  }
  base.validate();
  return base;
}

Json report_transcript_entry_json(const TranscriptEntry& e) {
  Json j = Json::object();
  j["turn_index"] = e.turn_index;
  j["speaker"] = enum_json(e.speaker);
  j["text"] = e.text;
  if (e.speaker == Speaker::counselor) {
    j["codes"] = e.annotation ? Json(*e.annotation) : Json::array();
  } else {
    j["cognitive_state"] = e.cognitive_snapshot ? Json(*e.cognitive_snapshot) : Json(nullptr);
    Json cues = Json::array();
    for (const auto cue : e.cues) cues.push_back(enum_json(cue));
    j["cues"] = std::move(cues);
  }
  j["analysis_available"] = e.analysis_available;
  return j;
}

Json report_json(const DashboardReport& r) {
  Json j = Json::object();
  j["schema"] = kReportSchema;
  j["report_id"] = r.report_id;
  j["session_id"] = r.session_id;
  j["participant_id"] = r.participant_id;
  j["persona_id"] = r.persona_id;
  j["session_number"] = r.session_number;

  Json modules = Json::object();
  modules["session_summary"] = r.summary ? Json(*r.summary) : Json(nullptr);
  modules["mi_description"] = r.mi_description;
  modules["global_scores"] = r.global_scores ? global_scores_json(*r.global_scores) : Json(nullptr);
  modules["behavior_frequency"] = frequencies_json(r.frequencies);
  modules["adherence"] = adherence_json(r.adherence);
  Json competencies = Json::array();
  for (const auto& c : r.competencies) competencies.push_back(competency_json(c));
  modules["competencies"] = std::move(competencies);
  Json trajectory = Json::array();
  for (const auto& p : r.factor_trajectory) {
    Json point = Json::object();
    point["turn_index"] = p.turn_index;
    point["state"] = p.state;
    point["available"] = p.available;
    trajectory.push_back(std::move(point));
  }
  modules["cognitive_factors"] = std::move(trajectory);
  Json transcript = Json::array();
  for (const auto& e : r.transcript) transcript.push_back(report_transcript_entry_json(e));
  modules["transcript"] = std::move(transcript);
  j["modules"] = std::move(modules);

  Json unavailable = Json::array();
  for (const auto m : r.unavailable_modules) unavailable.push_back(enum_json(m));
  j["unavailable_modules"] = std::move(unavailable);
  j["errors"] = r.errors;
  return j;
}

std::string serialize_report(const DashboardReport& report) {
  return report_json(report).dump(2) + "\n";
}

std::string report_text(const DashboardReport& r) {
  std::ostringstream out;
  const auto fmt = [](const std::optional<double>& v) {
    if (!v) return std::string("n/a");
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << *v;
    return s.str();
  };
  out << "Report " << r.report_id << " (persona " << r.persona_id << ", session " << r.session_number << ")\n";
  out << "\nSummary\n  " << (r.summary ? *r.summary : std::string("unavailable")) << "\n";
  out << "\nGlobal scores\n";
  if (r.global_scores) {
    for (const auto d : enum_values<GlobalDimension>()) {
      out << "  " << std::left << std::setw(26) << enum_name(d) << r.global_scores->get(d).score << "\n";
    }
  } else {
    out << "  unavailable\n";
  }
  out << "\nBehavior counts (total " << r.frequencies.total << ")\n";
  for (const auto c : enum_values<BehaviorCode>()) {
    out << "  " << std::left << std::setw(28) << enum_name(c) << r.frequencies.count(c) << "\n";
  }
  out << "\nAdherence\n  adherent " << r.adherence.adherent_count << ", non-adherent " << r.adherence.non_adherent_count
      << ", neutral " << r.adherence.neutral_count << "\n";
  out << "\nCompetencies\n";
  for (const auto& c : r.competencies) {
    out << "  " << std::left << std::setw(28) << enum_name(c.metric) << std::setw(8) << fmt(c.value)
        << enum_name(c.band) << "\n";
  }
  out << "\nCognitive factors (control, self_efficacy, awareness, reward)\n";
  for (const auto& p : r.factor_trajectory) {
    out << "  turn " << p.turn_index << ": " << p.state.value(FactorKind::control) << " "
        << p.state.value(FactorKind::self_efficacy) << " " << p.state.value(FactorKind::awareness) << " "
        << p.state.value(FactorKind::reward) << (p.available ? "" : " (carried forward)") << "\n";
  }
  out << "\nTranscript\n";
  for (const auto& e : r.transcript) {
    out << "  [" << e.turn_index << "] " << enum_name(e.speaker) << ": " << e.text << "\n";
    if (e.annotation) {
      for (const auto& c : e.annotation->codes) out << "      " << enum_name(c.code) << ": " << c.justification << "\n";
    }
  }
  if (!r.errors.empty()) {
    out << "\nErrors\n";
    for (const auto& e : r.errors) out << "  " << e << "\n";
  }
  return out.str();
}

}  // namespace mitrainer
