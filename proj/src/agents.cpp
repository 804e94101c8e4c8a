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

#include "mitrainer/agents.hpp"

#include <cstdlib>
#include <set>

#include "mitrainer/report.hpp"

namespace mitrainer {

Json AgentRuntime::run(AgentKind kind, std::vector<ContextBlock> blocks,
                       const ReplyValidator& validate) const {
  if (backend == nullptr) throw InvalidState("agent runtime has no backend");
  AgentTask task;
  task.kind = kind;
  task.context_blocks = std::move(blocks);
  task.output_schema_id = schema_id_for(kind);
  task.temperature = temperature;
  task.max_attempts = max_attempts;
  return complete_structured(task, *backend, validate, sink);
}

// ---------------------------------------------------------------------------
// Context rendering
// ---------------------------------------------------------------------------

std::string render_transcript(std::span<const TranscriptEntry> entries) {
  if (entries.empty()) return "(no exchanges yet)";
  std::string out;
  for (const auto& e : entries) {
    out += "[turn " + std::to_string(e.turn_index) + "] ";
    out += e.speaker == Speaker::counselor ? "Counselor: " : "Patient: ";
    out += e.text;
    out += "\n";
  }
  out.pop_back();
  return out;
}

std::string render_persona(const PersonaProfile& persona) { return Json(persona).dump(2); }

std::string render_state(const CognitiveState& state) { return Json(state).dump(2); }

std::string render_event(const BetweenSessionEvent& event) { return Json(event).dump(2); }

std::string factor_anchor_text() {
  return "control (1-10): how able the patient feels to regulate thoughts, emotions and actions "
         "around cravings and drinking.\n"
         "  1: \"Once I start drinking I can't stop. It just takes over.\"\n"
         "  10: \"I decide when and whether I drink, and I stick to it.\"\n"
         "self_efficacy (1-10): how confident the patient is about resisting cravings, coping with "
         "triggers and reaching recovery goals.\n"
         "  1: \"There's no point trying. I'll end up drinking again anyway.\"\n"
         "  10: \"Whatever comes up, I know I can get through it without a drink.\"\n"
         "awareness (1-10): how much insight the patient has into drinking patterns, the feelings "
         "behind them and their consequences.\n"
         "  1: \"I don't see a problem. Everyone drinks like I do.\"\n"
         "  10: \"I can see exactly how stress pulls me toward a drink and what it costs me.\"\n"
         "reward (1-10): how strongly alcohol and its cues pull at the patient and trigger cravings "
         "or automatic drinking.\n"
         "  1: \"Drinking doesn't do much for me anymore. I barely think about it.\"\n"
         "  10: \"The moment I walk past a bar I can taste it, and I need that drink.\"";
}

std::string code_definition_text() {
  return "giving_information: gives information, educates, explains or offers feedback without "
         "persuading.\n"
         "persuading: tries to change the client's opinion or behavior with logic, arguments, advice "
         "or self-disclosure, without permission.\n"
         "persuading_with_permission: persuades, but only after asking for or receiving the client's "
         "permission.\n"
         "question: any question, open or closed.\n"
         "simple_reflection: repeats or rephrases what the client said, adding little or no meaning.\n"
         "complex_reflection: reflects the client's words while adding meaning, emphasis or an "
         "inferred feeling.\n"
         "affirmation: states something positive about the client's strengths, efforts or "
         "character.\n"
         "seeking_collaboration: explicitly invites the client's ideas, shares power or seeks "
         "agreement.\n"
         "emphasizing_autonomy: highlights the client's choice, control and freedom to decide.\n"
         "confront: disagrees, argues, criticizes, shames, labels or moralizes.";
}

std::string scoring_rubric_text() {
  return "partnership: 1 = the counselor acts as the expert and ignores the client's ideas; "
         "5 = the counselor fosters collaboration and power sharing so the client's ideas shape the "
         "session.\n"
         "empathy: 1 = little or no interest in the client's point of view; 5 = deep understanding "
         "of the client's perspective, beyond what was said.\n"
         "cultivating_change_talk: 1 = no attention to the client's language in favor of change; "
         "5 = consistent, strategic eliciting and strengthening of change talk.\n"
         "softening_sustain_talk: 1 = the counselor deepens or elaborates the client's arguments "
         "for the status quo; 5 = the counselor consistently avoids focusing on or strengthening "
         "sustain talk.";
}

std::string cue_vocabulary_text() {
  std::string out;
  for (const auto cue : enum_values<NonverbalCue>()) {
    if (!out.empty()) out += ", ";
    out += enum_name(cue);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Validators
// ---------------------------------------------------------------------------

void validate_patient_reply(const Json& reply, std::vector<std::string>&) {
  reject_unknown_fields(reply, {"reply", "cues"}, "patient reply");
  require_string(reply, "reply");
  const Json& cues = require_field(reply, "cues");
  if (!cues.is_array()) throw MalformedReply("cues must be an array");
  if (cues.size() > kMaxCuesPerReply) throw MalformedReply("more than 3 nonverbal cues");
  std::set<NonverbalCue> seen;
  for (const auto& c : cues) {
    if (!seen.insert(enum_from_json<NonverbalCue>(c, "nonverbal cue")).second) {
      throw MalformedReply("repeated nonverbal cue");
    }
  }
}

void validate_coding_reply(const Json& reply, std::vector<std::string>&) {
  reject_unknown_fields(reply, {"codes"}, "coding reply");
  require_field(reply, "codes").get<UtteranceAnnotation>();
}

void validate_cognitive_reply(const Json& reply, std::vector<std::string>&) {
  reply.get<CognitiveState>();
}

void validate_global_reply(const Json& reply, std::vector<std::string>&) {
  global_scores_from_json(reply);
}

void validate_summary_reply(const Json& reply, std::vector<std::string>&) {
  reject_unknown_fields(reply, {"summary"}, "summary reply");
  const std::string summary = require_string(reply, "summary");
  if (summary.find("\n\n") != std::string::npos) throw MalformedReply("summary must be one paragraph");
}

void validate_event_reply(const Json& reply, std::vector<std::string>&) {
  reject_unknown_fields(reply, {"narrative", "valence", "factor_deltas"}, "event reply");
  BetweenSessionEvent e;
  e.narrative = require_string(reply, "narrative");
  e.valence = enum_from_json<EventValence>(require_field(reply, "valence"), "valence");
  e.factor_deltas = factor_deltas_from_json(require_field(reply, "factor_deltas"));
  e.validate();
}

// ---------------------------------------------------------------------------
// Agents
// ---------------------------------------------------------------------------

namespace {

void require_text(std::string_view text, std::string_view what) {
  if (text.empty()) throw InvalidArgument(std::string(what) + " is empty");
}

bool has_counselor_entry(std::span<const TranscriptEntry> t) {
  for (const auto& e : t) {
    if (e.speaker == Speaker::counselor) return true;
  }
  return false;
}

}  // namespace

PatientReply patient_respond(const AgentRuntime& rt, const PatientTurnContext& ctx) {
  require_text(ctx.latest, "counselor utterance");
  if (ctx.persona == nullptr) throw InvalidArgument("patient turn without persona");

  std::vector<ContextBlock> blocks;
  blocks.push_back({std::string(block::persona), render_persona(*ctx.persona)});
  blocks.push_back({std::string(block::session_number), std::to_string(ctx.session_number)});
  if (ctx.prior_session) {
    blocks.push_back({std::string(block::prior_session_transcript), render_transcript(*ctx.prior_session)});
  }
  if (ctx.event) blocks.push_back({std::string(block::between_session_event), render_event(*ctx.event)});
  blocks.push_back({std::string(block::cognitive_state), render_state(ctx.state)});
  blocks.push_back({std::string(block::cue_vocabulary), cue_vocabulary_text()});
  blocks.push_back({std::string(block::current_transcript), render_transcript(ctx.history)});
  blocks.push_back({std::string(block::latest_utterance), ctx.latest});

  const Json doc = rt.run(AgentKind::patient_response, std::move(blocks), validate_patient_reply);
  PatientReply out;
  out.reply = doc.at("reply").get<std::string>();
  for (const auto& c : doc.at("cues")) out.cues.push_back(*parse_enum<NonverbalCue>(c.get<std::string>()));
  return out;
}

UtteranceAnnotation code_utterance(const AgentRuntime& rt, std::string_view latest,
                                   std::span<const TranscriptEntry> history) {
  require_text(latest, "counselor utterance");
  std::vector<ContextBlock> blocks{
      {std::string(block::code_definitions), code_definition_text()},
      {std::string(block::current_transcript), render_transcript(history)},
      {std::string(block::latest_utterance), std::string(latest)},
  };
  const Json doc = rt.run(AgentKind::behavior_coding, std::move(blocks), validate_coding_reply);
  return doc.at("codes").get<UtteranceAnnotation>();
}

CognitiveState update_cognitive_model(const AgentRuntime& rt, const CognitiveState& prev,
                                      std::string_view latest, std::string_view patient_reply,
                                      std::span<const TranscriptEntry> history) {
  require_text(latest, "counselor utterance");
  require_text(patient_reply, "patient reply");
  std::vector<ContextBlock> blocks{
      {std::string(block::factor_anchors), factor_anchor_text()},
      {std::string(block::cognitive_state), render_state(prev)},
      {std::string(block::current_transcript), render_transcript(history)},
      {std::string(block::latest_utterance), std::string(latest)},
      {std::string(block::patient_reply), std::string(patient_reply)},
  };
  const auto validate = [&prev](const Json& reply, std::vector<std::string>& warnings) {
    const auto next = reply.get<CognitiveState>();
    for (const auto kind : enum_values<FactorKind>()) {
      const int delta = next.value(kind) - prev.value(kind);
      if (std::abs(delta) > kMaxEventDelta) {
        warnings.push_back(std::string(enum_name(kind)) + " moved by " + std::to_string(delta) +
                           " in one turn");
      }
    }
  };
  const Json doc = rt.run(AgentKind::cognitive_model, std::move(blocks), validate);
  const auto proposed = doc.get<CognitiveState>();
  CognitiveState next = prev;
  for (const auto kind : enum_values<FactorKind>()) {
    if (proposed.value(kind) != prev.value(kind)) {
      next.set(kind, proposed.value(kind), proposed.rationale(kind));
    }
  }
  return next;
}

GlobalScores score_globals(const AgentRuntime& rt, std::span<const TranscriptEntry> transcript) {
  if (!has_counselor_entry(transcript)) throw InvalidArgument("cannot score an empty transcript");
  std::vector<ContextBlock> blocks{
      {std::string(block::scoring_rubric), scoring_rubric_text()},
      {std::string(block::current_transcript), render_transcript(transcript)},
  };
  return global_scores_from_json(rt.run(AgentKind::global_scoring, std::move(blocks), validate_global_reply));
}

std::string summarize_session(const AgentRuntime& rt, std::span<const TranscriptEntry> transcript,
                              const std::optional<GlobalScores>& scores,
                              const DashboardMetrics& metrics) {
  if (!scores) throw InvalidArgument("session summary requires global scores");
  if (!has_counselor_entry(transcript)) throw InvalidArgument("cannot summarize an empty transcript");
  std::vector<ContextBlock> blocks{
      {std::string(block::current_transcript), render_transcript(transcript)},
      {std::string(block::global_scores), global_scores_json(*scores).dump(2)},
      {std::string(block::session_metrics), metrics_json(metrics).dump(2)},
  };
  const Json doc = rt.run(AgentKind::session_summary, std::move(blocks), validate_summary_reply);
  return doc.at("summary").get<std::string>();
}

BetweenSessionEvent generate_between_event(const AgentRuntime& rt, const PersonaProfile& persona,
                                           const CognitiveState& final_state,
                                           std::span<const TranscriptEntry> transcript,
                                           std::string_view source_session, bool session_ended) {
  if (!session_ended) throw InvalidState("between-session event requested before the session ended");
  std::vector<ContextBlock> blocks{
      {std::string(block::persona), render_persona(persona)},
      {std::string(block::cognitive_state), render_state(final_state)},
      {std::string(block::current_transcript), render_transcript(transcript)},
  };
  const Json doc = rt.run(AgentKind::between_session_event, std::move(blocks), validate_event_reply);
  BetweenSessionEvent e;
  e.source_session = std::string(source_session);
  e.narrative = doc.at("narrative").get<std::string>();
  e.valence = *parse_enum<EventValence>(doc.at("valence").get<std::string>());
  e.factor_deltas = factor_deltas_from_json(doc.at("factor_deltas"));
  return e;
}

}  // namespace mitrainer
