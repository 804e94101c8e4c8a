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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mitrainer/agent_runtime.hpp"
#include "mitrainer/domain.hpp"
#include "mitrainer/metrics.hpp"

namespace mitrainer {

/// Backend plus the per-call settings shared by the six agents.
struct AgentRuntime {
  CompletionBackend* backend = nullptr;
  ExchangeSink sink;
  double temperature = 1.0;
  int max_attempts = 3;

  Json run(AgentKind kind, std::vector<ContextBlock> blocks, const ReplyValidator& validate) const;
};

// Context block renderers. The mock backend reads these back, so their
// formats are part of the agent contract.
std::string render_transcript(std::span<const TranscriptEntry> entries);
std::string render_persona(const PersonaProfile& persona);
std::string render_state(const CognitiveState& state);
std::string render_event(const BetweenSessionEvent& event);
std::string factor_anchor_text();
std::string code_definition_text();
std::string scoring_rubric_text();
std::string cue_vocabulary_text();

struct PatientTurnContext {
  const PersonaProfile* persona = nullptr;
  CognitiveState state;
  std::span<const TranscriptEntry> history;
  std::optional<std::span<const TranscriptEntry>> prior_session;
  std::optional<BetweenSessionEvent> event;
  int session_number = 1;
  std::string latest;
};

struct PatientReply {
  std::string reply;
  std::vector<NonverbalCue> cues;
};

/// Throws InvalidArgument on an empty utterance or missing persona;
/// AgentFailure / BackendUnavailable from the runtime.
PatientReply patient_respond(const AgentRuntime& rt, const PatientTurnContext& ctx);

UtteranceAnnotation code_utterance(const AgentRuntime& rt, std::string_view latest,
                                   std::span<const TranscriptEntry> history);

/// Factors whose value is unchanged keep their previous rationale. Changes
/// larger than 3 in one turn are kept but reported as exchange warnings.
CognitiveState update_cognitive_model(const AgentRuntime& rt, const CognitiveState& prev,
                                      std::string_view latest, std::string_view patient_reply,
                                      std::span<const TranscriptEntry> history = {});

GlobalScores score_globals(const AgentRuntime& rt, std::span<const TranscriptEntry> transcript);

std::string summarize_session(const AgentRuntime& rt, std::span<const TranscriptEntry> transcript,
                              const std::optional<GlobalScores>& scores,
                              const DashboardMetrics& metrics);

BetweenSessionEvent generate_between_event(const AgentRuntime& rt, const PersonaProfile& persona,
                                           const CognitiveState& final_state,
                                           std::span<const TranscriptEntry> transcript,
                                           std::string_view source_session, bool session_ended);

// Reply validators, exposed for tests.
void validate_patient_reply(const Json& reply, std::vector<std::string>& warnings);
void validate_coding_reply(const Json& reply, std::vector<std::string>& warnings);
void validate_cognitive_reply(const Json& reply, std::vector<std::string>& warnings);
void validate_global_reply(const Json& reply, std::vector<std::string>& warnings);
void validate_summary_reply(const Json& reply, std::vector<std::string>& warnings);
void validate_event_reply(const Json& reply, std::vector<std::string>& warnings);

}  // namespace mitrainer
