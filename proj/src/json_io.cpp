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

#include "mitrainer/json_io.hpp"

#include <algorithm>

namespace mitrainer {

const Json& require_field(const Json& object, std::string_view key) {
  if (!object.is_object()) throw InvalidArgument("expected an object holding '" + std::string(key) + "'");
  const auto it = object.find(std::string(key));
  if (it == object.end()) throw InvalidArgument("missing field '" + std::string(key) + "'");
  return *it;
}

std::string require_string(const Json& object, std::string_view key, bool allow_empty) {
  const Json& v = require_field(object, key);
  if (!v.is_string()) throw InvalidArgument("field '" + std::string(key) + "' must be a string");
  std::string s = v.get<std::string>();
  if (!allow_empty && s.empty()) throw InvalidArgument("field '" + std::string(key) + "' is empty");
  return s;
}

long long require_integer(const Json& object, std::string_view key) {
  const Json& v = require_field(object, key);
  if (!v.is_number_integer()) {
    throw InvalidArgument("field '" + std::string(key) + "' must be an integer");
  }
  return v.get<long long>();
}

void reject_unknown_fields(const Json& object, std::initializer_list<std::string_view> allowed,
                           std::string_view what) {
  if (!object.is_object()) throw InvalidArgument(std::string(what) + " must be an object");
  for (const auto& [key, value] : object.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw InvalidArgument("unknown field '" + key + "' in " + std::string(what));
    }
  }
}

Json factor_deltas_json(const FactorDeltas& deltas) {
  Json j = Json::object();
  for (const FactorKind kind : enum_values<FactorKind>()) {
    if (const auto it = deltas.find(kind); it != deltas.end()) j[std::string(enum_name(kind))] = it->second;
  }
  return j;
}

FactorDeltas factor_deltas_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("factor_deltas must be an object");
  FactorDeltas out;
  for (const auto& [key, value] : j.items()) {
    const auto kind = parse_enum<FactorKind>(key);
    if (!kind) throw InvalidArgument("unknown cognitive factor '" + key + "'");
    if (!value.is_number_integer()) throw InvalidArgument("delta for " + key + " must be an integer");
    out[*kind] = value.get<int>();
  }
  return out;
}

void to_json(Json& j, const PersonaProfile& p) {
  j = Json::object();
  j["persona_id"] = p.persona_id;
  j["display_name"] = p.display_name;
  j["gender"] = enum_json(p.gender);
  j["age_years"] = p.age_years;
  j["ethnicity"] = enum_json(p.ethnicity);
  j["occupation"] = enum_json(p.occupation);
  j["mbti"] = enum_json(p.mbti);
  j["character_model"] = p.character_model;
  j["backstory"] = p.backstory;
  j["voice_key"] = p.voice_key;
}

void from_json(const Json& j, PersonaProfile& p) {
  reject_unknown_fields(j,
                        {"persona_id", "display_name", "gender", "age_years", "ethnicity",
                         "occupation", "mbti", "character_model", "backstory", "voice_key"},
                        "persona");
  p.persona_id = require_string(j, "persona_id");
  p.display_name = require_string(j, "display_name");
  p.gender = enum_from_json<Gender>(require_field(j, "gender"), "gender");
  p.age_years = static_cast<int>(require_integer(j, "age_years"));
  p.ethnicity = enum_from_json<Ethnicity>(require_field(j, "ethnicity"), "ethnicity");
  p.occupation = enum_from_json<Occupation>(require_field(j, "occupation"), "occupation");
  p.mbti = enum_from_json<Mbti>(require_field(j, "mbti"), "mbti");
  p.character_model = static_cast<int>(require_integer(j, "character_model"));
  p.backstory = require_string(j, "backstory", true);
  p.voice_key = require_string(j, "voice_key", true);
  p.validate();
}

void to_json(Json& j, const CognitiveState& s) {
  j = Json::object();
  for (const FactorKind kind : enum_values<FactorKind>()) {
    j[std::string(enum_name(kind))] = Json{{"value", s.value(kind)}, {"rationale", s.rationale(kind)}};
  }
}

void from_json(const Json& j, CognitiveState& s) {
  reject_unknown_fields(j, {"control", "self_efficacy", "awareness", "reward"}, "cognitive state");
  for (const FactorKind kind : enum_values<FactorKind>()) {
    const Json& f = require_field(j, enum_name(kind));
    const long long value = require_integer(f, "value");
    if (value < kFactorMin || value > kFactorMax) {
      throw InvalidArgument(std::string(enum_name(kind)) + " value " + std::to_string(value) +
                            " outside [1, 10]");
    }
    s.set(kind, value, require_string(f, "rationale"));
  }
}

void to_json(Json& j, const CodedBehavior& c) {
  j = Json{{"code", enum_json(c.code)}, {"justification", c.justification}};
}

void from_json(const Json& j, CodedBehavior& c) {
  c.code = enum_from_json<BehaviorCode>(require_field(j, "code"), "behavior code");
  c.justification = require_string(j, "justification");
}

void to_json(Json& j, const UtteranceAnnotation& a) {
  j = Json::array();
  for (const auto& c : a.codes) j.push_back(c);
}

void from_json(const Json& j, UtteranceAnnotation& a) {
  if (!j.is_array()) throw InvalidArgument("annotation must be an array");
  a.codes.clear();
  for (const auto& item : j) a.codes.push_back(item.get<CodedBehavior>());
  a.validate();
}

void to_json(Json& j, const TranscriptEntry& e) {
  j = Json::object();
  j["turn_index"] = e.turn_index;
  j["speaker"] = enum_json(e.speaker);
  j["text"] = e.text;
  j["timestamp"] = format_rfc3339(e.timestamp);
  if (e.speaker == Speaker::counselor) {
    j["codes"] = e.annotation ? Json(*e.annotation) : Json::array();
  } else {
    if (e.cognitive_snapshot) j["cognitive_state"] = *e.cognitive_snapshot;
    Json cues = Json::array();
    for (const auto cue : e.cues) cues.push_back(enum_json(cue));
    j["cues"] = std::move(cues);
  }
  j["analysis_available"] = e.analysis_available;
}

void from_json(const Json& j, TranscriptEntry& e) {
  e.turn_index = static_cast<int>(require_integer(j, "turn_index"));
  e.speaker = enum_from_json<Speaker>(require_field(j, "speaker"), "speaker");
  e.text = require_string(j, "text");
  const auto ts = parse_rfc3339(require_string(j, "timestamp"));
  if (!ts) throw InvalidArgument("bad timestamp");
  e.timestamp = *ts;
  e.annotation.reset();
  e.cognitive_snapshot.reset();
  e.cues.clear();
  if (e.speaker == Speaker::counselor) {
    e.annotation = require_field(j, "codes").get<UtteranceAnnotation>();
  } else {
    e.cognitive_snapshot = require_field(j, "cognitive_state").get<CognitiveState>();
    for (const auto& cue : require_field(j, "cues")) {
      e.cues.push_back(enum_from_json<NonverbalCue>(cue, "nonverbal cue"));
    }
  }
  e.analysis_available = j.value("analysis_available", true);
}

void to_json(Json& j, const BetweenSessionEvent& e) {
  j = Json::object();
  j["source_session"] = e.source_session;
  j["narrative"] = e.narrative;
  j["valence"] = enum_json(e.valence);
  j["factor_deltas"] = factor_deltas_json(e.factor_deltas);
}

void from_json(const Json& j, BetweenSessionEvent& e) {
  e.source_session = require_string(j, "source_session", true);
  e.narrative = require_string(j, "narrative");
  e.valence = enum_from_json<EventValence>(require_field(j, "valence"), "valence");
  e.factor_deltas = factor_deltas_from_json(require_field(j, "factor_deltas"));
  e.validate();
}

void to_json(Json& j, const FailedTurn& f) {
  j = Json{{"text", f.text}, {"timestamp", format_rfc3339(f.timestamp)}, {"error", f.error}};
}

void from_json(const Json& j, FailedTurn& f) {
  f.text = require_string(j, "text");
  const auto ts = parse_rfc3339(require_string(j, "timestamp"));
  if (!ts) throw InvalidArgument("bad timestamp");
  f.timestamp = *ts;
  f.error = require_string(j, "error", true);
}

void to_json(Json& j, const SessionRecord& r) {
  j = Json::object();
  j["session_id"] = r.session_id;
  j["participant_id"] = r.participant_id;
  j["persona_id"] = r.persona_id;
  j["session_number"] = r.session_number;
  j["max_sessions"] = r.max_sessions;
  j["status"] = enum_json(r.status);
  j["seed"] = r.seed;
  j["initial_state"] = r.initial_state;
  j["inbound_event"] = r.inbound_event ? Json(*r.inbound_event) : Json(nullptr);
  Json transcript = Json::array();
  for (const auto& e : r.transcript) transcript.push_back(e);
  j["transcript"] = std::move(transcript);
  Json failed = Json::array();
  for (const auto& f : r.failed_turns) failed.push_back(f);
  j["failed_turns"] = std::move(failed);
  j["outbound_event"] = r.outbound_event ? Json(*r.outbound_event) : Json(nullptr);
}

void from_json(const Json& j, SessionRecord& r) {
  r.session_id = require_string(j, "session_id");
  r.participant_id = require_string(j, "participant_id");
  r.persona_id = require_string(j, "persona_id");
  r.session_number = static_cast<int>(require_integer(j, "session_number"));
  r.max_sessions = static_cast<int>(require_integer(j, "max_sessions"));
  r.status = enum_from_json<SessionStatus>(require_field(j, "status"), "status");
  r.seed = require_field(j, "seed").get<std::uint64_t>();
  r.initial_state = require_field(j, "initial_state").get<CognitiveState>();
  const Json& inbound = require_field(j, "inbound_event");
  r.inbound_event = inbound.is_null() ? std::nullopt
                                      : std::optional<BetweenSessionEvent>(inbound.get<BetweenSessionEvent>());
  r.transcript = require_field(j, "transcript").get<std::vector<TranscriptEntry>>();
  r.failed_turns = require_field(j, "failed_turns").get<std::vector<FailedTurn>>();
  const Json& outbound = require_field(j, "outbound_event");
  r.outbound_event = outbound.is_null()
                         ? std::nullopt
                         : std::optional<BetweenSessionEvent>(outbound.get<BetweenSessionEvent>());
}

}  // namespace mitrainer
