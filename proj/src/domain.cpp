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

#include "mitrainer/domain.hpp"

#include <algorithm>
#include <cstdio>
#include <ctime>
#include <set>

#include "mitrainer/errors.hpp"
#include "mitrainer/rng.hpp"

namespace mitrainer {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::invalid_state: return "invalid_state";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::backend_unavailable: return "backend_unavailable";
    case ErrorCode::agent_failure: return "agent_failure";
    case ErrorCode::internal: return "internal";
  }
  return "internal";
}

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::not_found: return 404;
    case ErrorCode::conflict: return 409;
    case ErrorCode::invalid_state: return 409;
    case ErrorCode::invalid_argument: return 400;
    case ErrorCode::backend_unavailable: return 503;
    case ErrorCode::agent_failure: return 502;
    case ErrorCode::internal: return 500;
  }
  return 500;
}

void PersonaProfile::validate() const {
  if (persona_id.empty()) throw InvalidArgument("persona_id is empty");
  if (display_name.empty()) throw InvalidArgument("persona " + persona_id + ": display_name is empty");
  if (std::find(kPersonaAges.begin(), kPersonaAges.end(), age_years) == kPersonaAges.end()) {
    throw InvalidArgument("persona " + persona_id + ": age_years " + std::to_string(age_years) +
                          " is not one of 18, 28, 38, 48, 58, 68");
  }
  if (character_model < 1 || character_model > kCharacterModelCount) {
    throw InvalidArgument("persona " + persona_id + ": character_model must be 1..4");
  }
}

CognitiveState::CognitiveState() : CognitiveState(kFactorMin, kFactorMin, kFactorMin, kFactorMin) {}

CognitiveState::CognitiveState(int control, int self_efficacy, int awareness, int reward,
                               std::string_view rationale)
    : values_{clamp_factor(control), clamp_factor(self_efficacy), clamp_factor(awareness),
              clamp_factor(reward)} {
  rationales_.fill(std::string(rationale));
}

void CognitiveState::set(FactorKind kind, long long value, std::string rationale) {
  values_[index(kind)] = clamp_factor(value);
  if (!rationale.empty()) rationales_[index(kind)] = std::move(rationale);
}

CognitiveState initial_cognitive_state(std::uint64_t seed, FactorRange range) {
  if (range.lo < kFactorMin || range.hi > kFactorMax || range.lo > range.hi) {
    throw InvalidConfiguration("initial factor range [" + std::to_string(range.lo) + ", " +
                               std::to_string(range.hi) + "] must satisfy 1 <= lo <= hi <= 10");
  }
  SeededDraws draws(seed);
  CognitiveState state;
  for (const FactorKind kind : enum_values<FactorKind>()) {
    state.set(kind, draws.uniform_int(range.lo, range.hi), std::string(CognitiveState::kInitialRationale));
  }
  return state;
}

CognitiveState apply_factor_deltas(const CognitiveState& state, const FactorDeltas& deltas,
                                   std::string_view rationale) {
  CognitiveState next = state;
  for (const auto& [kind, delta] : deltas) {
    const int before = state.value(kind);
    const int after = clamp_factor(static_cast<long long>(before) + delta);
    if (after != before) next.set(kind, after, std::string(rationale));
  }
  return next;
}

void UtteranceAnnotation::validate() const {
  std::set<BehaviorCode> seen;
  for (const auto& coded : codes) {
    if (coded.justification.empty()) {
      throw InvalidArgument("empty justification for code " + std::string(enum_name(coded.code)));
    }
    if (!seen.insert(coded.code).second) {
      throw InvalidArgument("code " + std::string(enum_name(coded.code)) + " repeated in one utterance");
    }
  }
}

void BetweenSessionEvent::validate() const {
  if (narrative.empty()) throw InvalidArgument("between-session event narrative is empty");
  for (const auto& [kind, delta] : factor_deltas) {
    if (delta < -kMaxEventDelta || delta > kMaxEventDelta) {
      throw InvalidArgument("between-session delta for " + std::string(enum_name(kind)) +
                            " outside [-3, 3]: " + std::to_string(delta));
    }
  }
}

std::string format_rfc3339(Timestamp t) {
  const auto secs = std::chrono::floor<std::chrono::seconds>(t);
  const auto millis = (t - secs).count();
  const std::time_t tt = secs.time_since_epoch().count();
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[64];
  std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02d.%03dZ", tm.tm_year + 1900,
                tm.tm_mon + 1, tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec,
                static_cast<int>(millis));
  return buf;
}

std::optional<Timestamp> parse_rfc3339(std::string_view text) {
  std::tm tm{};
  int millis = 0;
  const std::string s(text);
  int consumed = 0;
  if (std::sscanf(s.c_str(), "%4d-%2d-%2dT%2d:%2d:%2d%n", &tm.tm_year, &tm.tm_mon, &tm.tm_mday,
                  &tm.tm_hour, &tm.tm_min, &tm.tm_sec, &consumed) != 6) {
    return std::nullopt;
  }
  std::string_view rest = text.substr(static_cast<std::size_t>(consumed));
  if (!rest.empty() && rest.front() == '.') {
    rest.remove_prefix(1);
    int digits = 0;
    while (!rest.empty() && rest.front() >= '0' && rest.front() <= '9') {
      if (digits < 3) millis = millis * 10 + (rest.front() - '0');
      ++digits;
      rest.remove_prefix(1);
    }
    if (digits == 0) return std::nullopt;
    for (int d = digits; d < 3; ++d) millis *= 10;
  }
  if (rest != "Z") return std::nullopt;
  tm.tm_year -= 1900;
  tm.tm_mon -= 1;
  const std::time_t tt = timegm(&tm);
  return Timestamp{std::chrono::seconds{tt} + std::chrono::milliseconds{millis}};
}

std::vector<TranscriptViolation> validate_transcript(std::span<const TranscriptEntry> entries) {
  std::vector<TranscriptViolation> out;
  auto report = [&out](std::size_t i, std::string message) {
    out.push_back({i, std::move(message)});
  };
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& e = entries[i];
    const Speaker expected = i % 2 == 0 ? Speaker::counselor : Speaker::patient;
    if (e.speaker != expected) {
      report(i, i == 0 ? "counselor first" : "speakers must alternate");
    }
    if (e.turn_index != static_cast<int>(i)) {
      report(i, "turn_index " + std::to_string(e.turn_index) + " expected " + std::to_string(i));
    }
    if (i > 0 && e.timestamp < entries[i - 1].timestamp) report(i, "timestamp decreases");
    if (e.text.empty()) report(i, "empty text");
    if (e.speaker == Speaker::counselor) {
      if (!e.annotation) report(i, "counselor entry without annotation");
      if (e.cognitive_snapshot) report(i, "counselor entry carries a cognitive snapshot");
      if (!e.cues.empty()) report(i, "counselor entry carries nonverbal cues");
    } else {
      if (!e.cognitive_snapshot) report(i, "patient entry without cognitive snapshot");
      if (e.annotation) report(i, "patient entry carries an annotation");
      if (e.cues.size() > kMaxCuesPerReply) report(i, "more than 3 nonverbal cues");
    }
  }
  return out;
}

const CognitiveState& SessionRecord::current_state() const noexcept {
  for (auto it = transcript.rbegin(); it != transcript.rend(); ++it) {
    if (it->speaker == Speaker::patient && it->cognitive_snapshot) return *it->cognitive_snapshot;
  }
  return initial_state;
}

std::size_t SessionRecord::completed_exchanges() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(transcript.begin(), transcript.end(),
                    [](const TranscriptEntry& e) { return e.speaker == Speaker::patient; }));
}

}  // namespace mitrainer
