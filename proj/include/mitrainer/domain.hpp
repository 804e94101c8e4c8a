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
#include <chrono>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mitrainer/enum_names.hpp"

namespace mitrainer {

// ---------------------------------------------------------------------------
// Persona identity
// ---------------------------------------------------------------------------

enum class Gender { male, female, nonbinary_third_gender };
enum class Ethnicity {
  white,
  asian,
  black_african_american,
  hispanic_latinx_spanish,
  middle_eastern_north_african,
};
enum class Occupation { student, cashier, nurse, cook_chef, retail_salesperson };
enum class Mbti {
  ISTJ, ISFJ, INFJ, INTJ, ISTP, ISFP, INFP, INTP,
  ESTP, ESFP, ENFP, ENTP, ESTJ, ESFJ, ENFJ, ENTJ,
};

template <>
struct EnumNames<Gender> {
  static constexpr std::array<std::string_view, 3> names{"male", "female",
                                                         "nonbinary_third_gender"};
};
template <>
struct EnumNames<Ethnicity> {
  static constexpr std::array<std::string_view, 5> names{
      "white", "asian", "black_african_american", "hispanic_latinx_spanish",
      "middle_eastern_north_african"};
};
template <>
struct EnumNames<Occupation> {
  static constexpr std::array<std::string_view, 5> names{"student", "cashier", "nurse",
                                                         "cook_chef", "retail_salesperson"};
};
template <>
struct EnumNames<Mbti> {
  static constexpr std::array<std::string_view, 16> names{
      "ISTJ", "ISFJ", "INFJ", "INTJ", "ISTP", "ISFP", "INFP", "INTP",
      "ESTP", "ESFP", "ENFP", "ENTP", "ESTJ", "ESFJ", "ENFJ", "ENTJ"};
};

inline constexpr std::array<int, 6> kPersonaAges{18, 28, 38, 48, 58, 68};
inline constexpr int kCharacterModelCount = 4;
inline constexpr std::size_t kDefaultPersonaCount = 11;

struct PersonaProfile {
  std::string persona_id;
  std::string display_name;
  Gender gender = Gender::female;
  int age_years = 28;
  Ethnicity ethnicity = Ethnicity::white;
  Occupation occupation = Occupation::student;
  Mbti mbti = Mbti::INFP;
  int character_model = 1;
  std::string backstory;
  std::string voice_key;

  /// Throws InvalidArgument naming the first offending field.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Cognitive model
// ---------------------------------------------------------------------------

enum class FactorKind { control, self_efficacy, awareness, reward };

template <>
struct EnumNames<FactorKind> {
  static constexpr std::array<std::string_view, 4> names{"control", "self_efficacy",
                                                         "awareness", "reward"};
};

inline constexpr int kFactorMin = 1;
inline constexpr int kFactorMax = 10;

constexpr int clamp_factor(long long value) noexcept {
  return value < kFactorMin ? kFactorMin : (value > kFactorMax ? kFactorMax : static_cast<int>(value));
}

struct CognitiveFactor {
  FactorKind kind = FactorKind::control;
  int value = kFactorMin;
};

/// Four factors, each in [1, 10], each with the reason for its current value.
class CognitiveState {
 public:
  static constexpr std::string_view kInitialRationale = "initialized";

  CognitiveState();
  CognitiveState(int control, int self_efficacy, int awareness, int reward,
                 std::string_view rationale = kInitialRationale);

  int value(FactorKind kind) const noexcept { return values_[index(kind)]; }
  const std::string& rationale(FactorKind kind) const noexcept { return rationales_[index(kind)]; }
  CognitiveFactor factor(FactorKind kind) const noexcept { return {kind, value(kind)}; }

  /// Clamps `value` into range. An empty rationale keeps the previous one.
  void set(FactorKind kind, long long value, std::string rationale);

  friend bool operator==(const CognitiveState&, const CognitiveState&) = default;

 private:
  static constexpr std::size_t index(FactorKind kind) noexcept {
    return static_cast<std::size_t>(kind);
  }

  std::array<int, 4> values_{};
  std::array<std::string, 4> rationales_{};
};

using FactorDeltas = std::map<FactorKind, int>;

struct FactorRange {
  int lo = 1;
  int hi = 10;
};

/// Each factor drawn independently and uniformly from [lo, hi], in factor
/// order, from a generator seeded with `seed`. Throws InvalidConfiguration
/// unless 1 <= lo <= hi <= 10.
CognitiveState initial_cognitive_state(std::uint64_t seed, FactorRange range);

/// clamp(old + delta) per factor. Only factors whose value actually changes
/// receive `rationale`.
CognitiveState apply_factor_deltas(const CognitiveState& state, const FactorDeltas& deltas,
                                   std::string_view rationale = "adjusted");

// ---------------------------------------------------------------------------
// Behavior coding
// ---------------------------------------------------------------------------

enum class BehaviorCode {
  giving_information,
  persuading,
  persuading_with_permission,
  question,
  simple_reflection,
  complex_reflection,
  affirmation,
  seeking_collaboration,
  emphasizing_autonomy,
  confront,
};

template <>
struct EnumNames<BehaviorCode> {
  static constexpr std::array<std::string_view, 10> names{
      "giving_information", "persuading",         "persuading_with_permission",
      "question",           "simple_reflection",  "complex_reflection",
      "affirmation",        "seeking_collaboration", "emphasizing_autonomy",
      "confront"};
};

enum class AdherenceClass { adherent, non_adherent, neutral };

constexpr AdherenceClass adherence_class(BehaviorCode code) noexcept {
  switch (code) {
    case BehaviorCode::affirmation:
    case BehaviorCode::seeking_collaboration:
    case BehaviorCode::emphasizing_autonomy:
      return AdherenceClass::adherent;
    case BehaviorCode::persuading:
    case BehaviorCode::confront:
      return AdherenceClass::non_adherent;
    default:
      return AdherenceClass::neutral;
  }
}

struct CodedBehavior {
  BehaviorCode code = BehaviorCode::question;
  std::string justification;

  friend bool operator==(const CodedBehavior&, const CodedBehavior&) = default;
};

struct UtteranceAnnotation {
  std::vector<CodedBehavior> codes;

  /// Throws InvalidArgument on an empty justification or a repeated code.
  void validate() const;

  friend bool operator==(const UtteranceAnnotation&, const UtteranceAnnotation&) = default;
};

enum class NonverbalCue {
  eye_contact,
  gaze_aversion,
  nod,
  head_shake,
  lean_forward,
  slumped_posture,
  crossed_arms,
  fidget,
  open_hands,
  sigh,
};

template <>
struct EnumNames<NonverbalCue> {
  static constexpr std::array<std::string_view, 10> names{
      "eye_contact",     "gaze_aversion", "nod",    "head_shake", "lean_forward",
      "slumped_posture", "crossed_arms",  "fidget", "open_hands", "sigh"};
};

inline constexpr std::size_t kMaxCuesPerReply = 3;

// ---------------------------------------------------------------------------
// Transcript and sessions
// ---------------------------------------------------------------------------

using Timestamp = std::chrono::sys_time<std::chrono::milliseconds>;

/// RFC 3339, UTC, millisecond precision: 2026-10-14T09:30:00.250Z
std::string format_rfc3339(Timestamp t);
/// Accepts the format produced by format_rfc3339 (fraction optional).
std::optional<Timestamp> parse_rfc3339(std::string_view text);

enum class Speaker { counselor, patient };

template <>
struct EnumNames<Speaker> {
  static constexpr std::array<std::string_view, 2> names{"counselor", "patient"};
};

struct TranscriptEntry {
  int turn_index = 0;
  Speaker speaker = Speaker::counselor;
  std::string text;
  Timestamp timestamp{};
  std::optional<UtteranceAnnotation> annotation;       // counselor only
  std::optional<CognitiveState> cognitive_snapshot;    // patient only
  std::vector<NonverbalCue> cues;                      // patient only
  // False when the coding / cognitive agent failed; the annotation is then
  // empty, or the snapshot carries the previous state forward.
  bool analysis_available = true;

  friend bool operator==(const TranscriptEntry&, const TranscriptEntry&) = default;
};

struct TranscriptViolation {
  std::size_t position = 0;
  std::string message;
};

/// Every broken invariant (alternation, counselor first, indexing, timestamp
/// order, speaker/field pairing). Empty means valid.
std::vector<TranscriptViolation> validate_transcript(std::span<const TranscriptEntry> entries);

enum class EventValence { setback, progress, mixed };

template <>
struct EnumNames<EventValence> {
  static constexpr std::array<std::string_view, 3> names{"setback", "progress", "mixed"};
};

inline constexpr int kMaxEventDelta = 3;

struct BetweenSessionEvent {
  std::string source_session;
  std::string narrative;
  EventValence valence = EventValence::mixed;
  FactorDeltas factor_deltas;

  void validate() const;

  friend bool operator==(const BetweenSessionEvent&, const BetweenSessionEvent&) = default;
};

enum class SessionStatus { created, in_progress, awaiting_turn, ended, reported };

template <>
struct EnumNames<SessionStatus> {
  static constexpr std::array<std::string_view, 5> names{"created", "in_progress",
                                                         "awaiting_turn", "ended", "reported"};
};

/// created -> in_progress <-> awaiting_turn, in_progress -> ended -> reported.
constexpr bool is_legal_transition(SessionStatus from, SessionStatus to) noexcept {
  using S = SessionStatus;
  switch (from) {
    case S::created: return to == S::in_progress;
    case S::in_progress: return to == S::awaiting_turn || to == S::ended;
    case S::awaiting_turn: return to == S::in_progress;
    case S::ended: return to == S::reported;
    case S::reported: return false;
  }
  return false;
}

struct FailedTurn {
  std::string text;
  Timestamp timestamp{};
  std::string error;

  friend bool operator==(const FailedTurn&, const FailedTurn&) = default;
};

struct SessionRecord {
  std::string session_id;
  std::string participant_id;
  std::string persona_id;
  int session_number = 1;
  int max_sessions = 3;
  SessionStatus status = SessionStatus::created;
  std::uint64_t seed = 0;
  CognitiveState initial_state;
  std::optional<BetweenSessionEvent> inbound_event;
  std::vector<TranscriptEntry> transcript;
  std::vector<FailedTurn> failed_turns;
  // Generated at session end when further sessions remain.
  std::optional<BetweenSessionEvent> outbound_event;

  /// Snapshot of the last patient entry, or initial_state if there is none.
  const CognitiveState& current_state() const noexcept;
  std::size_t completed_exchanges() const noexcept;

  friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

}  // namespace mitrainer
