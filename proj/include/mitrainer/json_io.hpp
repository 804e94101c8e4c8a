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

#include <string>
#include <string_view>

#include "json.hpp"

#include "mitrainer/domain.hpp"
#include "mitrainer/errors.hpp"

namespace mitrainer {

/// Insertion-ordered JSON: serialized field order equals construction order,
/// which keeps persisted documents byte-stable.
using Json = nlohmann::ordered_json;

template <typename E>
Json enum_json(E value) {
  return std::string(enum_name(value));
}

/// Throws InvalidArgument when `j` is not a string naming an enumerator.
template <typename E>
E enum_from_json(const Json& j, std::string_view what) {
  if (!j.is_string()) throw InvalidArgument(std::string(what) + " must be a string");
  const auto parsed = parse_enum<E>(j.get_ref<const std::string&>());
  if (!parsed) {
    throw InvalidArgument("unknown " + std::string(what) + " '" + j.get<std::string>() + "'");
  }
  return *parsed;
}

/// Field accessors that turn nlohmann type errors into InvalidArgument.
const Json& require_field(const Json& object, std::string_view key);
std::string require_string(const Json& object, std::string_view key, bool allow_empty = false);
long long require_integer(const Json& object, std::string_view key);
/// Rejects keys outside `allowed`.
void reject_unknown_fields(const Json& object, std::initializer_list<std::string_view> allowed,
                           std::string_view what);

Json factor_deltas_json(const FactorDeltas& deltas);
FactorDeltas factor_deltas_from_json(const Json& j);

void to_json(Json& j, const PersonaProfile& p);
void from_json(const Json& j, PersonaProfile& p);

void to_json(Json& j, const CognitiveState& s);
void from_json(const Json& j, CognitiveState& s);

void to_json(Json& j, const CodedBehavior& c);
void from_json(const Json& j, CodedBehavior& c);

void to_json(Json& j, const UtteranceAnnotation& a);
void from_json(const Json& j, UtteranceAnnotation& a);

void to_json(Json& j, const TranscriptEntry& e);
void from_json(const Json& j, TranscriptEntry& e);

void to_json(Json& j, const BetweenSessionEvent& e);
void from_json(const Json& j, BetweenSessionEvent& e);

void to_json(Json& j, const FailedTurn& f);
void from_json(const Json& j, FailedTurn& f);

/// Full record including hidden state. Not for trainee-facing responses.
void to_json(Json& j, const SessionRecord& r);
void from_json(const Json& j, SessionRecord& r);

}  // namespace mitrainer
