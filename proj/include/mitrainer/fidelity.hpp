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
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mitrainer/domain.hpp"
#include "mitrainer/json_io.hpp"
#include "mitrainer/persona_catalog.hpp"

namespace mitrainer {

enum class PersonaAttribute { gender, age, ethnicity, occupation, personality };

template <>
struct EnumNames<PersonaAttribute> {
  static constexpr std::array<std::string_view, 5> names{"gender", "age", "ethnicity", "occupation",
                                                         "personality"};
};

/// Size of the option set a guesser chooses from.
std::size_t option_count(PersonaAttribute attribute) noexcept;

struct FidelityTrial {
  PersonaAttribute attribute = PersonaAttribute::gender;
  int n_trials = 0;
  int n_correct = 0;
  double chance_p = 0;  // 1 / option_count

  double accuracy() const noexcept;
  /// One-sided exact binomial P(X >= n_correct). Throws InvalidArgument
  /// when there are no trials.
  double p_value() const;
};

struct AttributeGuesses {
  Gender gender = Gender::female;
  int age_years = 38;
  Ethnicity ethnicity = Ethnicity::white;
  Occupation occupation = Occupation::student;
  Mbti mbti = Mbti::ISFJ;
};

/// Maps a finished session to guesses. Only the oracle guessers look past
/// the transcript.
using Guesser = std::function<AttributeGuesses(const SessionRecord&, const PersonaCatalog&)>;

/// Reads the patient's lines for the mock's self-disclosure phrases.
/// Attributes it cannot recover fall back to fixed defaults (age 38,
/// white, ISFJ).
AttributeGuesses keyword_guess(const SessionRecord& session, const PersonaCatalog& catalog);
/// Looks the persona up: every guess correct.
AttributeGuesses perfect_guess(const SessionRecord& session, const PersonaCatalog& catalog);
/// A guess different from the truth on every attribute.
AttributeGuesses wrong_guess(const SessionRecord& session, const PersonaCatalog& catalog);

struct FidelityProbeConfig {
  /// Empty: the whole catalog.
  std::vector<std::string> persona_ids;
  int sessions_per_persona = 2;
  std::uint64_t seed = 0;
  /// Counselor lines sent in every session.
  std::vector<std::string> script;
};

std::vector<std::string> default_probe_script();

struct FidelityReport {
  std::array<FidelityTrial, 5> trials{};
  std::vector<SessionRecord> sessions;
};

/// Runs mock sessions (one participant per persona, sessions 1..N), asks
/// `guesser` about each and tallies the guesses per attribute. Throws
/// InvalidArgument for zero sessions or an empty script.
FidelityReport fidelity_probe(const PersonaCatalog& catalog, const FidelityProbeConfig& config,
                              const Guesser& guesser);

/// Rows of attribute, n, correct, accuracy, chance_p, p_value.
Json fidelity_table_json(const FidelityReport& report);
std::string fidelity_table_text(const FidelityReport& report);

}  // namespace mitrainer
