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

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mitrainer/agent_runtime.hpp"
#include "mitrainer/domain.hpp"

namespace mitrainer {

/// Scripted override for the mock. A rule applies when the agent kind
/// matches, the attempt matches (0 = every attempt) and `when_contains` is
/// found in the `match_block` text (whole rendered context when the label
/// is empty or absent from the task). The first applicable rule wins.
struct MockRule {
  AgentKind kind = AgentKind::patient_response;
  int attempt = 0;
  std::string when_contains;
  std::string match_block = std::string(block::latest_utterance);
  std::string reply;
  bool transport_failure = false;
};

struct MockScript {
  std::vector<MockRule> rules;
};

/// Rule-based, deterministic backend: every reply is a pure function of
/// (task, attempt, seed). Without a script it always produces valid replies.
class MockBackend : public CompletionBackend {
 public:
  explicit MockBackend(std::uint64_t seed = 0, MockScript script = {});

  BackendReply complete(const AgentTask& task, int attempt) override;
  std::string_view name() const noexcept override { return "mock"; }

  /// The unscripted reply for `task`.
  std::string rule_reply(const AgentTask& task) const;

 private:
  std::uint64_t seed_;
  MockScript script_;
};

/// Keyword rule table used by the mock coder. Codes appear in enum order.
std::vector<CodedBehavior> mock_code_utterance(std::string_view utterance);

/// Per-factor sum of the code rules, capped to [-1, +1]:
/// affirmation -> self_efficacy +1; emphasizing_autonomy, seeking_collaboration
/// -> control +1; simple/complex reflection, persuading_with_permission ->
/// awareness +1; complex_reflection -> reward -1; persuading -> control -1;
/// confront -> self_efficacy -1, control -1.
FactorDeltas mock_factor_deltas(std::span<const CodedBehavior> codes);

/// Phrase the mock summary includes when no affirmations were coded.
inline constexpr std::string_view kAffirmationRecommendation =
    "Recommendation: add affirmations that recognize the client's strengths and efforts.";

/// Phrases the mock patient uses to reveal persona attributes. Only
/// occupation and gender are ever stated; age, ethnicity and personality
/// are not.
std::string_view mock_occupation_phrase(Occupation o) noexcept;
std::string_view mock_gender_phrase(Gender g) noexcept;

}  // namespace mitrainer
