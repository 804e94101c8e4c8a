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

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mitrainer/errors.hpp"
#include "mitrainer/json_io.hpp"

namespace mitrainer {

enum class AgentKind {
  patient_response,
  behavior_coding,
  cognitive_model,
  global_scoring,
  session_summary,
  between_session_event,
};

template <>
struct EnumNames<AgentKind> {
  static constexpr std::array<std::string_view, 6> names{
      "patient_response", "behavior_coding", "cognitive_model",
      "global_scoring",   "session_summary", "between_session_event"};
};

/// Reply schema expected from each agent kind ("<kind>_v1").
std::string schema_id_for(AgentKind kind);

/// Labels of the context blocks an agent prompt may carry.
namespace block {
inline constexpr std::string_view persona = "persona";
inline constexpr std::string_view session_number = "session_number";
inline constexpr std::string_view prior_session_transcript = "prior_session_transcript";
inline constexpr std::string_view between_session_event = "between_session_event";
inline constexpr std::string_view cognitive_state = "cognitive_state";
inline constexpr std::string_view current_transcript = "current_transcript";
inline constexpr std::string_view latest_utterance = "latest_utterance";
inline constexpr std::string_view patient_reply = "patient_reply";
inline constexpr std::string_view factor_anchors = "factor_anchors";
inline constexpr std::string_view cue_vocabulary = "cue_vocabulary";
inline constexpr std::string_view code_definitions = "code_definitions";
inline constexpr std::string_view scoring_rubric = "scoring_rubric";
inline constexpr std::string_view global_scores = "global_scores";
inline constexpr std::string_view session_metrics = "session_metrics";
}  // namespace block

struct ContextBlock {
  std::string label;
  std::string text;
};

struct AgentTask {
  AgentKind kind = AgentKind::patient_response;
  std::vector<ContextBlock> context_blocks;
  std::string output_schema_id;
  double temperature = 1.0;
  int max_attempts = 3;

  /// First block with `label`, or nullptr.
  const ContextBlock* find_block(std::string_view label) const noexcept;
  /// Throws InvalidArgument on an empty block list, a schema/kind mismatch,
  /// a negative temperature or max_attempts < 1.
  void validate() const;
};

/// System instruction for an agent kind, including the reply schema.
std::string_view system_prompt(AgentKind kind);
/// Concatenated labeled blocks, as sent in the user message.
std::string render_context(const AgentTask& task);

/// What a backend returns for one attempt. `transport` is a redacted record
/// of the wire exchange (empty for the mock).
struct BackendReply {
  std::string content;
  Json transport = Json::object();
};

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;

  /// One completion for `task`; `attempt` is 1-based. Throws
  /// BackendUnavailable on transport failure.
  virtual BackendReply complete(const AgentTask& task, int attempt) = 0;
  virtual std::string_view name() const noexcept = 0;
};

struct AgentAttempt {
  std::string raw_reply;
  bool parsed = false;
  std::string error;  // parse / validation / transport failure reason
  long long latency_ms = 0;
  Json transport = Json::object();
};

struct AgentExchange {
  AgentTask task;
  std::vector<AgentAttempt> attempts;
  std::optional<Json> final;  // validated reply document
  std::vector<std::string> warnings;
};

Json exchange_json(const AgentExchange& exchange);

/// Receives every exchange, successful or not.
using ExchangeSink = std::function<void(const AgentExchange&)>;

/// Raised by a reply validator to request a retry.
class MalformedReply : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AgentFailure : public Error {
 public:
  explicit AgentFailure(AgentExchange exchange);

  const AgentExchange& exchange() const noexcept { return exchange_; }
  const std::string& last_raw_reply() const noexcept { return last_raw_; }

 private:
  AgentExchange exchange_;
  std::string last_raw_;
};

/// Checks a parsed reply document; throws MalformedReply (or
/// InvalidArgument) to reject it. May append warnings.
using ReplyValidator = std::function<void(const Json& reply, std::vector<std::string>& warnings)>;

/// Sends `task` until a reply parses as a JSON object and passes `validate`,
/// at most task.max_attempts backend calls. Returns the accepted document.
/// Throws AgentFailure when every attempt is malformed and
/// BackendUnavailable on a transport failure (not retried here). `sink`,
/// when set, sees the exchange in all three outcomes.
Json complete_structured(const AgentTask& task, CompletionBackend& backend,
                         const ReplyValidator& validate, const ExchangeSink& sink = {});

/// Accepts a bare JSON object or one wrapped in a ``` fence.
std::optional<Json> parse_reply_document(std::string_view raw);

}  // namespace mitrainer
