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

#include "mitrainer/agent_runtime.hpp"

#include <chrono>

namespace mitrainer {

std::string schema_id_for(AgentKind kind) {
  return std::string(enum_name(kind)) + "_v1";
}

const ContextBlock* AgentTask::find_block(std::string_view label) const noexcept {
  for (const auto& b : context_blocks) {
    if (b.label == label) return &b;
  }
  return nullptr;
}

void AgentTask::validate() const {
  if (context_blocks.empty()) throw InvalidArgument("agent task has no context blocks");
  if (output_schema_id != schema_id_for(kind)) {
    throw InvalidArgument("schema '" + output_schema_id + "' does not match agent " +
                          std::string(enum_name(kind)));
  }
  if (!(temperature >= 0.0)) throw InvalidArgument("temperature must be >= 0");
  if (max_attempts < 1) throw InvalidArgument("max_attempts must be >= 1");
}

std::string_view system_prompt(AgentKind kind) {
  switch (kind) {
    case AgentKind::patient_response:
      return "You are role-playing a patient who misuses alcohol, attending a counseling session. "
             "Stay in character as the persona described in the persona block at all times and speak "
             "in the first person. Let your current cognitive state shape how open, confident, "
             "resistant or ambivalent you sound. If a between-session event is provided and this is "
             "your first reply of the session, bring the event up in your own words. Choose zero to "
             "three nonverbal cues from the cue vocabulary that fit your reply. "
             "Reply with only a JSON object: {\"reply\": string, \"cues\": [cue, ...]}.";
    case AgentKind::behavior_coding:
      return "You are an expert Motivational Interviewing Treatment Integrity (MITI) coder. Assign "
             "every MI behavior code that applies to the counselor's latest utterance, using only "
             "the codes listed in the code definitions block, each at most once. Think through the "
             "utterance step by step and justify each code by pointing at the words that support it. "
             "An utterance may receive no codes. Reply with only a JSON object: "
             "{\"codes\": [{\"code\": string, \"justification\": string}, ...]}.";
    case AgentKind::cognitive_model:
      return "You track the internal state of a simulated patient who misuses alcohol. Given the "
             "patient's previous cognitive state, the counselor's latest utterance and the patient's "
             "reply, decide the new value (integer 1-10) of each of the four cognitive factors. Use "
             "the factor explanations and the 1 and 10 anchor statements as the scale. Reason step "
             "by step and give a rationale for every factor; explain what changed and why. Reply with "
             "only a JSON object: {\"control\": {\"value\": int, \"rationale\": string}, "
             "\"self_efficacy\": {...}, \"awareness\": {...}, \"reward\": {...}}.";
    case AgentKind::global_scoring:
      return "You are an expert MITI coder rating a complete counseling session. Using the MITI "
             "global rating rubric provided, rate Partnership, Empathy, Cultivating Change Talk and "
             "Softening Sustain Talk, each as an integer from 1 (low) to 5 (high). Reason step by "
             "step and support each rating with a rationale that cites the transcript. Reply with "
             "only a JSON object: {\"partnership\": {\"score\": int, \"rationale\": string}, "
             "\"empathy\": {...}, \"cultivating_change_talk\": {...}, "
             "\"softening_sustain_talk\": {...}}.";
    case AgentKind::session_summary:
      return "You are a Motivational Interviewing supervisor giving feedback to a counselor in "
             "training. Using the session transcript, the global scores and the computed session "
             "metrics, write one concise paragraph that highlights the counselor's strengths, names "
             "areas that need improvement, and gives actionable recommendations for future practice. "
             "Reply with only a JSON object: {\"summary\": string}.";
    case AgentKind::between_session_event:
      return "You write the story of a simulated patient between two counseling sessions. Given the "
             "persona, the patient's cognitive state at the end of the session and the session "
             "transcript, describe one plausible event related to the patient's recovery journey that "
             "happened before the next session (for example a relapse at a party, or resisting a "
             "craving). Classify it as setback, progress or mixed, and give the integer change "
             "(-3 to 3) it causes to any cognitive factor. Reply with only a JSON object: "
             "{\"narrative\": string, \"valence\": string, \"factor_deltas\": {factor: int}}.";
  }
  return "";
}

std::string render_context(const AgentTask& task) {
  std::string out;
  for (const auto& b : task.context_blocks) {
    out += "### ";
    out += b.label;
    out += "\n";
    out += b.text;
    out += "\n\n";
  }
  return out;
}

Json exchange_json(const AgentExchange& exchange) {
  Json blocks = Json::array();
  for (const auto& b : exchange.task.context_blocks) blocks.push_back(Json{{"label", b.label}, {"text", b.text}});
  Json attempts = Json::array();
  for (const auto& a : exchange.attempts) {
    Json item = Json::object();
    item["raw_reply"] = a.raw_reply;
    item["parsed"] = a.parsed;
    item["error"] = a.error;
    item["latency_ms"] = a.latency_ms;
    item["transport"] = a.transport;
    attempts.push_back(std::move(item));
  }
  Json j = Json::object();
  j["agent"] = enum_json(exchange.task.kind);
  j["schema_id"] = exchange.task.output_schema_id;
  j["temperature"] = exchange.task.temperature;
  j["max_attempts"] = exchange.task.max_attempts;
  j["context_blocks"] = std::move(blocks);
  j["attempts"] = std::move(attempts);
  j["final"] = exchange.final ? *exchange.final : Json(nullptr);
  j["warnings"] = exchange.warnings;
  return j;
}

namespace {

std::string last_raw(const AgentExchange& e) {
  return e.attempts.empty() ? std::string{} : e.attempts.back().raw_reply;
}

}  // namespace

AgentFailure::AgentFailure(AgentExchange exchange)
    : Error(ErrorCode::agent_failure,
            std::string(enum_name(exchange.task.kind)) + " agent produced no valid reply in " +
                std::to_string(exchange.attempts.size()) + " attempt(s)" +
                (exchange.attempts.empty() ? std::string{} : ": " + exchange.attempts.back().error)),
      exchange_(std::move(exchange)),
      last_raw_(last_raw(exchange_)) {}

std::optional<Json> parse_reply_document(std::string_view raw) {
  std::string_view body = raw;
  const auto fence = body.find("```");
  if (fence != std::string_view::npos) {
    body.remove_prefix(fence + 3);
    const auto newline = body.find('\n');
    if (newline != std::string_view::npos) body.remove_prefix(newline + 1);
    const auto close = body.find("```");
    if (close != std::string_view::npos) body = body.substr(0, close);
  }
  Json j = Json::parse(body.begin(), body.end(), nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

Json complete_structured(const AgentTask& task, CompletionBackend& backend,
                         const ReplyValidator& validate, const ExchangeSink& sink) {
  task.validate();
  AgentExchange exchange{task, {}, std::nullopt, {}};
  auto publish = [&] {
    if (sink) sink(exchange);
  };

  for (int attempt = 1; attempt <= task.max_attempts; ++attempt) {
    AgentAttempt record;
    const auto start = std::chrono::steady_clock::now();
    BackendReply reply;
    try {
      reply = backend.complete(task, attempt);
    } catch (const BackendUnavailable& e) {
      record.error = e.what();
      record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      exchange.attempts.push_back(std::move(record));
      publish();
      throw;
    }
    record.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
    record.raw_reply = std::move(reply.content);
    record.transport = std::move(reply.transport);

    auto document = parse_reply_document(record.raw_reply);
    if (!document) {
      record.error = "reply is not a JSON object";
      exchange.attempts.push_back(std::move(record));
      continue;
    }
    std::vector<std::string> warnings;
    try {
      validate(*document, warnings);
    } catch (const MalformedReply& e) {
      record.error = e.what();
      exchange.attempts.push_back(std::move(record));
      continue;
    } catch (const InvalidArgument& e) {
      record.error = e.what();
      exchange.attempts.push_back(std::move(record));
      continue;
    } catch (const Json::exception& e) {
      record.error = e.what();
      exchange.attempts.push_back(std::move(record));
      continue;
    }
    record.parsed = true;
    exchange.attempts.push_back(std::move(record));
    exchange.warnings = std::move(warnings);
    exchange.final = *document;
    publish();
    return *exchange.final;
  }
  publish();
  throw AgentFailure(std::move(exchange));
}

}  // namespace mitrainer
