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

#include <chrono>
#include <string>
#include <string_view>

#include "mitrainer/agent_runtime.hpp"

namespace mitrainer {

struct LiveBackendSettings {
  /// Full chat-completions URL, e.g. https://api.openai.com/v1/chat/completions
  std::string endpoint;
  std::string model;
  /// Name of the environment variable holding the API key. Empty: no auth.
  std::string credential_env;
  std::chrono::seconds timeout{60};
};

/// OpenAI-compatible chat-completions client (http or https). Sends the
/// agent's system prompt and rendered context blocks, asks for a JSON
/// object reply and returns choices[0].message.content.
class LiveBackend : public CompletionBackend {
 public:
  explicit LiveBackend(LiveBackendSettings settings);

  BackendReply complete(const AgentTask& task, int attempt) override;
  std::string_view name() const noexcept override { return "live"; }

 private:
  LiveBackendSettings settings_;
  std::string scheme_host_;
  std::string path_;
  std::string api_key_;
};

/// Request body sent for `task` (exposed for tests).
Json chat_request_body(const AgentTask& task, std::string_view model);

/// Replaces every occurrence of `secret` with "[REDACTED]".
std::string redact(std::string text, std::string_view secret);

}  // namespace mitrainer
