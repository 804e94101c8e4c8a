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

#include "mitrainer/live_backend.hpp"

#include <cstdlib>

#include "httplib.h"

namespace mitrainer {

Json chat_request_body(const AgentTask& task, std::string_view model) {
  Json messages = Json::array();
  messages.push_back(Json{{"role", "system"}, {"content", std::string(system_prompt(task.kind))}});
  messages.push_back(Json{{"role", "user"}, {"content", render_context(task)}});
  Json body = Json::object();
  body["model"] = std::string(model);
  body["temperature"] = task.temperature;
  body["messages"] = std::move(messages);
  body["response_format"] = Json{{"type", "json_object"}};
  return body;
}

std::string redact(std::string text, std::string_view secret) {
  if (secret.empty()) return text;
  std::size_t pos = 0;
  while ((pos = text.find(secret, pos)) != std::string::npos) {
    text.replace(pos, secret.size(), "[REDACTED]");
    pos += 10;
  }
  return text;
}

LiveBackend::LiveBackend(LiveBackendSettings settings) : settings_(std::move(settings)) {
  const auto& url = settings_.endpoint;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw InvalidConfiguration("live endpoint must be an http(s) URL: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw InvalidConfiguration("unsupported endpoint scheme '" + scheme + "'");
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_ = url.substr(0, path_start);
  path_ = path_start == std::string::npos ? "/" : url.substr(path_start);
  if (settings_.model.empty()) throw InvalidConfiguration("live backend needs a model name");
  if (!settings_.credential_env.empty()) {
    const char* key = std::getenv(settings_.credential_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw InvalidConfiguration("environment variable " + settings_.credential_env + " is not set");
    }
    api_key_ = key;
  }
}

BackendReply LiveBackend::complete(const AgentTask& task, int attempt) {
  httplib::Client client(scheme_host_);
  const auto t = static_cast<time_t>(settings_.timeout.count());
  client.set_connection_timeout(t, 0);
  client.set_read_timeout(t, 0);
  client.set_write_timeout(t, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  const std::string body = chat_request_body(task, settings_.model).dump();
  BackendReply out;
  out.transport = Json::object();
  out.transport["backend"] = "live";
  out.transport["url"] = settings_.endpoint;
  out.transport["attempt"] = attempt;
  out.transport["request_body"] = redact(body, api_key_);

  const auto res = client.Post(path_, headers, body, "application/json");
  if (!res) {
    throw BackendUnavailable(settings_.endpoint + ": " + httplib::to_string(res.error()));
  }
  out.transport["status"] = res->status;
  out.transport["response_body"] = redact(res->body, api_key_);
  if (res->status >= 500 || res->status == 429) {
    throw BackendUnavailable(settings_.endpoint + " returned HTTP " + std::to_string(res->status));
  }
  if (res->status != 200) {
    // Client errors are not transient; surface them as a malformed reply.
    out.content = res->body;
    return out;
  }
  const Json reply = Json::parse(res->body, nullptr, false);
  if (reply.is_discarded()) {
    out.content = res->body;
    return out;
  }
  try {
    out.content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const Json::exception&) {
    out.content = res->body;
  }
  return out;
}

}  // namespace mitrainer
