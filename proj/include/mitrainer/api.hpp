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

#include <map>
#include <memory>
#include <string>
#include <thread>

#include "mitrainer/json_io.hpp"
#include "mitrainer/session_engine.hpp"

namespace httplib {
class Server;
}

namespace mitrainer {

inline constexpr std::string_view kApiPrefix = "/api/v1";

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  Json body = Json::object();
};

/// Request routing and validation over a SessionEngine, independent of the
/// transport. Mid-session responses never carry codes, factor values or
/// scores.
class Api {
 public:
  explicit Api(SessionEngine& engine) : engine_(engine) {}

  ApiResponse handle(const ApiRequest& request) const;

 private:
  SessionEngine& engine_;
};

/// Trainee-safe session view (no cognitive state, events or codes).
Json session_summary_json(const SessionRecord& record);
Json personas_json(const PersonaCatalog& catalog);
Json error_json(ErrorCode code, std::string_view message, const Json& detail = nullptr);

/// httplib server bound to an Api. Port 0 picks a free port.
class HttpServer {
 public:
  HttpServer(SessionEngine& engine, std::string host, int port);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds and serves on a background thread. Throws InvalidConfiguration
  /// if the address cannot be bound.
  void start();
  /// Blocks the calling thread until stop() is called.
  void run();
  void stop();
  int port() const noexcept { return port_; }
  const std::string& host() const noexcept { return host_; }

 private:
  void bind();

  Api api_;
  std::string host_;
  int port_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace mitrainer
