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

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "mitrainer/live_backend.hpp"
#include "mitrainer/session_engine.hpp"

namespace mitrainer {

enum class BackendKind { mock, live };

template <>
struct EnumNames<BackendKind> {
  static constexpr std::array<std::string_view, 2> names{"mock", "live"};
};

struct BackendConfig {
  BackendKind kind = BackendKind::mock;
  std::uint64_t mock_seed = 0;
  LiveBackendSettings live;
};

struct ServiceConfig {
  EngineConfig engine;
  BackendConfig backend;
  std::string listen_host = "127.0.0.1";
  int listen_port = 8080;
  /// Empty: the built-in catalog.
  std::filesystem::path persona_catalog;
};

/// Looks up an environment variable; nullopt when unset.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;
EnvLookup process_env();

/// Parses a config document, then applies MITRAINER_* overrides from `env`.
/// Relative paths resolve against `base_dir`. Throws InvalidConfiguration.
ServiceConfig parse_config(const Json& doc, const EnvLookup& env, const std::filesystem::path& base_dir = {});
/// Throws NotFound if the file is missing, InvalidConfiguration if malformed.
ServiceConfig load_config(const std::filesystem::path& path, const EnvLookup& env = process_env());

/// Startup checks for serving: a data directory that exists, valid engine
/// settings, a reachable catalog file.
void validate_for_serving(const ServiceConfig& config);

std::shared_ptr<CompletionBackend> make_backend(const BackendConfig& config);
PersonaCatalog load_catalog(const ServiceConfig& config);

}  // namespace mitrainer
