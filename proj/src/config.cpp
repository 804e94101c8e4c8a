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

#include "mitrainer/config.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "mitrainer/mock_backend.hpp"
#include "mitrainer/report.hpp"

namespace mitrainer {

namespace fs = std::filesystem;

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    const char* v = std::getenv(name.c_str());
    if (v == nullptr) return std::nullopt;
    return std::string(v);
  };
}

namespace {

fs::path resolve(const fs::path& p, const fs::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

long long env_integer(const std::string& name, const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw InvalidConfiguration(name + " must be an integer");
  return v;
}

std::uint64_t seed_value(const Json& j, std::string_view what) {
  if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() && j.get<long long>() < 0)) {
    throw InvalidConfiguration(std::string(what) + " must be a non-negative integer");
  }
  return j.get<std::uint64_t>();
}

int int_value(const Json& j, std::string_view what) {
  if (!j.is_number_integer()) throw InvalidConfiguration(std::string(what) + " must be an integer");
  return j.get<int>();
}

std::string string_value(const Json& j, std::string_view what) {
  if (!j.is_string()) throw InvalidConfiguration(std::string(what) + " must be a string");
  return j.get<std::string>();
}

void parse_backend(const Json& b, BackendConfig& out) {
  if (!b.is_object()) throw InvalidConfiguration("backend must be an object");
  try {
    reject_unknown_fields(b, {"kind", "seed", "endpoint", "model", "credential_env", "timeout_seconds"}, "backend");
  } catch (const InvalidArgument& e) {
    throw InvalidConfiguration(e.what());
  }
  if (b.contains("kind")) {
    const auto kind = parse_enum<BackendKind>(string_value(b["kind"], "backend.kind"));
    if (!kind) throw InvalidConfiguration("backend.kind must be mock or live");
    out.kind = *kind;
  }
  if (b.contains("seed")) out.mock_seed = seed_value(b["seed"], "backend.seed");
  if (b.contains("endpoint")) out.live.endpoint = string_value(b["endpoint"], "backend.endpoint");
  if (b.contains("model")) out.live.model = string_value(b["model"], "backend.model");
  if (b.contains("credential_env")) out.live.credential_env = string_value(b["credential_env"], "backend.credential_env");
  if (b.contains("timeout_seconds")) {
    const int t = int_value(b["timeout_seconds"], "backend.timeout_seconds");
    if (t < 1) throw InvalidConfiguration("backend.timeout_seconds must be positive");
    out.live.timeout = std::chrono::seconds{t};
  }
}

}  // namespace

ServiceConfig parse_config(const Json& doc, const EnvLookup& env, const fs::path& base_dir) {
  if (!doc.is_object()) throw InvalidConfiguration("config must be a JSON object");
  try {
    reject_unknown_fields(doc,
                          {"data_dir", "listen_host", "listen_port", "backend", "thresholds", "max_sessions",
                           "initial_range", "persona_catalog", "seed", "temperature", "max_attempts"},
                          "config");
  } catch (const InvalidArgument& e) {
    throw InvalidConfiguration(e.what());
  }

  ServiceConfig c;
  if (doc.contains("data_dir")) c.engine.data_dir = resolve(string_value(doc["data_dir"], "data_dir"), base_dir);
  if (doc.contains("listen_host")) c.listen_host = string_value(doc["listen_host"], "listen_host");
  if (doc.contains("listen_port")) c.listen_port = int_value(doc["listen_port"], "listen_port");
  if (doc.contains("backend")) parse_backend(doc["backend"], c.backend);
  if (doc.contains("thresholds")) {
    try {
      c.engine.thresholds = thresholds_from_json(doc["thresholds"]);
    } catch (const InvalidConfiguration&) {
      throw;
    } catch (const Error& e) {
      throw InvalidConfiguration(e.what());
    }
  }
  if (doc.contains("max_sessions")) c.engine.max_sessions = int_value(doc["max_sessions"], "max_sessions");
  if (doc.contains("initial_range")) {
    const Json& r = doc["initial_range"];
    if (!r.is_array() || r.size() != 2) throw InvalidConfiguration("initial_range must be [lo, hi]");
    c.engine.initial_range = {int_value(r[0], "initial_range[0]"), int_value(r[1], "initial_range[1]")};
  }
  if (doc.contains("persona_catalog")) {
    c.persona_catalog = resolve(string_value(doc["persona_catalog"], "persona_catalog"), base_dir);
  }
  if (doc.contains("seed")) c.engine.seed = seed_value(doc["seed"], "seed");
  if (doc.contains("temperature")) {
    if (!doc["temperature"].is_number()) throw InvalidConfiguration("temperature must be a number");
    c.engine.temperature = doc["temperature"].get<double>();
  }
  if (doc.contains("max_attempts")) c.engine.max_attempts = int_value(doc["max_attempts"], "max_attempts");

  const auto get = [&env](const char* name) { return env ? env(name) : std::nullopt; };
  if (auto v = get("MITRAINER_DATA_DIR")) c.engine.data_dir = *v;
  if (auto v = get("MITRAINER_LISTEN_HOST")) c.listen_host = *v;
  if (auto v = get("MITRAINER_LISTEN_PORT")) c.listen_port = static_cast<int>(env_integer("MITRAINER_LISTEN_PORT", *v));
  if (auto v = get("MITRAINER_BACKEND")) {
    const auto kind = parse_enum<BackendKind>(*v);
    if (!kind) throw InvalidConfiguration("MITRAINER_BACKEND must be mock or live");
    c.backend.kind = *kind;
  }
  if (auto v = get("MITRAINER_LIVE_ENDPOINT")) c.backend.live.endpoint = *v;
  if (auto v = get("MITRAINER_LIVE_MODEL")) c.backend.live.model = *v;
  if (auto v = get("MITRAINER_CREDENTIAL_ENV")) c.backend.live.credential_env = *v;
  if (auto v = get("MITRAINER_SEED")) {
    const auto s = env_integer("MITRAINER_SEED", *v);
    if (s < 0) throw InvalidConfiguration("MITRAINER_SEED must be non-negative");
    c.engine.seed = static_cast<std::uint64_t>(s);
  }
  if (auto v = get("MITRAINER_THRESHOLDS")) {
    const Json t = Json::parse(*v, nullptr, false);
    if (t.is_discarded()) throw InvalidConfiguration("MITRAINER_THRESHOLDS must be a JSON object");
    try {
      c.engine.thresholds = thresholds_from_json(t, c.engine.thresholds);
    } catch (const InvalidConfiguration&) {
      throw;
    } catch (const Error& e) {
      throw InvalidConfiguration(e.what());
    }
  }

  if (c.listen_port < 0 || c.listen_port > 65535) throw InvalidConfiguration("listen_port must be in [0, 65535]");
  c.engine.thresholds.validate();
  return c;
}

ServiceConfig load_config(const fs::path& path, const EnvLookup& env) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  const Json doc = Json::parse(buf.str(), nullptr, false);
  if (doc.is_discarded()) throw InvalidConfiguration(path.string() + " is not valid JSON");
  return parse_config(doc, env, path.parent_path());
}

void validate_for_serving(const ServiceConfig& config) {
  if (config.engine.data_dir.empty()) throw InvalidConfiguration("data_dir is required");
  if (!fs::is_directory(config.engine.data_dir)) {
    throw InvalidConfiguration("data_dir " + config.engine.data_dir.string() + " does not exist");
  }
  config.engine.validate();
  if (!config.persona_catalog.empty() && !fs::exists(config.persona_catalog)) {
    throw InvalidConfiguration("persona_catalog " + config.persona_catalog.string() + " does not exist");
  }
  if (config.backend.kind == BackendKind::live && config.backend.live.endpoint.empty()) {
    throw InvalidConfiguration("live backend needs an endpoint");
  }
}

std::shared_ptr<CompletionBackend> make_backend(const BackendConfig& config) {
  switch (config.kind) {
    case BackendKind::mock: return std::make_shared<MockBackend>(config.mock_seed);
    case BackendKind::live: return std::make_shared<LiveBackend>(config.live);
  }
  throw InvalidConfiguration("unknown backend kind");
}

PersonaCatalog load_catalog(const ServiceConfig& config) {
  if (config.persona_catalog.empty()) return PersonaCatalog::builtin();
  return PersonaCatalog::load_file(config.persona_catalog);
}

}  // namespace mitrainer
