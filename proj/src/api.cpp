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

#include "mitrainer/api.hpp"

#include <regex>

#include "httplib.h"
#include "mitrainer/report.hpp"

namespace mitrainer {

Json error_json(ErrorCode code, std::string_view message, const Json& detail) {
  Json err = Json::object();
  err["code"] = std::string(to_string(code));
  err["message"] = std::string(message);
  if (!detail.is_null()) err["detail"] = detail;
  Json j = Json::object();
  j["schema"] = "error_v1";
  j["error"] = std::move(err);
  return j;
}

Json session_summary_json(const SessionRecord& r) {
  Json j = Json::object();
  j["schema"] = "session_v1";
  j["session_id"] = r.session_id;
  j["participant_id"] = r.participant_id;
  j["persona_id"] = r.persona_id;
  j["session_number"] = r.session_number;
  j["max_sessions"] = r.max_sessions;
  j["status"] = enum_json(r.status);
  j["completed_exchanges"] = r.completed_exchanges();
  j["failed_turns"] = r.failed_turns.size();
  j["report_id"] = r.status == SessionStatus::reported ? Json(report_id_for(r.session_id)) : Json(nullptr);
  return j;
}

Json personas_json(const PersonaCatalog& catalog) {
  Json list = Json::array();
  for (const auto& p : catalog.personas()) {
    Json e = Json::object();
    e["persona_id"] = p.persona_id;
    e["display_name"] = p.display_name;
    e["gender"] = enum_json(p.gender);
    e["age_years"] = p.age_years;
    e["ethnicity"] = enum_json(p.ethnicity);
    e["occupation"] = enum_json(p.occupation);
    e["mbti"] = enum_json(p.mbti);
    e["character_model"] = p.character_model;
    e["voice_key"] = p.voice_key;
    list.push_back(std::move(e));
  }
  Json j = Json::object();
  j["schema"] = "personas_v1";
  j["personas"] = std::move(list);
  return j;
}

namespace {

ApiResponse error_response(ErrorCode code, std::string_view message, const Json& detail = nullptr) {
  return ApiResponse{http_status(code), error_json(code, message, detail)};
}

Json parse_body(const std::string& body, bool allow_empty) {
  if (body.find_first_not_of(" \t\r\n") == std::string::npos) {
    if (allow_empty) return Json::object();
    throw InvalidArgument("request body must be a JSON object");
  }
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InvalidArgument("request body must be a JSON object");
  return j;
}

Json transcript_json(const DashboardReport& report) {
  Json entries = Json::array();
  for (const auto& e : report.transcript) entries.push_back(report_transcript_entry_json(e));
  Json j = Json::object();
  j["schema"] = "transcript_v1";
  j["session_id"] = report.session_id;
  j["entries"] = std::move(entries);
  return j;
}

const std::regex& session_route() {
  static const std::regex re(R"(^/api/v1/sessions/([A-Za-z0-9_.\-]+)(/(utterances|end|report|transcript))?$)");
  return re;
}

}  // namespace

ApiResponse Api::handle(const ApiRequest& req) const {
  try {
    if (req.path == "/api/v1/personas") {
      if (req.method != "GET") return error_response(ErrorCode::not_found, "no route " + req.method + " " + req.path);
      return ApiResponse{200, personas_json(engine_.catalog())};
    }

    if (req.path == "/api/v1/sessions") {
      if (req.method == "POST") {
        const Json body = parse_body(req.body, false);
        reject_unknown_fields(body, {"participant_id", "seed", "persona_id"}, "request");
        const std::string pid = require_string(body, "participant_id");
        std::optional<std::uint64_t> seed;
        if (body.contains("seed") && !body["seed"].is_null()) {
          if (!body["seed"].is_number_unsigned()) throw InvalidArgument("seed must be a non-negative integer");
          seed = body["seed"].get<std::uint64_t>();
        }
        std::optional<std::string> persona;
        if (body.contains("persona_id") && !body["persona_id"].is_null()) persona = require_string(body, "persona_id");
        return ApiResponse{201, session_summary_json(engine_.create_session(pid, seed, persona))};
      }
      if (req.method == "GET") {
        for (const auto& [key, _] : req.query) {
          if (key != "participant_id") throw InvalidArgument("unknown query parameter '" + key + "'");
        }
        const auto it = req.query.find("participant_id");
        if (it == req.query.end() || it->second.empty()) throw InvalidArgument("participant_id query parameter is required");
        Json list = Json::array();
        for (const auto& r : engine_.sessions_for(it->second)) list.push_back(session_summary_json(r));
        Json j = Json::object();
        j["schema"] = "session_list_v1";
        j["participant_id"] = it->second;
        j["sessions"] = std::move(list);
        return ApiResponse{200, std::move(j)};
      }
      return error_response(ErrorCode::not_found, "no route " + req.method + " " + req.path);
    }

    std::smatch m;
    if (std::regex_match(req.path, m, session_route())) {
      const std::string id = m[1].str();
      const std::string action = m[3].str();
      if (action.empty() && req.method == "GET") {
        return ApiResponse{200, session_summary_json(engine_.session(id))};
      }
      if (action == "utterances" && req.method == "POST") {
        const Json body = parse_body(req.body, false);
        reject_unknown_fields(body, {"text"}, "request");
        const std::string text = require_string(body, "text", true);
        const auto turn = engine_.submit_utterance(id, text);
        Json cues = Json::array();
        for (const auto c : turn.cues) cues.push_back(enum_json(c));
        Json j = Json::object();
        j["schema"] = "turn_v1";
        j["session_id"] = id;
        j["reply"] = turn.reply;
        j["cues"] = std::move(cues);
        j["turn_index"] = turn.turn_index;
        return ApiResponse{200, std::move(j)};
      }
      if (action == "end" && req.method == "POST") {
        const Json body = parse_body(req.body, true);
        reject_unknown_fields(body, {}, "request");
        const auto end = engine_.end_session(id);
        Json unavailable = Json::array();
        for (const auto mod : end.unavailable_modules) unavailable.push_back(enum_json(mod));
        Json j = Json::object();
        j["schema"] = "end_v1";
        j["session_id"] = id;
        j["report_id"] = end.report_id;
        j["unavailable_modules"] = std::move(unavailable);
        j["errors"] = end.errors;
        return ApiResponse{200, std::move(j)};
      }
      if (action == "report" && req.method == "GET") {
        return ApiResponse{200, report_json(engine_.report(id))};
      }
      if (action == "transcript" && req.method == "GET") {
        return ApiResponse{200, transcript_json(engine_.report(id))};
      }
    }
    return error_response(ErrorCode::not_found, "no route " + req.method + " " + req.path);
  } catch (const TurnFailed& e) {
    return error_response(e.code(), e.what(), Json{{"turn_failed", true}});
  } catch (const IncompleteReport& e) {
    return error_response(e.code(), e.what(), Json{{"gap", e.gap()}});
  } catch (const Error& e) {
    return error_response(e.code(), e.what());
  } catch (const std::exception& e) {
    return error_response(ErrorCode::internal, e.what());
  }
}

// ---------------------------------------------------------------------------

HttpServer::HttpServer(SessionEngine& engine, std::string host, int port)
    : api_(engine), host_(std::move(host)), port_(port), server_(std::make_unique<httplib::Server>()) {
  const auto dispatch = [this](const httplib::Request& hreq, httplib::Response& hres) {
    ApiRequest req;
    req.method = hreq.method;
    req.path = hreq.path;
    for (const auto& [k, v] : hreq.params) req.query[k] = v;
    req.body = hreq.body;
    const ApiResponse res = api_.handle(req);
    hres.status = res.status;
    hres.set_content(res.body.dump(), "application/json");
  };
  const std::string any = R"(/.*)";
  server_->Get(any, dispatch);
  server_->Post(any, dispatch);
  server_->Put(any, dispatch);
  server_->Delete(any, dispatch);
  server_->Patch(any, dispatch);
}

HttpServer::~HttpServer() { stop(); }

void HttpServer::bind() {
  if (port_ == 0) {
    port_ = server_->bind_to_any_port(host_);
    if (port_ < 0) throw InvalidConfiguration("cannot bind " + host_);
  } else if (!server_->bind_to_port(host_, port_)) {
    throw InvalidConfiguration("cannot bind " + host_ + ":" + std::to_string(port_));
  }
}

void HttpServer::start() {
  bind();
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

void HttpServer::run() {
  bind();
  server_->listen_after_bind();
}

void HttpServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace mitrainer
