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

#include "mitrainer/event_log.hpp"

#include <sstream>

#include "mitrainer/errors.hpp"

namespace mitrainer {

Json log_entry_json(const LogEntry& entry) {
  Json j = Json::object();
  j["schema"] = kLogSchema;
  j["sequence"] = entry.sequence;
  j["kind"] = enum_json(entry.kind);
  j["timestamp"] = format_rfc3339(entry.timestamp);
  j["payload"] = entry.payload;
  return j;
}

std::string serialize_log_line(const LogEntry& entry) { return log_entry_json(entry).dump() + "\n"; }

std::vector<LogEntry> parse_log(std::string_view ndjson) {
  std::vector<LogEntry> out;
  std::size_t start = 0;
  while (start < ndjson.size()) {
    auto end = ndjson.find('\n', start);
    if (end == std::string_view::npos) end = ndjson.size();
    const auto line = ndjson.substr(start, end - start);
    start = end + 1;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    const auto expected = static_cast<std::int64_t>(out.size());
    const Json j = Json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ReplayError(expected, "line is not a JSON object");
    try {
      if (require_string(j, "schema") != kLogSchema) throw ReplayError(expected, "unknown log schema");
      LogEntry e;
      e.sequence = require_integer(j, "sequence");
      e.kind = enum_from_json<LogKind>(require_field(j, "kind"), "log kind");
      const auto ts = parse_rfc3339(require_string(j, "timestamp"));
      if (!ts) throw ReplayError(expected, "bad timestamp");
      e.timestamp = *ts;
      e.payload = require_field(j, "payload");
      out.push_back(std::move(e));
    } catch (const ReplayError&) {
      throw;
    } catch (const Error& e) {
      throw ReplayError(expected, e.what());
    }
  }
  return out;
}

std::vector<LogEntry> read_log_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open log " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_log(buf.str());
}

EventLog::EventLog(std::filesystem::path file) : EventLog(std::move(file), {}) {}

EventLog::EventLog(std::filesystem::path file, std::vector<LogEntry> existing)
    : file_(std::move(file)), entries_(std::move(existing)) {
  if (!file_.empty()) {
    out_.open(file_, std::ios::app | std::ios::binary);
    if (!out_) throw InvalidState("cannot open log for append: " + file_.string());
  }
}

const LogEntry& EventLog::append(LogKind kind, Json payload, Timestamp timestamp) {
  LogEntry e;
  e.sequence = static_cast<std::int64_t>(entries_.size());
  e.kind = kind;
  e.timestamp = timestamp;
  e.payload = std::move(payload);
  if (out_.is_open()) {
    out_ << serialize_log_line(e);
    out_.flush();
    if (!out_) throw InvalidState("failed to write log " + file_.string());
  }
  entries_.push_back(std::move(e));
  return entries_.back();
}

}  // namespace mitrainer
