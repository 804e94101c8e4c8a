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
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "mitrainer/domain.hpp"
#include "mitrainer/json_io.hpp"

namespace mitrainer {

inline constexpr std::string_view kLogSchema = "log_v1";

enum class LogKind {
  session_created,
  counselor_utterance,
  patient_reply,
  annotation_attached,
  cognitive_updated,
  session_ended,
  event_generated,
  report_built,
  agent_exchange,
};

template <>
struct EnumNames<LogKind> {
  static constexpr std::array<std::string_view, 9> names{
      "session_created",   "counselor_utterance", "patient_reply",
      "annotation_attached", "cognitive_updated", "session_ended",
      "event_generated",   "report_built",        "agent_exchange"};
};

struct LogEntry {
  std::int64_t sequence = 0;
  LogKind kind = LogKind::session_created;
  Timestamp timestamp{};
  Json payload = Json::object();
};

Json log_entry_json(const LogEntry& entry);
/// One line of the on-disk log, newline included.
std::string serialize_log_line(const LogEntry& entry);

/// Parses newline-delimited entries. A line that is not a valid entry
/// raises ReplayError naming the sequence number expected at that line.
std::vector<LogEntry> parse_log(std::string_view ndjson);
/// Throws NotFound when the file cannot be opened.
std::vector<LogEntry> read_log_file(const std::filesystem::path& path);

/// Append-only log with gapless sequence numbers. When a path is given,
/// each entry is written and flushed as it is appended.
class EventLog {
 public:
  EventLog() = default;
  explicit EventLog(std::filesystem::path file);
  /// Adopts already-persisted entries (used when reloading a data dir).
  EventLog(std::filesystem::path file, std::vector<LogEntry> existing);

  const LogEntry& append(LogKind kind, Json payload, Timestamp timestamp);
  const std::vector<LogEntry>& entries() const noexcept { return entries_; }
  const std::filesystem::path& file() const noexcept { return file_; }

 private:
  std::filesystem::path file_;
  std::ofstream out_;
  std::vector<LogEntry> entries_;
};

}  // namespace mitrainer
