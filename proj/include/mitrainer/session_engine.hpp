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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mitrainer/agents.hpp"
#include "mitrainer/event_log.hpp"
#include "mitrainer/persona_catalog.hpp"
#include "mitrainer/report.hpp"

namespace mitrainer {

class Clock {
 public:
  virtual ~Clock() = default;
  virtual Timestamp now() = 0;
};

class SystemClock : public Clock {
 public:
  Timestamp now() override;
};

/// Starts at `start` and advances by `step` on every read.
class SteppingClock : public Clock {
 public:
  explicit SteppingClock(Timestamp start, std::chrono::milliseconds step = std::chrono::milliseconds{1000});
  Timestamp now() override;

 private:
  std::mutex mutex_;
  Timestamp next_;
  std::chrono::milliseconds step_;
};

struct EngineConfig {
  /// Empty: keep everything in memory.
  std::filesystem::path data_dir;
  int max_sessions = 3;
  FactorRange initial_range{2, 8};
  ThresholdConfig thresholds;
  std::string mi_description = std::string(builtin_mi_description());
  /// Drives block randomization and seeds for sessions created without one.
  std::uint64_t seed = 0;
  double temperature = 1.0;
  int max_attempts = 3;

  /// Throws InvalidConfiguration.
  void validate() const;
};

/// Persona assignment by blocks: each block is a seeded shuffle of the
/// whole catalog, and consecutive participants take consecutive slots.
class BlockRandomizer {
 public:
  BlockRandomizer(std::vector<std::string> persona_ids, std::uint64_t seed);

  std::string next();
  /// Assignments made within the current block, per persona.
  std::map<std::string, int> block_counts() const;
  std::uint64_t assigned() const noexcept { return assigned_; }

 private:
  void refill();

  std::vector<std::string> ids_;
  std::uint64_t seed_;
  std::vector<std::string> block_;
  std::size_t position_ = 0;
  std::uint64_t block_index_ = 0;
  std::uint64_t assigned_ = 0;
};

struct ParticipantAssignment {
  std::string participant_id;
  std::string persona_id;
  int sessions_created = 0;
  int sessions_completed = 0;
  std::map<std::string, int> block_state;
};

struct TurnResult {
  std::string reply;
  std::vector<NonverbalCue> cues;
  int turn_index = 0;  // of the patient entry
};

struct EndResult {
  std::string report_id;
  std::vector<std::string> errors;
  std::vector<DashboardModule> unavailable_modules;
};

/// Raised when a turn aborts because the patient agent failed. The
/// counselor text is kept in SessionRecord::failed_turns.
class TurnFailed : public Error {
 public:
  TurnFailed(ErrorCode code, const std::string& message) : Error(code, message) {}
};

struct ReplayResult {
  SessionRecord record;
  std::optional<DashboardReport> report;
  std::vector<SessionStatus> status_history;
};

/// Rebuilds a session (and its report, if one was built) from its log
/// alone. Throws ReplayError naming the offending sequence number.
ReplayResult replay(std::span<const LogEntry> log);

/// Session state machine and per-turn agent pipeline.
///
/// Thread-safe. Different sessions proceed concurrently; within a session
/// at most one turn (or end) runs at a time and a second caller gets
/// Conflict. Agent calls run without holding any lock.
class SessionEngine {
 public:
  SessionEngine(EngineConfig config, PersonaCatalog catalog, std::shared_ptr<CompletionBackend> backend,
                std::shared_ptr<Clock> clock = std::make_shared<SystemClock>());
  ~SessionEngine();

  SessionEngine(const SessionEngine&) = delete;
  SessionEngine& operator=(const SessionEngine&) = delete;

  /// Throws Conflict at the session cap, NotFound for an unknown override,
  /// InvalidArgument for a bad id or an override that contradicts the
  /// participant's persona, InvalidState while the previous session is
  /// still open.
  SessionRecord create_session(const std::string& participant_id,
                               std::optional<std::uint64_t> seed = std::nullopt,
                               std::optional<std::string> persona_override = std::nullopt);

  /// Throws Conflict while another turn is in flight, InvalidState unless
  /// in_progress, InvalidArgument for empty text, TurnFailed when the
  /// patient agent fails.
  TurnResult submit_utterance(const std::string& session_id, const std::string& text);

  /// Throws InvalidState unless in_progress, InvalidArgument when no
  /// exchange has completed. Agent failures mark report modules unavailable.
  EndResult end_session(const std::string& session_id);

  SessionRecord session(const std::string& session_id) const;
  std::vector<SessionRecord> sessions_for(const std::string& participant_id) const;
  /// Throws InvalidState unless the session is reported.
  DashboardReport report(const std::string& session_id) const;
  std::vector<LogEntry> log(const std::string& session_id) const;
  std::vector<SessionStatus> status_history(const std::string& session_id) const;
  std::optional<ParticipantAssignment> participant(const std::string& participant_id) const;

  /// Reloads every session directory under data_dir. Returns the count.
  std::size_t load_existing();

  const EngineConfig& config() const noexcept { return config_; }
  const PersonaCatalog& catalog() const noexcept { return catalog_; }

 private:
  struct Slot;
  struct Participant;

  std::shared_ptr<Slot> slot(const std::string& session_id) const;
  AgentRuntime runtime(ExchangeSink sink) const;
  Timestamp now(Slot& s) const;
  void transition(Slot& s, SessionStatus to) const;

  EngineConfig config_;
  PersonaCatalog catalog_;
  std::shared_ptr<CompletionBackend> backend_;
  std::shared_ptr<Clock> clock_;

  mutable std::mutex mutex_;
  BlockRandomizer randomizer_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::map<std::string, Participant> participants_;
};

}  // namespace mitrainer
