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
#include <condition_variable>
#include <filesystem>
#include <initializer_list>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "mitrainer/mock_backend.hpp"
#include "mitrainer/session_engine.hpp"

namespace mitrainer::fixtures {

/// Counselor/patient entry pairs; each pair's counselor entry carries the
/// given codes. Snapshots default to 5s.
inline std::vector<TranscriptEntry> coded_transcript(const std::vector<std::vector<BehaviorCode>>& turns) {
  std::vector<TranscriptEntry> out;
  for (const auto& codes : turns) {
    TranscriptEntry c;
    c.turn_index = static_cast<int>(out.size());
    c.speaker = Speaker::counselor;
    c.text = "counselor line " + std::to_string(c.turn_index);
    UtteranceAnnotation a;
    for (const auto code : codes) a.codes.push_back({code, "because"});
    c.annotation = a;
    out.push_back(c);
    TranscriptEntry p;
    p.turn_index = static_cast<int>(out.size());
    p.speaker = Speaker::patient;
    p.text = "patient line " + std::to_string(p.turn_index);
    p.cognitive_snapshot = CognitiveState(5, 5, 5, 5);
    out.push_back(p);
  }
  return out;
}

inline EngineConfig memory_config(std::uint64_t seed = 7) {
  EngineConfig c;
  c.seed = seed;
  return c;
}

inline std::shared_ptr<Clock> fixed_clock() { return std::make_shared<SteppingClock>(Timestamp{}); }

/// A fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mitrainer-" + tag + "-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

 private:
  std::filesystem::path path_;
};

/// Mock backend whose patient replies block until release() is called.
class GatedBackend : public CompletionBackend {
 public:
  BackendReply complete(const AgentTask& task, int attempt) override {
    if (task.kind == AgentKind::patient_response) {
      std::unique_lock lock(mutex_);
      entered_ = true;
      cv_.notify_all();
      cv_.wait(lock, [this] { return released_; });
    }
    return inner_.complete(task, attempt);
  }
  std::string_view name() const noexcept override { return "gated"; }

  void wait_entered() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [this] { return entered_; });
  }
  void release() {
    std::lock_guard lock(mutex_);
    released_ = true;
    cv_.notify_all();
  }

 private:
  MockBackend inner_;
  std::mutex mutex_;
  std::condition_variable cv_;
  bool entered_ = false;
  bool released_ = false;
};

/// Counts backend calls per agent kind.
class CountingBackend : public CompletionBackend {
 public:
  explicit CountingBackend(MockScript script = {}) : inner_(0, std::move(script)) {}

  BackendReply complete(const AgentTask& task, int attempt) override {
    {
      std::lock_guard lock(mutex_);
      ++calls_[static_cast<std::size_t>(task.kind)];
    }
    return inner_.complete(task, attempt);
  }
  std::string_view name() const noexcept override { return "counting"; }

  int calls(AgentKind kind) const {
    std::lock_guard lock(mutex_);
    return calls_[static_cast<std::size_t>(kind)];
  }

 private:
  MockBackend inner_;
  mutable std::mutex mutex_;
  std::array<int, 6> calls_{};
};

inline const std::vector<std::string>& five_turn_script() {
  static const std::vector<std::string> lines{
      "Hi, I'm glad you came in. What brings you here today?",
      "It sounds like drinking after work has started to feel like the only way to unwind.",
      "That takes courage to talk about. I appreciate you being honest with me.",
      "What do you think would be a first step, if you decided to make a change? It's your choice.",
      "So you want to cut back on weeknights and see how that feels.",
  };
  return lines;
}

}  // namespace mitrainer::fixtures
