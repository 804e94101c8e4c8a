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
#include <stdexcept>
#include <string>
#include <string_view>

namespace mitrainer {

/// Error categories shared by the engine and the HTTP facade. Each maps to
/// exactly one HTTP status (see http_status()).
enum class ErrorCode {
  not_found,
  conflict,
  invalid_state,
  invalid_argument,
  backend_unavailable,
  agent_failure,
  internal,
};

std::string_view to_string(ErrorCode code) noexcept;
int http_status(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& message)
      : Error(ErrorCode::invalid_argument, message) {}
};

/// Bad configuration values (ranges, thresholds, paths).
class InvalidConfiguration : public Error {
 public:
  explicit InvalidConfiguration(const std::string& message)
      : Error(ErrorCode::invalid_argument, "invalid configuration: " + message) {}
};

class NotFound : public Error {
 public:
  explicit NotFound(const std::string& message) : Error(ErrorCode::not_found, message) {}
};

/// Another turn is in flight, or a participant hit the session cap.
class Conflict : public Error {
 public:
  explicit Conflict(const std::string& message) : Error(ErrorCode::conflict, message) {}
};

class InvalidState : public Error {
 public:
  explicit InvalidState(const std::string& message) : Error(ErrorCode::invalid_state, message) {}
};

class BackendUnavailable : public Error {
 public:
  explicit BackendUnavailable(const std::string& message)
      : Error(ErrorCode::backend_unavailable, "backend unavailable: " + message) {}
};

class IncompleteReport : public Error {
 public:
  explicit IncompleteReport(const std::string& gap)
      : Error(ErrorCode::internal, "incomplete report: missing " + gap), gap_(gap) {}

  const std::string& gap() const noexcept { return gap_; }

 private:
  std::string gap_;
};

class ReplayError : public Error {
 public:
  ReplayError(std::int64_t sequence, const std::string& message)
      : Error(ErrorCode::invalid_argument,
              "replay error at sequence " + std::to_string(sequence) + ": " + message),
        sequence_(sequence) {}

  std::int64_t sequence() const noexcept { return sequence_; }

 private:
  std::int64_t sequence_;
};

}  // namespace mitrainer
