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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mitrainer/domain.hpp"

namespace mitrainer {

/// Ordered, immutable set of personas with distinct ids.
class PersonaCatalog {
 public:
  explicit PersonaCatalog(std::vector<PersonaProfile> personas);

  /// Parses a JSON array of persona records. Throws InvalidArgument.
  static PersonaCatalog parse(std::string_view document);
  static PersonaCatalog load_file(const std::filesystem::path& path);
  /// The shipped 11-persona catalog (data/personas.json, compiled in).
  static const PersonaCatalog& builtin();

  std::span<const PersonaProfile> personas() const noexcept { return personas_; }
  std::size_t size() const noexcept { return personas_.size(); }

  const PersonaProfile* find(std::string_view persona_id) const noexcept;
  /// Throws NotFound.
  const PersonaProfile& at(std::string_view persona_id) const;

 private:
  std::vector<PersonaProfile> personas_;
};

/// Static explanatory text for the dashboard's MI description module.
std::string_view builtin_mi_description() noexcept;

}  // namespace mitrainer
