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

#include "mitrainer/persona_catalog.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "mitrainer/errors.hpp"
#include "mitrainer/json_io.hpp"

namespace mitrainer {

namespace embedded {
// Generated at configure time from data/.
extern const char* const kPersonaCatalogJson;
extern const char* const kMiDescription;
}  // namespace embedded

PersonaCatalog::PersonaCatalog(std::vector<PersonaProfile> personas) : personas_(std::move(personas)) {
  if (personas_.empty()) throw InvalidArgument("persona catalog is empty");
  std::set<std::string, std::less<>> ids;
  for (const auto& p : personas_) {
    p.validate();
    if (!ids.insert(p.persona_id).second) throw InvalidArgument("duplicate persona_id " + p.persona_id);
  }
}

PersonaCatalog PersonaCatalog::parse(std::string_view document) {
  Json j;
  try {
    j = Json::parse(document);
  } catch (const Json::parse_error& e) {
    throw InvalidArgument(std::string("persona catalog is not valid JSON: ") + e.what());
  }
  if (!j.is_array()) throw InvalidArgument("persona catalog must be an array");
  std::vector<PersonaProfile> personas;
  personas.reserve(j.size());
  for (const auto& item : j) personas.push_back(item.get<PersonaProfile>());
  return PersonaCatalog(std::move(personas));
}

PersonaCatalog PersonaCatalog::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw NotFound("cannot open persona catalog " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const PersonaCatalog& PersonaCatalog::builtin() {
  static const PersonaCatalog catalog = parse(embedded::kPersonaCatalogJson);
  return catalog;
}

const PersonaProfile* PersonaCatalog::find(std::string_view persona_id) const noexcept {
  for (const auto& p : personas_) {
    if (p.persona_id == persona_id) return &p;
  }
  return nullptr;
}

const PersonaProfile& PersonaCatalog::at(std::string_view persona_id) const {
  if (const auto* p = find(persona_id)) return *p;
  throw NotFound("unknown persona '" + std::string(persona_id) + "'");
}

std::string_view builtin_mi_description() noexcept { return embedded::kMiDescription; }

}  // namespace mitrainer
