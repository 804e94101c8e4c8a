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

#include "mitrainer/fidelity.hpp"

#include <iomanip>
#include <memory>
#include <sstream>

#include "mitrainer/mock_backend.hpp"
#include "mitrainer/session_engine.hpp"
#include "mitrainer/stats.hpp"

namespace mitrainer {

std::size_t option_count(PersonaAttribute attribute) noexcept {
  switch (attribute) {
    case PersonaAttribute::gender: return enum_count<Gender>();
    case PersonaAttribute::age: return kPersonaAges.size();
    case PersonaAttribute::ethnicity: return enum_count<Ethnicity>();
    case PersonaAttribute::occupation: return enum_count<Occupation>();
    case PersonaAttribute::personality: return enum_count<Mbti>();
  }
  return 1;
}

double FidelityTrial::accuracy() const noexcept {
  return n_trials == 0 ? 0.0 : static_cast<double>(n_correct) / n_trials;
}

double FidelityTrial::p_value() const {
  if (n_trials <= 0) throw InvalidArgument("fidelity trial has no trials");
  return exact_binomial_upper(n_trials, n_correct, chance_p);
}

namespace {

std::string patient_text(const SessionRecord& s) {
  std::string all;
  for (const auto& e : s.transcript) {
    if (e.speaker == Speaker::patient) all += e.text + "\n";
  }
  return all;
}

template <typename E>
E next_value(E v) {
  const auto n = enum_count<E>();
  return static_cast<E>((static_cast<std::size_t>(v) + 1) % n);
}

}  // namespace

AttributeGuesses keyword_guess(const SessionRecord& session, const PersonaCatalog&) {
  const std::string text = patient_text(session);
  AttributeGuesses g;
  const auto has = [&text](std::string_view needle) { return text.find(needle) != std::string::npos; };

  if (has("As a guy")) {
    g.gender = Gender::male;
  } else if (has("As a nonbinary person")) {
    g.gender = Gender::nonbinary_third_gender;
  } else {
    g.gender = Gender::female;
  }

  if (has("classes")) {
    g.occupation = Occupation::student;
  } else if (has("register")) {
    g.occupation = Occupation::cashier;
  } else if (has("hospital")) {
    g.occupation = Occupation::nurse;
  } else if (has("kitchen")) {
    g.occupation = Occupation::cook_chef;
  } else if (has("sales floor")) {
    g.occupation = Occupation::retail_salesperson;
  }
  return g;
}

AttributeGuesses perfect_guess(const SessionRecord& session, const PersonaCatalog& catalog) {
  const auto& p = catalog.at(session.persona_id);
  return AttributeGuesses{p.gender, p.age_years, p.ethnicity, p.occupation, p.mbti};
}

AttributeGuesses wrong_guess(const SessionRecord& session, const PersonaCatalog& catalog) {
  const auto& p = catalog.at(session.persona_id);
  AttributeGuesses g;
  g.gender = next_value(p.gender);
  g.ethnicity = next_value(p.ethnicity);
  g.occupation = next_value(p.occupation);
  g.mbti = next_value(p.mbti);
  g.age_years = p.age_years == kPersonaAges.back() ? kPersonaAges.front() : p.age_years + 10;
  return g;
}

std::vector<std::string> default_probe_script() {
  return {
      "Hi, thanks for coming in today. What brings you here?",
      "It sounds like drinking has been taking up more of your evenings than you'd like.",
      "What would you like things to look like a few months from now?",
  };
}

FidelityReport fidelity_probe(const PersonaCatalog& catalog, const FidelityProbeConfig& config,
                              const Guesser& guesser) {
  if (config.sessions_per_persona < 1) throw InvalidArgument("sessions_per_persona must be at least 1");
  if (config.script.empty()) throw InvalidArgument("probe script is empty");
  if (!guesser) throw InvalidArgument("probe needs a guesser");

  std::vector<std::string> ids = config.persona_ids;
  if (ids.empty()) {
    for (const auto& p : catalog.personas()) ids.push_back(p.persona_id);
  }

  EngineConfig ec;
  ec.max_sessions = config.sessions_per_persona;
  ec.seed = config.seed;
  SessionEngine engine(ec, catalog, std::make_shared<MockBackend>(config.seed),
                       std::make_shared<SteppingClock>(Timestamp{}));

  FidelityReport report;
  for (std::size_t a = 0; a < report.trials.size(); ++a) {
    auto& t = report.trials[a];
    t.attribute = static_cast<PersonaAttribute>(a);
    t.chance_p = 1.0 / static_cast<double>(option_count(t.attribute));
  }

  for (const auto& pid : ids) {
    const auto& truth = catalog.at(pid);
    const std::string participant = "probe-" + pid;
    for (int n = 1; n <= config.sessions_per_persona; ++n) {
      const auto created = engine.create_session(participant, std::nullopt, pid);
      for (const auto& line : config.script) engine.submit_utterance(created.session_id, line);
      engine.end_session(created.session_id);
      const SessionRecord done = engine.session(created.session_id);
      const AttributeGuesses g = guesser(done, catalog);

      const std::array<bool, 5> hit{g.gender == truth.gender, g.age_years == truth.age_years,
                                    g.ethnicity == truth.ethnicity, g.occupation == truth.occupation,
                                    g.mbti == truth.mbti};
      for (std::size_t a = 0; a < hit.size(); ++a) {
        ++report.trials[a].n_trials;
        if (hit[a]) ++report.trials[a].n_correct;
      }
      report.sessions.push_back(done);
    }
  }
  if (report.trials.front().n_trials == 0) throw InvalidArgument("fidelity probe ran no trials");
  return report;
}

Json fidelity_table_json(const FidelityReport& report) {
  Json rows = Json::array();
  for (const auto& t : report.trials) {
    Json r = Json::object();
    r["attribute"] = enum_json(t.attribute);
    r["n"] = t.n_trials;
    r["correct"] = t.n_correct;
    r["accuracy"] = t.accuracy();
    r["chance_p"] = t.chance_p;
    r["p_value"] = t.p_value();
    rows.push_back(std::move(r));
  }
  Json doc = Json::object();
  doc["schema"] = "fidelity_v1";
  doc["rows"] = std::move(rows);
  return doc;
}

std::string fidelity_table_text(const FidelityReport& report) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "attribute" << std::right << std::setw(5) << "n" << std::setw(9) << "correct"
      << std::setw(10) << "accuracy" << std::setw(10) << "chance_p" << std::setw(12) << "p_value" << "\n";
  for (const auto& t : report.trials) {
    out << std::left << std::setw(12) << enum_name(t.attribute) << std::right << std::setw(5) << t.n_trials
        << std::setw(9) << t.n_correct << std::fixed << std::setprecision(3) << std::setw(10) << t.accuracy()
        << std::setw(10) << t.chance_p << std::scientific << std::setprecision(3) << std::setw(12) << t.p_value()
        << std::defaultfloat << "\n";
  }
  return out.str();
}

}  // namespace mitrainer
