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

#include "mitrainer/mock_backend.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>

#include "mitrainer/agents.hpp"
#include "mitrainer/report.hpp"
#include "mitrainer/rng.hpp"

namespace mitrainer {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string excerpt(std::string_view s) {
  s = trim(s);
  if (s.size() <= 80) return std::string(s);
  return std::string(s.substr(0, 77)) + "...";
}

struct KeywordRule {
  BehaviorCode code;
  std::vector<std::string_view> phrases;
};

const std::vector<KeywordRule>& keyword_rules() {
  static const std::vector<KeywordRule> rules{
      {BehaviorCode::giving_information,
       {"research shows", "studies show", "on average", "the guideline", "standard drink",
        "recommended limit", "drinks per"}},
      {BehaviorCode::persuading,
       {"you should", "you need to", "you must", "you have to", "you ought to"}},
      {BehaviorCode::persuading_with_permission,
       {"would it be okay if", "would it be ok if", "may i share", "can i share",
        "if it's okay with you", "with your permission"}},
      {BehaviorCode::simple_reflection,
       {"so you", "you said", "you're saying", "what i'm hearing", "you mentioned"}},
      {BehaviorCode::complex_reflection,
       {"it sounds like", "sounds like you", "part of you", "you're feeling", "you feel"}},
      {BehaviorCode::affirmation,
       {"great job", "well done", "that takes courage", "takes a lot of courage", "i appreciate",
        "you've worked hard", "impressive", "proud of you", "good for you", "a real strength"}},
      {BehaviorCode::seeking_collaboration,
       {"together", "what do you think", "how would you like", "let's", "what would you like to"}},
      {BehaviorCode::emphasizing_autonomy,
       {"your choice", "up to you", "your decision", "you decide", "you're the expert",
        "it's your call"}},
      {BehaviorCode::confront,
       {"in denial", "that's not true", "you're an alcoholic", "you are an alcoholic", "admit it",
        "you're wrong", "your fault", "making excuses"}},
  };
  return rules;
}

std::optional<std::string_view> first_match(const std::string& text, const KeywordRule& rule) {
  for (const auto phrase : rule.phrases) {
    if (text.find(phrase) != std::string::npos) return phrase;
  }
  return std::nullopt;
}

bool has_code(std::span<const CodedBehavior> codes, BehaviorCode code) {
  return std::any_of(codes.begin(), codes.end(), [code](const auto& c) { return c.code == code; });
}

std::string block_text(const AgentTask& task, std::string_view label) {
  const auto* b = task.find_block(label);
  return b ? b->text : std::string{};
}

int patient_turns_in(std::string_view transcript) {
  int n = 0;
  std::size_t pos = 0;
  while ((pos = transcript.find("] Patient: ", pos)) != std::string_view::npos) {
    ++n;
    pos += 11;
  }
  return n;
}

std::string first_counselor_line(std::string_view transcript) {
  const auto pos = transcript.find("] Counselor: ");
  if (pos == std::string_view::npos) return {};
  auto rest = transcript.substr(pos + 13);
  return excerpt(rest.substr(0, rest.find('\n')));
}

std::string first_name(const PersonaProfile& p) {
  return p.display_name.substr(0, p.display_name.find(' '));
}

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& options, std::uint64_t seed,
                      std::string_view label, std::uint64_t counter) {
  return options[derive_seed(seed, label, counter) % N];
}

// -- patient ---------------------------------------------------------------

std::string_view occupation_detail(Occupation o) {
  switch (o) {
    case Occupation::student: return "It's hard to focus on my classes when I'm hungover.";
    case Occupation::cashier: return "Standing at the register all day, I keep thinking about the drink I'll have after.";
    case Occupation::nurse: return "It's hard to admit this when I look after patients at the hospital all day.";
    case Occupation::cook_chef: return "In the kitchen there's always a bottle open once the tickets stop.";
    case Occupation::retail_salesperson: return "On the sales floor I keep smiling, but I'm counting the hours until I can drink.";
  }
  return "";
}

std::string patient_reply_text(const AgentTask& task, std::uint64_t seed, std::vector<NonverbalCue>& cues) {
  const auto persona = Json::parse(block_text(task, block::persona)).get<PersonaProfile>();
  const auto state = Json::parse(block_text(task, block::cognitive_state)).get<CognitiveState>();
  const std::string latest = block_text(task, block::latest_utterance);
  const int turn = patient_turns_in(block_text(task, block::current_transcript));
  const auto codes = mock_code_utterance(latest);
  const std::string key = persona.persona_id;
  const int self_efficacy = state.value(FactorKind::self_efficacy);

  std::string reply;
  if (turn == 0) {
    if (const auto* event_block = task.find_block(block::between_session_event)) {
      const auto event = Json::parse(event_block->text).get<BetweenSessionEvent>();
      reply += "Before we start, there's something I should tell you. ";
      reply += event.narrative;
      reply += " ";
    }
    reply += "I'm " + first_name(persona) + ". ";
    reply += mock_occupation_phrase(persona.occupation);
    reply += " ";
    reply += mock_gender_phrase(persona.gender);
  } else if (has_code(codes, BehaviorCode::confront)) {
    reply = pick(std::array<std::string_view, 3>{
                     "That's not fair. You don't know what my life is like.",
                     "I didn't come here to be judged.",
                     "Wow. Okay. Maybe this was a mistake."},
                 seed, key + "/confront", static_cast<std::uint64_t>(turn));
  } else if (has_code(codes, BehaviorCode::persuading)) {
    reply = pick(std::array<std::string_view, 2>{
                     "Everyone keeps telling me what to do. I'm not sure that helps.",
                     "I know, I know. It's easier said than done."},
                 seed, key + "/persuade", static_cast<std::uint64_t>(turn));
  } else if (has_code(codes, BehaviorCode::affirmation)) {
    reply = pick(std::array<std::string_view, 2>{
                     "Thanks. It's nice to hear I'm doing something right.",
                     "I don't hear that very often. It means something."},
                 seed, key + "/affirm", static_cast<std::uint64_t>(turn));
  } else if (has_code(codes, BehaviorCode::complex_reflection) ||
             has_code(codes, BehaviorCode::simple_reflection)) {
    reply = "Yeah, that's it exactly. ";
    reply += self_efficacy <= 3 ? "I just don't know if I can change it."
                                : "Hearing it out loud makes me think about it differently.";
  } else if (self_efficacy <= 3) {
    reply = pick(std::array<std::string_view, 2>{
                     "Honestly, I don't know if I can cut back. Every time I try, I end up drinking again.",
                     "I've tried before. It never lasts."},
                 seed, key + "/low", static_cast<std::uint64_t>(turn));
  } else if (self_efficacy >= 7) {
    reply = pick(std::array<std::string_view, 2>{
                     "I think I could cut back if I had a plan.",
                     "I've been thinking I could start with weeknights."},
                 seed, key + "/high", static_cast<std::uint64_t>(turn));
  } else {
    reply = pick(std::array<std::string_view, 2>{
                     "Some days I think I could cut down, other days it feels impossible.",
                     "I'm not sure. Part of me wants to stop and part of me really doesn't."},
                 seed, key + "/mid", static_cast<std::uint64_t>(turn));
  }
  if (turn == 2) {
    reply += " ";
    reply += occupation_detail(persona.occupation);
  }

  auto add = [&cues](NonverbalCue c) {
    if (cues.size() < kMaxCuesPerReply && std::find(cues.begin(), cues.end(), c) == cues.end()) {
      cues.push_back(c);
    }
  };
  if (has_code(codes, BehaviorCode::confront) || has_code(codes, BehaviorCode::persuading)) {
    add(NonverbalCue::crossed_arms);
    add(NonverbalCue::head_shake);
  }
  if (has_code(codes, BehaviorCode::affirmation)) {
    add(NonverbalCue::eye_contact);
    add(NonverbalCue::open_hands);
  }
  if (has_code(codes, BehaviorCode::complex_reflection) || has_code(codes, BehaviorCode::simple_reflection)) {
    add(NonverbalCue::nod);
  }
  if (self_efficacy <= 3) add(NonverbalCue::gaze_aversion);
  if (state.value(FactorKind::reward) >= 8) add(NonverbalCue::fidget);
  if (cues.empty()) add(NonverbalCue::sigh);
  return reply;
}

std::string patient_reply(const AgentTask& task, std::uint64_t seed) {
  std::vector<NonverbalCue> cues;
  const std::string reply = patient_reply_text(task, seed, cues);
  Json doc = Json::object();
  doc["reply"] = reply;
  Json cue_list = Json::array();
  for (const auto c : cues) cue_list.push_back(enum_json(c));
  doc["cues"] = std::move(cue_list);
  return doc.dump();
}

// -- analysis agents -------------------------------------------------------

std::string coding_reply(const AgentTask& task) {
  UtteranceAnnotation a;
  a.codes = mock_code_utterance(block_text(task, block::latest_utterance));
  return Json{{"codes", Json(a)}}.dump();
}

std::string cognitive_reply(const AgentTask& task) {
  const auto prev = Json::parse(block_text(task, block::cognitive_state)).get<CognitiveState>();
  const auto codes = mock_code_utterance(block_text(task, block::latest_utterance));
  const auto deltas = mock_factor_deltas(codes);
  CognitiveState next = prev;
  for (const auto& [kind, delta] : deltas) {
    std::string because;
    for (const auto& c : codes) {
      if (mock_factor_deltas(std::span(&c, 1)).count(kind)) {
        because = std::string(enum_name(c.code));
        break;
      }
    }
    next.set(kind, static_cast<long long>(prev.value(kind)) + delta,
             "Mock rule: " + because + " in the counselor's utterance moves " +
                 std::string(enum_name(kind)) + (delta > 0 ? " up by 1." : " down by 1."));
  }
  return Json(next).dump();
}

std::string global_reply(const AgentTask& task) {
  const std::string opening = first_counselor_line(block_text(task, block::current_transcript));
  GlobalScores g;
  g.partnership = {4, "Mock rating from the fixed score table. The counselor opened with \"" + opening +
                          "\" and invited the patient's perspective."};
  g.empathy = {4, "Mock rating from the fixed score table. The counselor acknowledged the patient's "
                  "feelings after \"" + opening + "\"."};
  g.cultivating_change_talk = {3, "Mock rating from the fixed score table. Change talk was explored "
                                  "occasionally but not consistently reinforced."};
  g.softening_sustain_talk = {3, "Mock rating from the fixed score table. The counselor at times "
                                 "lingered on reasons to keep drinking."};
  return global_scores_json(g).dump();
}

std::string summary_reply(const AgentTask& task) {
  const auto scores = global_scores_from_json(Json::parse(block_text(task, block::global_scores)));
  const Json metrics = Json::parse(block_text(task, block::session_metrics));
  GlobalDimension best = GlobalDimension::partnership;
  GlobalDimension worst = GlobalDimension::partnership;
  for (const auto d : enum_values<GlobalDimension>()) {
    if (scores.get(d).score > scores.get(best).score) best = d;
    if (scores.get(d).score < scores.get(worst).score) worst = d;
  }
  auto label = [](GlobalDimension d) {
    std::string s(enum_name(d));
    std::replace(s.begin(), s.end(), '_', ' ');
    return s;
  };
  const int affirmations =
      metrics.at("behavior_frequency").at("counts").at("affirmation").get<int>();
  std::string out = "Strength: your " + label(best) + " rating of " +
                    std::to_string(scores.get(best).score) +
                    " out of 5 shows a solid foundation to build on. Area for improvement: " +
                    label(worst) + " scored " + std::to_string(scores.get(worst).score) +
                    " out of 5, so focus there in the next session.";
  if (affirmations == 0) {
    out += " ";
    out += kAffirmationRecommendation;
  }
  for (const auto& c : metrics.at("competencies")) {
    if (c.at("metric") == "reflection_question_ratio" && c.at("band") != "good") {
      out += " Recommendation: offer more reflections for each question you ask.";
    }
  }
  return Json{{"summary", out}}.dump();
}

std::string event_reply(const AgentTask& task) {
  const auto persona = Json::parse(block_text(task, block::persona)).get<PersonaProfile>();
  const auto state = Json::parse(block_text(task, block::cognitive_state)).get<CognitiveState>();
  const std::string name = first_name(persona);
  const int se = state.value(FactorKind::self_efficacy);
  BetweenSessionEvent e;
  if (se <= 3) {
    e.valence = EventValence::setback;
    e.narrative = "At a friend's birthday party, " + name +
                  " gave in to the pressure and drank heavily, then spent the next day hungover and ashamed.";
    e.factor_deltas = {{FactorKind::self_efficacy, -2}, {FactorKind::control, -1}};
  } else if (se >= 7) {
    e.valence = EventValence::progress;
    e.narrative = "During a stressful weekend, " + name +
                  " called a friend instead of opening a bottle and made it through without drinking.";
    e.factor_deltas = {{FactorKind::self_efficacy, 2}, {FactorKind::control, 1}};
  } else {
    e.valence = EventValence::mixed;
    e.narrative = name + " cut back on weeknights but drank more than planned at a family gathering.";
    e.factor_deltas = {{FactorKind::awareness, 1}, {FactorKind::self_efficacy, -1}};
  }
  Json doc = Json::object();
  doc["narrative"] = e.narrative;
  doc["valence"] = enum_json(e.valence);
  doc["factor_deltas"] = factor_deltas_json(e.factor_deltas);
  return doc.dump();
}

}  // namespace

std::vector<CodedBehavior> mock_code_utterance(std::string_view utterance) {
  const std::string text = lower(trim(utterance));
  std::vector<CodedBehavior> out;
  if (text.empty()) return out;
  const bool is_question = text.back() == '?';

  std::array<std::optional<std::string>, 10> reasons{};
  if (is_question) reasons[static_cast<std::size_t>(BehaviorCode::question)] = "ends with '?'";
  for (const auto& rule : keyword_rules()) {
    const auto phrase = first_match(text, rule);
    if (!phrase) continue;
    reasons[static_cast<std::size_t>(rule.code)] = "contains '" + std::string(*phrase) + "'";
  }
  auto& persuading = reasons[static_cast<std::size_t>(BehaviorCode::persuading)];
  auto& with_permission = reasons[static_cast<std::size_t>(BehaviorCode::persuading_with_permission)];
  auto& simple = reasons[static_cast<std::size_t>(BehaviorCode::simple_reflection)];
  auto& complex = reasons[static_cast<std::size_t>(BehaviorCode::complex_reflection)];
  if (with_permission) persuading.reset();
  // Reflections are statements, and a complex reflection subsumes a simple one.
  if (is_question) {
    simple.reset();
    complex.reset();
  }
  if (complex) simple.reset();

  for (const auto code : enum_values<BehaviorCode>()) {
    const auto& reason = reasons[static_cast<std::size_t>(code)];
    if (!reason) continue;
    out.push_back({code, "Mock rule: utterance " + *reason + " -> " + std::string(enum_name(code)) +
                             " (\"" + excerpt(utterance) + "\")."});
  }
  return out;
}

FactorDeltas mock_factor_deltas(std::span<const CodedBehavior> codes) {
  FactorDeltas sum;
  auto add = [&sum](FactorKind k, int d) { sum[k] += d; };
  for (const auto& c : codes) {
    switch (c.code) {
      case BehaviorCode::affirmation: add(FactorKind::self_efficacy, 1); break;
      case BehaviorCode::emphasizing_autonomy:
      case BehaviorCode::seeking_collaboration: add(FactorKind::control, 1); break;
      case BehaviorCode::simple_reflection:
      case BehaviorCode::persuading_with_permission: add(FactorKind::awareness, 1); break;
      case BehaviorCode::complex_reflection:
        add(FactorKind::awareness, 1);
        add(FactorKind::reward, -1);
        break;
      case BehaviorCode::persuading: add(FactorKind::control, -1); break;
      case BehaviorCode::confront:
        add(FactorKind::self_efficacy, -1);
        add(FactorKind::control, -1);
        break;
      default: break;
    }
  }
  FactorDeltas out;
  for (const auto& [k, d] : sum) {
    if (d != 0) out[k] = std::clamp(d, -1, 1);
  }
  return out;
}

std::string_view mock_occupation_phrase(Occupation o) noexcept {
  switch (o) {
    case Occupation::student: return "Between my classes and exams, I've been drinking more than I'd like.";
    case Occupation::cashier: return "After long shifts at the register, I usually end up having a few drinks.";
    case Occupation::nurse: return "After my shifts at the hospital I pour a drink to wind down, and lately it's more than one.";
    case Occupation::cook_chef: return "Working in a kitchen, everyone drinks after service, and I'm right there with them.";
    case Occupation::retail_salesperson: return "Being on the sales floor all day wears me out, so I drink at night.";
  }
  return "";
}

std::string_view mock_gender_phrase(Gender g) noexcept {
  switch (g) {
    case Gender::male: return "As a guy, I was raised to just handle things on my own.";
    case Gender::female: return "As a woman in my position, people expect me to have it all together.";
    case Gender::nonbinary_third_gender: return "As a nonbinary person, I don't always feel like people get me.";
  }
  return "";
}

MockBackend::MockBackend(std::uint64_t seed, MockScript script) : seed_(seed), script_(std::move(script)) {}

std::string MockBackend::rule_reply(const AgentTask& task) const {
  switch (task.kind) {
    case AgentKind::patient_response: return patient_reply(task, seed_);
    case AgentKind::behavior_coding: return coding_reply(task);
    case AgentKind::cognitive_model: return cognitive_reply(task);
    case AgentKind::global_scoring: return global_reply(task);
    case AgentKind::session_summary: return summary_reply(task);
    case AgentKind::between_session_event: return event_reply(task);
  }
  return "{}";
}

BackendReply MockBackend::complete(const AgentTask& task, int attempt) {
  for (const auto& rule : script_.rules) {
    if (rule.kind != task.kind) continue;
    if (rule.attempt != 0 && rule.attempt != attempt) continue;
    if (!rule.when_contains.empty()) {
      const auto* b = rule.match_block.empty() ? nullptr : task.find_block(rule.match_block);
      const std::string haystack = b ? b->text : render_context(task);
      if (haystack.find(rule.when_contains) == std::string::npos) continue;
    }
    if (rule.transport_failure) throw BackendUnavailable("scripted transport failure");
    return {rule.reply, Json{{"backend", "mock"}, {"scripted", true}}};
  }
  return {rule_reply(task), Json{{"backend", "mock"}, {"scripted", false}}};
}

}  // namespace mitrainer
