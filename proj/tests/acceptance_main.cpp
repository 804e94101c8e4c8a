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

// Acceptance gate: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <future>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include "mitrainer/api.hpp"
#include "mitrainer/stats.hpp"
#include "support.hpp"

using namespace mitrainer;
using BC = BehaviorCode;

namespace {

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void check(bool cond, const std::string& what) {
    if (!cond && ok) detail << what;
    ok = ok && cond;
  }
};

struct Criterion {
  std::string name;
  double limit_seconds;
  std::function<void(Outcome&)> body;
};

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

GlobalScores scores(int p, int e, int c, int s) {
  GlobalScores g;
  g.partnership = {p, "r"};
  g.empathy = {e, "r"};
  g.cultivating_change_talk = {c, "r"};
  g.softening_sustain_talk = {s, "r"};
  return g;
}

std::unique_ptr<SessionEngine> engine_for(std::uint64_t seed, std::shared_ptr<CompletionBackend> backend = nullptr,
                                          int max_sessions = 3) {
  auto config = fixtures::memory_config(seed);
  config.max_sessions = max_sessions;
  if (!backend) backend = std::make_shared<MockBackend>(seed);
  return std::make_unique<SessionEngine>(config, PersonaCatalog::builtin(), backend, fixtures::fixed_clock());
}

// ---------------------------------------------------------------------------

void metric_formulas(Outcome& o) {
  struct Case {
    std::vector<std::vector<BC>> turns;
    GlobalScores g;
    double rel, tech;
    std::optional<double> pct_cr, rq;
  };
  const std::vector<Case> cases{
      {{{BC::question}, {BC::simple_reflection}, {BC::complex_reflection}}, scores(4, 4, 3, 3), 4.0, 3.0, 50.0, 2.0},
      {{{BC::question}, {BC::question}, {BC::simple_reflection}}, scores(3, 4, 2, 3), 3.5, 2.5, 0.0, 0.5},
      {{{BC::complex_reflection}, {BC::complex_reflection}, {BC::simple_reflection}, {BC::question}, {BC::question}},
       scores(5, 5, 5, 5), 5.0, 5.0, 200.0 / 3.0, 1.5},
      {{{BC::question, BC::affirmation}, {BC::persuading}, {BC::confront}}, scores(1, 2, 1, 2), 1.5, 1.5,
       std::nullopt, 0.0},
      {{{}, {}}, scores(3, 3, 3, 3), 3.0, 3.0, std::nullopt, std::nullopt},
      {{{BC::simple_reflection}, {BC::complex_reflection}, {BC::question}}, scores(2, 5, 4, 1), 3.5, 2.5, 50.0, 2.0},
      {{{BC::complex_reflection}, {BC::complex_reflection}, {BC::simple_reflection}, {BC::simple_reflection},
        {BC::simple_reflection}, {BC::question}, {BC::question}, {BC::question}, {BC::question}, {BC::question}},
       scores(4, 3, 4, 3), 3.5, 3.5, 40.0, 1.0},
      {{{BC::complex_reflection}, {BC::simple_reflection}, {BC::simple_reflection}, {BC::question}, {BC::question}},
       scores(2, 2, 2, 2), 2.0, 2.0, 100.0 / 3.0, 1.5},
      {{{BC::seeking_collaboration, BC::emphasizing_autonomy}, {BC::affirmation}, {BC::giving_information}},
       scores(5, 4, 3, 2), 4.5, 2.5, std::nullopt, std::nullopt},
      {{{BC::question, BC::complex_reflection}, {BC::question}, {BC::question}}, scores(1, 1, 5, 5), 1.0, 5.0,
       100.0, 1.0 / 3.0},
  };
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const auto& c = cases[i];
    const auto freq = count_behaviors(fixtures::coded_transcript(c.turns));
    const std::string tag = "case " + std::to_string(i) + ": ";
    o.check(relational_score(c.g) == c.rel, tag + "relational");
    o.check(technical_score(c.g) == c.tech, tag + "technical");
    const auto pct = pct_complex_reflections(freq);
    o.check(pct.has_value() == c.pct_cr.has_value() && (!pct || near(*pct, *c.pct_cr, 1e-9)), tag + "%CR");
    const auto rq = reflection_question_ratio(freq);
    o.check(rq.has_value() == c.rq.has_value() && (!rq || near(*rq, *c.rq, 1e-9)), tag + "R:Q");
  }
  const ThresholdConfig t;
  for (const auto m : enum_values<CompetencyMetric>()) {
    const auto th = t.get(m);
    o.check(band(th.good, th) == Band::good, std::string(enum_name(m)) + " value=good");
    o.check(band(th.fair, th) == Band::fair, std::string(enum_name(m)) + " value=fair");
    o.check(band(std::nextafter(th.fair, 0.0), th) == Band::below_fair, std::string(enum_name(m)) + " below fair");
  }
  o.detail << "10 transcripts, 4 metrics banded";
}

void counting_oracle(Outcome& o) {
  std::mt19937_64 gen(1000);
  int checked = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::vector<BC>> turns(gen() % 25);
    std::map<std::string, int> tally;
    int total = 0;
    for (auto& codes : turns) {
      for (int c = 0; c < 10; ++c) {
        if (gen() % 3 == 0) {
          codes.push_back(static_cast<BC>(c));
          ++tally[std::string(EnumNames<BC>::names[c])];
          ++total;
        }
      }
    }
    const auto freq = count_behaviors(fixtures::coded_transcript(turns));
    const auto a = adherence_breakdown(freq);
    bool same = freq.total == total;
    for (const auto code : enum_values<BC>()) same = same && freq.count(code) == tally[std::string(enum_name(code))];
    const int adh = tally["affirmation"] + tally["seeking_collaboration"] + tally["emphasizing_autonomy"];
    const int non = tally["persuading"] + tally["confront"];
    same = same && a.adherent_count == adh && a.non_adherent_count == non &&
           a.neutral_count == total - adh - non;
    if (adh + non > 0) {
      same = same && near(*a.adherent_pct, 100.0 * adh / (adh + non), 1e-9) &&
             near(*a.non_adherent_pct, 100.0 * non / (adh + non), 1e-9);
    } else {
      same = same && !a.adherent_pct && !a.non_adherent_pct;
    }
    o.check(same, "trial " + std::to_string(trial) + " mismatch");
    ++checked;
  }
  o.detail << checked << " randomized transcripts";
}

void e2e_determinism(Outcome& o) {
  std::string bytes[2];
  std::vector<LogEntry> log;
  for (int run = 0; run < 2; ++run) {
    auto engine = engine_for(20261014);
    const auto s = engine->create_session("det", std::nullopt, "p05");
    for (const auto& line : fixtures::five_turn_script()) engine->submit_utterance(s.session_id, line);
    engine->end_session(s.session_id);
    bytes[run] = serialize_report(engine->report(s.session_id));
    log = engine->log(s.session_id);
  }
  o.check(bytes[0] == bytes[1], "reports differ across runs");
  std::string lines;
  for (const auto& e : log) lines += serialize_log_line(e);
  const auto rr = replay(parse_log(lines));
  o.check(rr.report.has_value() && serialize_report(*rr.report) == bytes[0], "replay differs");
  o.detail << bytes[0].size() << " report bytes, " << log.size() << " log entries";
}

void cognitive_safety(Outcome& o) {
  std::mt19937_64 gen(10000);
  for (int seq = 0; seq < 10000; ++seq) {
    CognitiveState s = initial_cognitive_state(gen(), {1, 10});
    const int steps = static_cast<int>(gen() % 20) + 1;
    for (int i = 0; i < steps; ++i) {
      FactorDeltas d;
      for (const auto k : enum_values<FactorKind>()) {
        if (gen() % 2) d[k] = static_cast<int>(gen() % 13) - 6;
      }
      const CognitiveState next = apply_factor_deltas(s, d);
      for (const auto k : enum_values<FactorKind>()) {
        const int v = next.value(k);
        const int want = std::clamp(s.value(k) + (d.count(k) ? d.at(k) : 0), 1, 10);
        o.check(v >= 1 && v <= 10 && v == want, "sequence " + std::to_string(seq) + " out of range");
      }
      s = next;
    }
  }
  int sessions_checked = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    auto engine = engine_for(seed);
    const auto s1 = engine->create_session("cs");
    for (const auto& line : fixtures::five_turn_script()) engine->submit_utterance(s1.session_id, line);
    engine->end_session(s1.session_id);
    const auto r1 = engine->session(s1.session_id);
    const auto r2 = engine->create_session("cs");
    for (const auto k : enum_values<FactorKind>()) {
      const auto& deltas = r1.outbound_event->factor_deltas;
      const int d = deltas.count(k) ? deltas.at(k) : 0;
      o.check(r2.initial_state.value(k) == std::clamp(r1.current_state().value(k) + d, 1, 10),
              "session 2 initial state mismatch");
    }
    ++sessions_checked;
  }
  o.detail << "10000 delta sequences, " << sessions_checked << " session pairs";
}

void state_machine(Outcome& o) {
  std::mt19937_64 gen(500);
  const std::vector<std::string> texts{"What brings you in?", "So you drink to relax.", " ", "That takes courage."};
  for (int c = 0; c < 500; ++c) {
    auto engine = engine_for(static_cast<std::uint64_t>(c), nullptr, 2);
    std::vector<std::string> ids;
    for (int op = 0, n = static_cast<int>(gen() % 16) + 1; op < n; ++op) {
      const std::string pid = gen() % 2 ? "a" : "b";
      try {
        switch (gen() % 3) {
          case 0: ids.push_back(engine->create_session(pid).session_id); break;
          case 1:
            if (!ids.empty()) engine->submit_utterance(ids[gen() % ids.size()], texts[gen() % texts.size()]);
            break;
          default:
            if (!ids.empty()) engine->end_session(ids[gen() % ids.size()]);
        }
      } catch (const Error&) {
      }
    }
    for (const auto& id : ids) {
      const auto hist = engine->status_history(id);
      for (std::size_t i = 1; i < hist.size(); ++i) {
        o.check(is_legal_transition(hist[i - 1], hist[i]), "illegal transition in case " + std::to_string(c));
      }
      o.check(validate_transcript(engine->session(id).transcript).empty(), "broken transcript in case " + std::to_string(c));
    }
  }

  int successes = 0, conflicts = 0;
  for (int round = 0; round < 20; ++round) {
    auto gated = std::make_shared<fixtures::GatedBackend>();
    auto engine = engine_for(1, gated);
    engine->create_session("race");
    auto submit = [&] {
      try {
        engine->submit_utterance("race-s1", "What brings you in?");
        return 1;
      } catch (const Conflict&) {
        return 0;
      }
    };
    auto a = std::async(std::launch::async, submit);
    auto b = std::async(std::launch::async, submit);
    gated->wait_entered();
    while (a.wait_for(std::chrono::milliseconds(1)) != std::future_status::ready &&
           b.wait_for(std::chrono::milliseconds(1)) != std::future_status::ready) {
    }
    gated->release();
    const int s = a.get() + b.get();
    successes += s;
    conflicts += 2 - s;
    o.check(s == 1, "round " + std::to_string(round) + " had " + std::to_string(s) + " successes");
  }
  o.detail << "500 random cases; concurrent submits " << successes << " ok / " << conflicts << " conflict";
}

void stats(Outcome& o) {
  const double p = exact_binomial_upper(18, 17, 1.0 / 3.0);
  long double oracle = 0;
  for (const int i : {17, 18}) {
    const long double comb = i == 17 ? 18.0L : 1.0L;
    oracle += comb * std::pow(1.0L / 3.0L, i) * std::pow(2.0L / 3.0L, 18 - i);
  }
  o.check(p < 0.01, "p >= 0.01");
  o.check(std::fabs(p - static_cast<double>(oracle)) <= 1e-12, "tail sum mismatch");
  o.check(near(icc_absolute_agreement(RatingMatrix({{1, 1}, {3, 3}, {2, 2}, {5, 5}})), 1.0, 1e-12),
          "duplicated columns != 1");
  bool threw = false;
  try {
    icc_absolute_agreement(RatingMatrix({{4, 4, 4}, {4, 4, 4}}));
  } catch (const DegenerateVariance&) {
    threw = true;
  }
  o.check(threw, "constant matrix accepted");
  const double icc = icc_absolute_agreement(
      RatingMatrix({{9, 2, 5}, {6, 1, 3}, {8, 4, 6}, {7, 1, 2}, {10, 5, 6}, {6, 2, 4}}));
  o.check(near(icc, 19.0 / 85.0, 1e-9), "fixture ICC mismatch");
  o.detail << "p=" << p << ", fixture ICC=" << icc;
}

void collect_keys(const Json& j, std::set<std::string>& keys) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      keys.insert(k);
      collect_keys(v, keys);
    }
  } else if (j.is_array()) {
    for (const auto& v : j) collect_keys(v, keys);
  }
}

void information_hiding(Outcome& o) {
  auto engine = engine_for(3);
  Api api(*engine);
  const std::set<std::string> hidden{"codes", "score", "global_scores", "cognitive_state", "initial_state",
                                     "control", "self_efficacy", "awareness", "reward", "factor_deltas"};
  int responses = 0;
  auto probe = [&](const std::string& method, const std::string& path, const std::string& body,
                   std::map<std::string, std::string> query = {}) {
    const auto res = api.handle({method, path, std::move(query), body});
    std::set<std::string> keys;
    collect_keys(res.body, keys);
    for (const auto& h : hidden) o.check(keys.count(h) == 0, path + " leaked " + h);
    ++responses;
    return res;
  };
  probe("POST", "/api/v1/sessions", R"({"participant_id":"hide"})");
  auto sweep = [&] {
    probe("GET", "/api/v1/personas", "");
    probe("GET", "/api/v1/sessions/hide-s1", "");
    probe("GET", "/api/v1/sessions", "", {{"participant_id", "hide"}});
    probe("GET", "/api/v1/sessions/hide-s1/report", "");
    probe("GET", "/api/v1/sessions/hide-s1/transcript", "");
  };
  sweep();
  for (const auto& line : fixtures::five_turn_script()) {
    probe("POST", "/api/v1/sessions/hide-s1/utterances", Json{{"text", line}}.dump());
    o.check(engine->session("hide-s1").status == SessionStatus::in_progress, "not in progress");
    sweep();
  }
  o.detail << responses << " in-progress responses scanned";
}

void agent_envelope(Outcome& o) {
  auto task_for = [](AgentKind k, int attempts) {
    AgentTask t;
    t.kind = k;
    t.output_schema_id = schema_id_for(k);
    t.max_attempts = attempts;
    t.context_blocks = {{"current_transcript", "x"}};
    return t;
  };
  for (int max = 1; max <= 4; ++max) {
    MockScript s;
    s.rules.push_back({AgentKind::global_scoring, 0, "", "", "```\nnot json\n```"});
    fixtures::CountingBackend backend(s);
    bool typed = false;
    try {
      complete_structured(task_for(AgentKind::global_scoring, max), backend,
                          [](const Json&, std::vector<std::string>&) {});
    } catch (const AgentFailure& f) {
      typed = f.code() == ErrorCode::agent_failure && static_cast<int>(f.exchange().attempts.size()) == max;
    }
    o.check(typed, "no typed failure at max_attempts=" + std::to_string(max));
    o.check(backend.calls(AgentKind::global_scoring) == max, "retry count exceeded");
  }

  Json g = Json::object();
  for (const auto d : enum_values<GlobalDimension>()) g[std::string(enum_name(d))] = {{"score", 3}, {"rationale", "r"}};
  g["empathy"]["score"] = 6;
  MockScript gs;
  gs.rules.push_back({AgentKind::global_scoring, 0, "", "", g.dump()});
  fixtures::CountingBackend gb(gs);
  bool score_rejected = false;
  try {
    score_globals(AgentRuntime{&gb}, fixtures::coded_transcript({{BC::question}}));
  } catch (const AgentFailure&) {
    score_rejected = gb.calls(AgentKind::global_scoring) == 3;
  }
  o.check(score_rejected, "score 6 accepted");

  Json state = CognitiveState(5, 5, 5, 5);
  state["reward"]["value"] = 11;
  MockScript cs;
  cs.rules.push_back({AgentKind::cognitive_model, 0, "", "", state.dump()});
  fixtures::CountingBackend cb(cs);
  bool factor_rejected = false;
  try {
    update_cognitive_model(AgentRuntime{&cb}, CognitiveState(5, 5, 5, 5), "Hello.", "Hi.");
  } catch (const AgentFailure&) {
    factor_rejected = cb.calls(AgentKind::cognitive_model) == 3;
  }
  o.check(factor_rejected, "factor 11 accepted");
  o.detail << "retries bounded for max_attempts 1..4; score 6 and factor 11 rejected";
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"metric-formulas", 1.0, metric_formulas},
      {"counting-oracle", 10.0, counting_oracle},
      {"end-to-end-determinism", 5.0, e2e_determinism},
      {"cognitive-state-safety", 5.0, cognitive_safety},
      {"state-machine", 60.0, state_machine},
      {"stats", 5.0, stats},
      {"information-hiding", 5.0, information_hiding},
      {"agent-envelope", 5.0, agent_envelope},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << " threw: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.limit_seconds) {
      o.ok = false;
      o.detail << " (over the " << c.limit_seconds << " s limit)";
    }
    if (!o.ok) ++failures;
    std::cout << (o.ok ? "PASS " : "FAIL ") << c.name << " [" << std::fixed << std::setprecision(3) << secs
              << " s] " << o.detail.str() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criterion(s) failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
