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

#include "mitrainer/session_engine.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <future>

#include "mitrainer/rng.hpp"

namespace mitrainer {

namespace fs = std::filesystem;

Timestamp SystemClock::now() {
  return std::chrono::time_point_cast<std::chrono::milliseconds>(std::chrono::system_clock::now());
}

SteppingClock::SteppingClock(Timestamp start, std::chrono::milliseconds step) : next_(start), step_(step) {}

Timestamp SteppingClock::now() {
  std::lock_guard lock(mutex_);
  const auto t = next_;
  next_ += step_;
  return t;
}

void EngineConfig::validate() const {
  if (max_sessions < 1) throw InvalidConfiguration("max_sessions must be at least 1");
  if (initial_range.lo < kFactorMin || initial_range.hi > kFactorMax || initial_range.lo > initial_range.hi) {
    throw InvalidConfiguration("initial_range must satisfy 1 <= lo <= hi <= 10");
  }
  thresholds.validate();
  if (temperature < 0.0) throw InvalidConfiguration("temperature must be non-negative");
  if (max_attempts < 1) throw InvalidConfiguration("max_attempts must be at least 1");
  if (!data_dir.empty() && !fs::is_directory(data_dir)) {
    throw InvalidConfiguration("data_dir " + data_dir.string() + " is not a directory");
  }
}

// ---------------------------------------------------------------------------
// Block randomization
// ---------------------------------------------------------------------------

BlockRandomizer::BlockRandomizer(std::vector<std::string> persona_ids, std::uint64_t seed)
    : ids_(std::move(persona_ids)), seed_(seed) {
  if (ids_.empty()) throw InvalidConfiguration("block randomization needs at least one persona");
}

void BlockRandomizer::refill() {
  block_ = ids_;
  SeededDraws draws(derive_seed(seed_, "persona-block", block_index_++));
  draws.shuffle(std::span<std::string>(block_));
  position_ = 0;
}

std::string BlockRandomizer::next() {
  if (position_ >= block_.size()) refill();
  ++assigned_;
  return block_[position_++];
}

std::map<std::string, int> BlockRandomizer::block_counts() const {
  std::map<std::string, int> counts;
  for (const auto& id : ids_) counts[id] = 0;
  const auto used = block_.empty() || position_ >= block_.size() ? 0 : position_;
  for (std::size_t i = 0; i < used; ++i) ++counts[block_[i]];
  return counts;
}

// ---------------------------------------------------------------------------
// Log payloads and replay
// ---------------------------------------------------------------------------

namespace {

Json cues_json(const std::vector<NonverbalCue>& cues) {
  Json a = Json::array();
  for (const auto c : cues) a.push_back(enum_json(c));
  return a;
}

std::vector<NonverbalCue> cues_from_json(const Json& j) {
  std::vector<NonverbalCue> out;
  if (!j.is_array()) throw InvalidArgument("cues must be an array");
  for (const auto& c : j) out.push_back(enum_from_json<NonverbalCue>(c, "cue"));
  return out;
}

Json session_header_json(const SessionRecord& r) {
  Json j = Json::object();
  j["session_id"] = r.session_id;
  j["participant_id"] = r.participant_id;
  j["persona_id"] = r.persona_id;
  j["session_number"] = r.session_number;
  j["max_sessions"] = r.max_sessions;
  j["seed"] = r.seed;
  j["initial_state"] = r.initial_state;
  j["inbound_event"] = r.inbound_event ? Json(*r.inbound_event) : Json(nullptr);
  return j;
}

Json report_inputs_json(const std::string& report_id, const ReportInputs& in) {
  Json j = Json::object();
  j["report_id"] = report_id;
  j["global_scores"] = in.global_scores ? global_scores_json(*in.global_scores) : Json(nullptr);
  j["summary"] = in.summary ? Json(*in.summary) : Json(nullptr);
  j["errors"] = in.errors;
  j["thresholds"] = thresholds_json(in.thresholds);
  j["mi_description"] = in.mi_description;
  return j;
}

TranscriptEntry* entry_at(SessionRecord& r, long long turn_index, Speaker speaker) {
  if (turn_index < 0 || static_cast<std::size_t>(turn_index) >= r.transcript.size()) return nullptr;
  auto& e = r.transcript[static_cast<std::size_t>(turn_index)];
  return e.speaker == speaker ? &e : nullptr;
}

struct ReplayState {
  ReplayResult out;
  bool created = false;

  void move_to(SessionStatus to, std::int64_t seq) {
    if (!is_legal_transition(out.record.status, to)) {
      throw ReplayError(seq, "illegal transition " + std::string(enum_name(out.record.status)) + " -> " +
                                 std::string(enum_name(to)));
    }
    out.record.status = to;
    out.status_history.push_back(to);
  }

  void apply(const LogEntry& e) {
    const auto seq = e.sequence;
    const Json& p = e.payload;
    SessionRecord& r = out.record;
    if (!created && e.kind != LogKind::session_created) throw ReplayError(seq, "log must start with session_created");
    switch (e.kind) {
      case LogKind::session_created: {
        if (created) throw ReplayError(seq, "duplicate session_created");
        const Json& h = require_field(p, "session");
        r.session_id = require_string(h, "session_id");
        r.participant_id = require_string(h, "participant_id");
        r.persona_id = require_string(h, "persona_id");
        r.session_number = static_cast<int>(require_integer(h, "session_number"));
        r.max_sessions = static_cast<int>(require_integer(h, "max_sessions"));
        r.seed = require_field(h, "seed").get<std::uint64_t>();
        r.initial_state = require_field(h, "initial_state").get<CognitiveState>();
        const Json& inbound = require_field(h, "inbound_event");
        if (!inbound.is_null()) r.inbound_event = inbound.get<BetweenSessionEvent>();
        r.status = SessionStatus::created;
        out.status_history = {SessionStatus::created};
        created = true;
        move_to(SessionStatus::in_progress, seq);
        break;
      }
      case LogKind::counselor_utterance: {
        move_to(SessionStatus::awaiting_turn, seq);
        TranscriptEntry c;
        c.turn_index = static_cast<int>(require_integer(p, "turn_index"));
        if (c.turn_index != static_cast<int>(r.transcript.size())) throw ReplayError(seq, "turn index out of order");
        c.speaker = Speaker::counselor;
        c.text = require_string(p, "text");
        c.timestamp = e.timestamp;
        r.transcript.push_back(std::move(c));
        break;
      }
      case LogKind::patient_reply: {
        if (r.status != SessionStatus::awaiting_turn || r.transcript.empty() ||
            r.transcript.back().speaker != Speaker::counselor) {
          throw ReplayError(seq, "patient reply without a pending counselor utterance");
        }
        if (p.contains("failed") && p.at("failed").get<bool>()) {
          const auto& c = r.transcript.back();
          r.failed_turns.push_back({c.text, c.timestamp, require_string(p, "error")});
          r.transcript.pop_back();
          move_to(SessionStatus::in_progress, seq);
          break;
        }
        TranscriptEntry pe;
        pe.turn_index = static_cast<int>(require_integer(p, "turn_index"));
        if (pe.turn_index != static_cast<int>(r.transcript.size())) throw ReplayError(seq, "turn index out of order");
        pe.speaker = Speaker::patient;
        pe.text = require_string(p, "text");
        pe.timestamp = e.timestamp;
        pe.cues = cues_from_json(require_field(p, "cues"));
        r.transcript.push_back(std::move(pe));
        break;
      }
      case LogKind::annotation_attached: {
        auto* c = entry_at(r, require_integer(p, "turn_index"), Speaker::counselor);
        if (c == nullptr) throw ReplayError(seq, "annotation for an unknown counselor entry");
        c->annotation = require_field(p, "codes").get<UtteranceAnnotation>();
        c->analysis_available = require_field(p, "analysis_available").get<bool>();
        break;
      }
      case LogKind::cognitive_updated: {
        auto* pe = entry_at(r, require_integer(p, "turn_index"), Speaker::patient);
        if (pe == nullptr) throw ReplayError(seq, "cognitive update for an unknown patient entry");
        pe->cognitive_snapshot = require_field(p, "cognitive_state").get<CognitiveState>();
        pe->analysis_available = require_field(p, "analysis_available").get<bool>();
        move_to(SessionStatus::in_progress, seq);
        break;
      }
      case LogKind::session_ended:
        move_to(SessionStatus::ended, seq);
        break;
      case LogKind::event_generated:
        if (r.status != SessionStatus::ended) throw ReplayError(seq, "event before session end");
        r.outbound_event = require_field(p, "event").get<BetweenSessionEvent>();
        break;
      case LogKind::report_built: {
        ReportInputs in;
        in.session = &r;
        const Json& g = require_field(p, "global_scores");
        if (!g.is_null()) in.global_scores = global_scores_from_json(g);
        const Json& s = require_field(p, "summary");
        if (!s.is_null()) in.summary = s.get<std::string>();
        in.errors = require_field(p, "errors").get<std::vector<std::string>>();
        in.thresholds = thresholds_from_json(require_field(p, "thresholds"));
        in.mi_description = require_string(p, "mi_description", true);
        move_to(SessionStatus::reported, seq);
        out.report = build_partial_report(in);
        if (out.report->report_id != require_string(p, "report_id")) throw ReplayError(seq, "report id mismatch");
        break;
      }
      case LogKind::agent_exchange:
        break;
    }
  }
};

void write_file_atomically(const fs::path& path, const std::string& bytes) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidState("cannot write " + tmp.string());
    out << bytes;
    out.flush();
    if (!out) throw InvalidState("failed writing " + tmp.string());
  }
  fs::rename(tmp, path);
}

bool valid_participant_id(std::string_view id) {
  if (id.empty() || id.size() > 64) return false;
  return std::all_of(id.begin(), id.end(), [](unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c == '-' || c == '.';
  });
}

bool blank(std::string_view text) {
  return std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

BetweenSessionEvent fallback_event(const std::string& source_session) {
  BetweenSessionEvent e;
  e.source_session = source_session;
  e.narrative = "Nothing notable happened between sessions.";
  e.valence = EventValence::mixed;
  return e;
}

class BusyGuard {
 public:
  explicit BusyGuard(std::atomic<bool>& flag) : flag_(flag) {}
  ~BusyGuard() { flag_.store(false); }
  BusyGuard(const BusyGuard&) = delete;
  BusyGuard& operator=(const BusyGuard&) = delete;

 private:
  std::atomic<bool>& flag_;
};

/// Collects exchanges from one agent call, in call order.
struct ExchangeBuffer {
  std::vector<AgentExchange> items;
  ExchangeSink sink() {
    return [this](const AgentExchange& x) { items.push_back(x); };
  }
};

}  // namespace

ReplayResult replay(std::span<const LogEntry> log) {
  if (log.empty()) throw ReplayError(0, "empty log");
  ReplayState st;
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto expected = static_cast<std::int64_t>(i);
    if (log[i].sequence != expected) {
      throw ReplayError(expected, "sequence gap (found " + std::to_string(log[i].sequence) + ")");
    }
    try {
      st.apply(log[i]);
    } catch (const ReplayError&) {
      throw;
    } catch (const std::exception& e) {
      throw ReplayError(expected, e.what());
    }
  }
  return std::move(st.out);
}

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

struct SessionEngine::Slot {
  std::mutex mutex;
  SessionRecord record;
  EventLog log;
  std::vector<SessionStatus> history;
  std::optional<DashboardReport> report;
  std::optional<std::vector<TranscriptEntry>> prior_transcript;
  std::atomic<bool> busy{false};
  Timestamp last{};
  fs::path dir;
};

struct SessionEngine::Participant {
  std::string persona_id;
  std::vector<std::string> session_ids;
};

namespace {

std::vector<std::string> persona_ids(const PersonaCatalog& catalog) {
  std::vector<std::string> ids;
  for (const auto& p : catalog.personas()) ids.push_back(p.persona_id);
  return ids;
}

}  // namespace

SessionEngine::SessionEngine(EngineConfig config, PersonaCatalog catalog, std::shared_ptr<CompletionBackend> backend,
                             std::shared_ptr<Clock> clock)
    : config_(std::move(config)),
      catalog_(std::move(catalog)),
      backend_(std::move(backend)),
      clock_(std::move(clock)),
      randomizer_(persona_ids(catalog_), config_.seed) {
  config_.validate();
  if (!backend_) throw InvalidConfiguration("engine needs a completion backend");
  if (!clock_) throw InvalidConfiguration("engine needs a clock");
}

SessionEngine::~SessionEngine() = default;

std::shared_ptr<SessionEngine::Slot> SessionEngine::slot(const std::string& session_id) const {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw NotFound("unknown session '" + session_id + "'");
  return it->second;
}

AgentRuntime SessionEngine::runtime(ExchangeSink sink) const {
  return AgentRuntime{backend_.get(), std::move(sink), config_.temperature, config_.max_attempts};
}

Timestamp SessionEngine::now(Slot& s) const {
  s.last = std::max(s.last, clock_->now());
  return s.last;
}

void SessionEngine::transition(Slot& s, SessionStatus to) const {
  if (!is_legal_transition(s.record.status, to)) {
    throw InvalidState("illegal transition " + std::string(enum_name(s.record.status)) + " -> " +
                       std::string(enum_name(to)));
  }
  s.record.status = to;
  s.history.push_back(to);
}

SessionRecord SessionEngine::create_session(const std::string& participant_id, std::optional<std::uint64_t> seed,
                                            std::optional<std::string> persona_override) {
  if (!valid_participant_id(participant_id)) {
    throw InvalidArgument("participant id must be 1-64 characters from [A-Za-z0-9_.-]");
  }
  if (persona_override) catalog_.at(*persona_override);

  std::lock_guard lock(mutex_);
  auto pit = participants_.find(participant_id);
  const bool fresh = pit == participants_.end();
  std::shared_ptr<Slot> previous;
  if (!fresh) {
    const Participant& part = pit->second;
    if (static_cast<int>(part.session_ids.size()) >= config_.max_sessions) {
      throw Conflict("participant '" + participant_id + "' has reached the limit of " +
                     std::to_string(config_.max_sessions) + " sessions");
    }
    if (persona_override && *persona_override != part.persona_id) {
      throw InvalidArgument("participant '" + participant_id + "' is assigned persona " + part.persona_id);
    }
    previous = sessions_.at(part.session_ids.back());
  }

  auto s = std::make_shared<Slot>();
  SessionRecord& r = s->record;
  std::string assignment = "override";
  if (fresh) {
    if (persona_override) {
      r.persona_id = *persona_override;
    } else {
      r.persona_id = randomizer_.next();
      assignment = "block";
    }
    r.session_number = 1;
  } else {
    r.persona_id = pit->second.persona_id;
    r.session_number = static_cast<int>(pit->second.session_ids.size()) + 1;
    assignment = "inherited";
  }
  r.participant_id = participant_id;
  r.session_id = participant_id + "-s" + std::to_string(r.session_number);
  r.max_sessions = config_.max_sessions;
  r.seed = seed.value_or(derive_seed(config_.seed, participant_id, static_cast<std::uint64_t>(r.session_number)));

  if (previous) {
    std::lock_guard plock(previous->mutex);
    const SessionRecord& prev = previous->record;
    if (prev.status != SessionStatus::reported) {
      throw InvalidState("session " + prev.session_id + " must be ended before the next one starts");
    }
    if (!prev.outbound_event) throw InvalidState("session " + prev.session_id + " produced no between-session event");
    r.inbound_event = prev.outbound_event;
    r.initial_state = apply_factor_deltas(prev.current_state(), prev.outbound_event->factor_deltas,
                                          "between-session event");
    s->prior_transcript = prev.transcript;
  } else {
    r.initial_state = initial_cognitive_state(r.seed, config_.initial_range);
  }

  if (!config_.data_dir.empty()) {
    s->dir = config_.data_dir / r.session_id;
    std::error_code ec;
    fs::create_directories(s->dir, ec);
    if (ec) throw InvalidState("cannot create " + s->dir.string() + ": " + ec.message());
    if (fs::exists(s->dir / "log.ndjson")) throw Conflict("session " + r.session_id + " already exists on disk");
    s->log = EventLog(s->dir / "log.ndjson");
  }

  r.status = SessionStatus::created;
  s->history = {SessionStatus::created};
  Json payload = Json::object();
  payload["session"] = session_header_json(r);
  payload["assignment"] = assignment;
  s->log.append(LogKind::session_created, std::move(payload), now(*s));
  transition(*s, SessionStatus::in_progress);

  if (fresh) {
    participants_[participant_id] = Participant{r.persona_id, {r.session_id}};
  } else {
    pit->second.session_ids.push_back(r.session_id);
  }
  sessions_[r.session_id] = s;
  return r;
}

TurnResult SessionEngine::submit_utterance(const std::string& session_id, const std::string& text) {
  auto s = slot(session_id);
  if (s->busy.exchange(true)) throw Conflict("a turn is already in flight for session " + session_id);
  BusyGuard guard(s->busy);

  std::unique_lock lock(s->mutex);
  SessionRecord& r = s->record;
  if (r.status != SessionStatus::in_progress) {
    throw InvalidState("session " + session_id + " is " + std::string(enum_name(r.status)));
  }
  if (blank(text)) throw InvalidArgument("counselor utterance must not be empty");

  const PersonaProfile persona = catalog_.at(r.persona_id);
  const std::vector<TranscriptEntry> history = r.transcript;
  const CognitiveState prev_state = r.current_state();

  transition(*s, SessionStatus::awaiting_turn);
  TranscriptEntry c;
  c.turn_index = static_cast<int>(r.transcript.size());
  c.speaker = Speaker::counselor;
  c.text = text;
  c.timestamp = now(*s);
  r.transcript.push_back(c);
  s->log.append(LogKind::counselor_utterance, Json{{"turn_index", c.turn_index}, {"text", c.text}}, c.timestamp);

  PatientTurnContext ctx;
  ctx.persona = &persona;
  ctx.state = prev_state;
  ctx.history = history;
  if (s->prior_transcript) ctx.prior_session = std::span<const TranscriptEntry>(*s->prior_transcript);
  ctx.event = r.inbound_event;
  ctx.session_number = r.session_number;
  ctx.latest = text;
  lock.unlock();

  ExchangeBuffer patient_x;
  PatientReply reply;
  try {
    reply = patient_respond(runtime(patient_x.sink()), ctx);
  } catch (const std::exception& e) {
    const auto* err = dynamic_cast<const Error*>(&e);
    const ErrorCode code = err != nullptr ? err->code() : ErrorCode::internal;
    lock.lock();
    for (const auto& x : patient_x.items) s->log.append(LogKind::agent_exchange, exchange_json(x), now(*s));
    r.failed_turns.push_back({c.text, c.timestamp, e.what()});
    r.transcript.pop_back();
    s->log.append(LogKind::patient_reply,
                  Json{{"failed", true}, {"turn_index", c.turn_index}, {"error", e.what()}}, now(*s));
    transition(*s, SessionStatus::in_progress);
    throw TurnFailed(code, std::string("turn aborted: ") + e.what());
  }

  // Coding and cognitive update are independent given the reply.
  ExchangeBuffer coding_x;
  ExchangeBuffer cognitive_x;
  auto coding = std::async(std::launch::async, [&] { return code_utterance(runtime(coding_x.sink()), text, history); });
  auto cognitive = std::async(std::launch::async, [&] {
    return update_cognitive_model(runtime(cognitive_x.sink()), prev_state, text, reply.reply, history);
  });

  std::optional<UtteranceAnnotation> annotation;
  std::optional<CognitiveState> next_state;
  std::string coding_error;
  std::string cognitive_error;
  try {
    annotation = coding.get();
  } catch (const std::exception& e) {
    coding_error = e.what();
  }
  try {
    next_state = cognitive.get();
  } catch (const std::exception& e) {
    cognitive_error = e.what();
  }

  lock.lock();
  for (const auto& x : patient_x.items) s->log.append(LogKind::agent_exchange, exchange_json(x), now(*s));
  TranscriptEntry pe;
  pe.turn_index = c.turn_index + 1;
  pe.speaker = Speaker::patient;
  pe.text = reply.reply;
  pe.cues = reply.cues;
  pe.timestamp = now(*s);
  s->log.append(LogKind::patient_reply,
                Json{{"turn_index", pe.turn_index}, {"text", pe.text}, {"cues", cues_json(pe.cues)}}, pe.timestamp);

  for (const auto& x : coding_x.items) s->log.append(LogKind::agent_exchange, exchange_json(x), now(*s));
  auto& ce = r.transcript.back();
  ce.annotation = annotation.value_or(UtteranceAnnotation{});
  ce.analysis_available = annotation.has_value();
  Json ann = Json::object();
  ann["turn_index"] = ce.turn_index;
  ann["codes"] = *ce.annotation;
  ann["analysis_available"] = ce.analysis_available;
  if (!coding_error.empty()) ann["error"] = coding_error;
  s->log.append(LogKind::annotation_attached, std::move(ann), now(*s));

  for (const auto& x : cognitive_x.items) s->log.append(LogKind::agent_exchange, exchange_json(x), now(*s));
  pe.cognitive_snapshot = next_state.value_or(prev_state);
  pe.analysis_available = next_state.has_value();
  Json cog = Json::object();
  cog["turn_index"] = pe.turn_index;
  cog["cognitive_state"] = *pe.cognitive_snapshot;
  cog["analysis_available"] = pe.analysis_available;
  if (!cognitive_error.empty()) cog["error"] = cognitive_error;
  r.transcript.push_back(pe);
  s->log.append(LogKind::cognitive_updated, std::move(cog), now(*s));
  transition(*s, SessionStatus::in_progress);

  return TurnResult{pe.text, pe.cues, pe.turn_index};
}

EndResult SessionEngine::end_session(const std::string& session_id) {
  auto s = slot(session_id);
  if (s->busy.exchange(true)) throw Conflict("a turn is already in flight for session " + session_id);
  BusyGuard guard(s->busy);

  std::unique_lock lock(s->mutex);
  SessionRecord& r = s->record;
  if (r.status != SessionStatus::in_progress) {
    throw InvalidState("session " + session_id + " is " + std::string(enum_name(r.status)));
  }
  if (r.completed_exchanges() == 0) throw InvalidArgument("cannot end session " + session_id + " with no exchanges");
  transition(*s, SessionStatus::ended);
  s->log.append(LogKind::session_ended, Json{{"completed_exchanges", r.completed_exchanges()}}, now(*s));

  const std::vector<TranscriptEntry> transcript = r.transcript;
  const CognitiveState final_state = r.current_state();
  const PersonaProfile persona = catalog_.at(r.persona_id);
  const bool wants_event = r.session_number < r.max_sessions;
  lock.unlock();

  ReportInputs inputs;
  inputs.thresholds = config_.thresholds;
  inputs.mi_description = config_.mi_description;

  ExchangeBuffer global_x;
  try {
    inputs.global_scores = score_globals(runtime(global_x.sink()), transcript);
  } catch (const std::exception& e) {
    inputs.errors.push_back(std::string("global_scores: ") + e.what());
  }
  ExchangeBuffer summary_x;
  if (inputs.global_scores) {
    try {
      const auto metrics = compute_metrics(transcript, &*inputs.global_scores, config_.thresholds);
      inputs.summary = summarize_session(runtime(summary_x.sink()), transcript, inputs.global_scores, metrics);
    } catch (const std::exception& e) {
      inputs.errors.push_back(std::string("session_summary: ") + e.what());
    }
  } else {
    inputs.errors.push_back("session_summary: skipped because global scores are unavailable");
  }
  ExchangeBuffer event_x;
  std::optional<BetweenSessionEvent> event;
  bool event_fallback = false;
  if (wants_event) {
    try {
      event = generate_between_event(runtime(event_x.sink()), persona, final_state, transcript, session_id, true);
    } catch (const std::exception& e) {
      inputs.errors.push_back(std::string("between_session_event: ") + e.what());
      event = fallback_event(session_id);
      event_fallback = true;
    }
  }

  lock.lock();
  for (auto* buf : {&global_x, &summary_x, &event_x}) {
    for (const auto& x : buf->items) s->log.append(LogKind::agent_exchange, exchange_json(x), now(*s));
  }
  if (event) {
    r.outbound_event = event;
    s->log.append(LogKind::event_generated, Json{{"event", *event}, {"fallback", event_fallback}}, now(*s));
  }
  inputs.session = &r;
  DashboardReport report = build_partial_report(inputs);
  if (!s->dir.empty()) write_file_atomically(s->dir / "report_v1.json", serialize_report(report));
  s->log.append(LogKind::report_built, report_inputs_json(report.report_id, inputs), now(*s));
  transition(*s, SessionStatus::reported);

  EndResult out{report.report_id, report.errors, report.unavailable_modules};
  s->report = std::move(report);
  return out;
}

SessionRecord SessionEngine::session(const std::string& session_id) const {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return s->record;
}

std::vector<SessionRecord> SessionEngine::sessions_for(const std::string& participant_id) const {
  std::vector<std::shared_ptr<Slot>> slots;
  {
    std::lock_guard lock(mutex_);
    const auto it = participants_.find(participant_id);
    if (it == participants_.end()) throw NotFound("unknown participant '" + participant_id + "'");
    for (const auto& id : it->second.session_ids) slots.push_back(sessions_.at(id));
  }
  std::vector<SessionRecord> out;
  for (const auto& s : slots) {
    std::lock_guard lock(s->mutex);
    out.push_back(s->record);
  }
  return out;
}

DashboardReport SessionEngine::report(const std::string& session_id) const {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  if (!s->report) {
    throw InvalidState("report for session " + session_id + " is not ready (status " +
                       std::string(enum_name(s->record.status)) + ")");
  }
  return *s->report;
}

std::vector<LogEntry> SessionEngine::log(const std::string& session_id) const {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return s->log.entries();
}

std::vector<SessionStatus> SessionEngine::status_history(const std::string& session_id) const {
  auto s = slot(session_id);
  std::lock_guard lock(s->mutex);
  return s->history;
}

std::optional<ParticipantAssignment> SessionEngine::participant(const std::string& participant_id) const {
  std::lock_guard lock(mutex_);
  const auto it = participants_.find(participant_id);
  if (it == participants_.end()) return std::nullopt;
  ParticipantAssignment a;
  a.participant_id = participant_id;
  a.persona_id = it->second.persona_id;
  a.sessions_created = static_cast<int>(it->second.session_ids.size());
  for (const auto& id : it->second.session_ids) {
    const auto& s = sessions_.at(id);
    std::lock_guard slock(s->mutex);
    if (s->record.status == SessionStatus::reported) ++a.sessions_completed;
  }
  a.block_state = randomizer_.block_counts();
  return a;
}

std::size_t SessionEngine::load_existing() {
  if (config_.data_dir.empty()) return 0;
  std::vector<std::pair<fs::path, std::vector<LogEntry>>> found;
  for (const auto& dir : fs::directory_iterator(config_.data_dir)) {
    if (!dir.is_directory() || !fs::exists(dir.path() / "log.ndjson")) continue;
    found.emplace_back(dir.path(), read_log_file(dir.path() / "log.ndjson"));
  }

  std::lock_guard lock(mutex_);
  std::vector<std::shared_ptr<Slot>> loaded;
  std::uint64_t block_assignments = 0;
  for (auto& [dir, entries] : found) {
    ReplayResult rr = replay(entries);
    if (sessions_.count(rr.record.session_id) != 0) continue;
    if (entries.front().payload.value("assignment", "") == "block") ++block_assignments;
    auto s = std::make_shared<Slot>();
    s->dir = dir;
    s->last = entries.back().timestamp;
    s->log = EventLog(dir / "log.ndjson", std::move(entries));
    s->record = std::move(rr.record);
    s->history = std::move(rr.status_history);
    s->report = std::move(rr.report);
    if (s->record.status == SessionStatus::awaiting_turn) {
      // Interrupted mid-turn: close it as a failed turn.
      const auto c = s->record.transcript.back();
      const std::string error = "turn interrupted by restart";
      s->record.failed_turns.push_back({c.text, c.timestamp, error});
      s->record.transcript.pop_back();
      s->log.append(LogKind::patient_reply, Json{{"failed", true}, {"turn_index", c.turn_index}, {"error", error}},
                    now(*s));
      transition(*s, SessionStatus::in_progress);
    }
    loaded.push_back(s);
  }
  std::sort(loaded.begin(), loaded.end(), [](const auto& a, const auto& b) {
    return std::tie(a->record.participant_id, a->record.session_number) <
           std::tie(b->record.participant_id, b->record.session_number);
  });
  for (const auto& s : loaded) {
    const auto& r = s->record;
    auto& part = participants_[r.participant_id];
    if (part.session_ids.empty()) part.persona_id = r.persona_id;
    part.session_ids.push_back(r.session_id);
    sessions_[r.session_id] = s;
  }
  // Later sessions need the prior transcript for the patient's context.
  for (const auto& [pid, part] : participants_) {
    for (std::size_t i = 1; i < part.session_ids.size(); ++i) {
      auto& s = sessions_.at(part.session_ids[i]);
      if (!s->prior_transcript) s->prior_transcript = sessions_.at(part.session_ids[i - 1])->record.transcript;
    }
  }
  for (std::uint64_t i = 0; i < block_assignments; ++i) randomizer_.next();
  return loaded.size();
}

}  // namespace mitrainer
