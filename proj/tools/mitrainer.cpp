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

// mitrainer: serve the API, run scripted mock sessions, replay logs and
// run the persona fidelity probe.

#include <atomic>
#include <chrono>
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "mitrainer/api.hpp"
#include "mitrainer/config.hpp"
#include "mitrainer/fidelity.hpp"
#include "mitrainer/report.hpp"

namespace fs = std::filesystem;
using namespace mitrainer;

namespace {

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop.store(true); }

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> read_script(const fs::path& path) {
  std::vector<std::string> lines;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw InvalidArgument("script " + path.string() + " has no utterances");
  return lines;
}

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw InvalidArgument("cannot write " + out_path);
  out << text;
  if (!out.flush()) throw InvalidArgument("failed writing " + out_path);
}

std::string render(const DashboardReport& report, const std::string& format) {
  return format == "json" ? serialize_report(report) : report_text(report);
}

struct ServeOptions {
  std::string config;
};

int run_serve(const ServeOptions& opt) {
  const ServiceConfig config = load_config(opt.config);
  validate_for_serving(config);
  SessionEngine engine(config.engine, load_catalog(config), make_backend(config.backend));
  const auto reloaded = engine.load_existing();
  HttpServer server(engine, config.listen_host, config.listen_port);
  server.start();
  std::cout << "mitrainer listening on http://" << server.host() << ":" << server.port() << kApiPrefix
            << " (backend " << enum_name(config.backend.kind) << ", data_dir " << config.engine.data_dir.string()
            << ", " << reloaded << " session(s) reloaded)" << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop.load()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  std::cout << "mitrainer stopped" << std::endl;
  return 0;
}

struct SimulateOptions {
  std::string backend = "mock";
  std::string config;
  std::string persona;
  std::string script;
  std::uint64_t seed = 0;
  std::string format = "json";
  std::string out;
  std::string data_dir;
  std::string participant = "sim";
};

int run_simulate(const SimulateOptions& opt) {
  ServiceConfig config;
  if (!opt.config.empty()) config = load_config(opt.config);
  config.backend.kind = *parse_enum<BackendKind>(opt.backend);
  config.backend.mock_seed = opt.seed;
  config.engine.seed = opt.seed;
  config.engine.data_dir = opt.data_dir;
  if (!opt.data_dir.empty()) fs::create_directories(opt.data_dir);

  const auto lines = read_script(opt.script);
  const PersonaCatalog catalog = load_catalog(config);
  catalog.at(opt.persona);
  std::cerr << "seed: " << opt.seed << "\n";

  // Fixed clock start so timestamps in the log repeat across runs.
  SessionEngine engine(config.engine, catalog, make_backend(config.backend),
                       std::make_shared<SteppingClock>(Timestamp{}));
  const auto created = engine.create_session(opt.participant, opt.seed, opt.persona);
  for (const auto& line : lines) engine.submit_utterance(created.session_id, line);
  const auto end = engine.end_session(created.session_id);
  for (const auto& e : end.errors) std::cerr << "warning: " << e << "\n";
  if (!opt.data_dir.empty()) std::cerr << "log: " << (fs::path(opt.data_dir) / created.session_id / "log.ndjson").string() << "\n";
  emit(render(engine.report(created.session_id), opt.format), opt.out);
  return 0;
}

struct ReportOptions {
  std::string log;
  std::string format = "json";
  std::string out;
};

int run_report(const ReportOptions& opt) {
  const auto entries = read_log_file(opt.log);
  const ReplayResult rr = replay(entries);
  if (!rr.report) throw InvalidState("log " + opt.log + " ends before a report was built");
  const std::string bytes = serialize_report(*rr.report);
  const fs::path stored = fs::path(opt.log).parent_path() / "report_v1.json";
  if (fs::exists(stored) && read_text(stored) != bytes) {
    throw InvalidState("replayed report differs from " + stored.string());
  }
  emit(opt.format == "json" ? bytes : report_text(*rr.report), opt.out);
  return 0;
}

struct ProbeOptions {
  std::string personas = "all";
  int sessions_per = 2;
  std::uint64_t seed = 0;
  bool perfect = false;
  std::string format = "text";
  std::string out;
};

int run_probe(const ProbeOptions& opt) {
  FidelityProbeConfig pc;
  pc.sessions_per_persona = opt.sessions_per;
  pc.seed = opt.seed;
  pc.script = default_probe_script();
  if (opt.personas != "all") {
    std::stringstream ss(opt.personas);
    std::string id;
    while (std::getline(ss, id, ',')) {
      if (!id.empty()) pc.persona_ids.push_back(id);
    }
    if (pc.persona_ids.empty()) throw InvalidArgument("--personas lists no persona ids");
  }
  std::cerr << "seed: " << opt.seed << "\n";
  const Guesser guesser = opt.perfect ? Guesser(perfect_guess) : Guesser(keyword_guess);
  const auto report = fidelity_probe(PersonaCatalog::builtin(), pc, guesser);
  emit(opt.format == "json" ? fidelity_table_json(report).dump(2) + "\n" : fidelity_table_text(report), opt.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mitrainer: simulated-patient counselor training service"};
  app.require_subcommand(1);

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Start the HTTP API");
  serve_cmd->add_option("--config", serve.config, "Config file (JSON)")->required();

  SimulateOptions sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run one scripted session and print its report");
  sim_cmd->add_option("--backend", sim.backend, "mock or live")->check(CLI::IsMember({"mock", "live"}));
  sim_cmd->add_option("--config", sim.config, "Config file for live backend settings");
  sim_cmd->add_option("--persona", sim.persona, "Persona id")->required();
  sim_cmd->add_option("--script", sim.script, "Counselor utterances, one per line")->required();
  sim_cmd->add_option("--seed", sim.seed, "Session and mock seed");
  sim_cmd->add_option("--format", sim.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  sim_cmd->add_option("--out", sim.out, "Write the report here instead of stdout");
  sim_cmd->add_option("--data-dir", sim.data_dir, "Persist the session log and report under this directory");
  sim_cmd->add_option("--participant", sim.participant, "Participant id");

  ReportOptions rep;
  auto* rep_cmd = app.add_subcommand("report", "Rebuild a report from a session log");
  rep_cmd->add_option("--log", rep.log, "Path to log.ndjson")->required();
  rep_cmd->add_option("--format", rep.format, "json or text")->check(CLI::IsMember({"json", "text"}));
  rep_cmd->add_option("--out", rep.out, "Write the report here instead of stdout");

  ProbeOptions probe;
  auto* probe_cmd = app.add_subcommand("probe-fidelity", "Tally attribute guesses over mock sessions");
  probe_cmd->add_option("--personas", probe.personas, "'all' or comma-separated persona ids");
  probe_cmd->add_option("--sessions-per", probe.sessions_per, "Sessions per persona");
  probe_cmd->add_option("--seed", probe.seed, "Mock seed");
  probe_cmd->add_flag("--perfect-guesser", probe.perfect, "Use the oracle guesser");
  probe_cmd->add_option("--format", probe.format, "text or json")->check(CLI::IsMember({"text", "json"}));
  probe_cmd->add_option("--out", probe.out, "Write the table here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return run_serve(serve);
    if (*sim_cmd) return run_simulate(sim);
    if (*rep_cmd) return run_report(rep);
    if (*probe_cmd) return run_probe(probe);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
