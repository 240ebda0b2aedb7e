/**
 * Copyright 2026 The plweb Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "plweb/engine.hpp"
#include "plweb/highlight.hpp"
#include "plweb/modifiers.hpp"
#include "plweb/reader.hpp"
#include "plweb/sandbox.hpp"
#include "plweb/server.hpp"
#include "plweb/writer.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

int serve(plweb::ServerConfig config) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  plweb::Server server(config);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  std::fprintf(stderr, "listening on http://%s:%d\n", config.host.c_str(), config.port);
  bool ok = server.listen();
  if (!ok) {
    std::fprintf(stderr, "cannot listen on %s:%d\n", config.host.c_str(), config.port);
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  return ok ? 0 : 1;
}

int run(const std::string& file, const std::string& query,
        const std::vector<std::string>& modifiers, size_t limit, bool sandbox,
        const plweb::Budget& budget) {
  plweb::Workspace ws;
  plweb::ConsultOptions opts;
  if (sandbox) {
    opts.check_directive = plweb::check_directive;
  } else {
    opts.run_other_directives = true;
  }
  if (!file.empty()) {
    for (const plweb::LoadError& e : plweb::consult_text(ws, read_file(file), opts)) {
      std::fprintf(stderr, "%s:%zu: %s: %s\n", file.c_str(), e.line, e.kind.c_str(),
                   e.message.c_str());
    }
  }
  plweb::ParsedTerm pt = plweb::read_term_from_string(query, ws.ops(), true);
  plweb::Term goal = pt.term;
  auto vars = pt.var_names;
  for (const std::string& text : modifiers) {
    std::optional<plweb::Modifier> m = plweb::parse_modifier(text);
    if (!m) throw std::runtime_error("unknown modifier " + text);
    plweb::ModifiedQuery mq = plweb::apply_modifier(goal, vars, *m);
    goal = mq.goal;
    vars = mq.var_names;
  }
  if (sandbox) {
    plweb::SafetyVerdict v = plweb::safe_goal(goal, ws);
    if (!v.safe) {
      std::fprintf(stderr, "unsafe (%s): %s\n",
                   std::string(plweb::violation_kind_name(v.violation->kind)).c_str(),
                   v.violation->message.c_str());
      return 2;
    }
  }
  struct StdIo : plweb::IoChannel {
    void write(std::string_view text) override { std::cout << text << std::flush; }
    std::optional<std::string> read_line() override {
      std::string line;
      if (!std::getline(std::cin, line)) return std::nullopt;
      return line;
    }
    void report_input_error(const std::string& message) override {
      std::cerr << "input: " << message << "\n";
    }
  } io;
  plweb::QueryOptions qopts;
  qopts.budget = budget;
  qopts.io = &io;
  plweb::Query q(ws, goal, vars, qopts);
  size_t count = 0;
  try {
    while (count < limit) {
      std::optional<plweb::Solution> s = q.next_solution();
      if (!s) break;
      ++count;
      std::string line;
      for (const auto& [name, value] : s->bindings) {
        if (name.starts_with("_")) continue;
        if (!line.empty()) line += ",\n";
        line += name + " = " + plweb::write_answer(value, ws.ops());
      }
      std::cout << (line.empty() ? "true" : line) << (s->more ? " ;" : ".") << "\n";
      if (!s->more) break;
    }
  } catch (const plweb::PrologError& e) {
    std::cerr << "error: " << plweb::writeq(e.term(), ws.ops()) << "\n";
    return 1;
  }
  if (count == 0) std::cout << "false.\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prolog web workbench"};
  app.require_subcommand(1);

  plweb::ServerConfig config;
  config.data_root = "plweb-data";
  plweb::Budget budget;
  bool no_sandbox = false;

  CLI::App* serve_cmd = app.add_subcommand("serve", "Run the HTTP server");
  serve_cmd->add_option("--host", config.host, "Address to bind")->envname("PLWEB_HOST");
  serve_cmd->add_option("--port", config.port, "Port to listen on")->envname("PLWEB_PORT");
  serve_cmd->add_option("--data", config.data_root, "Program store directory")
      ->envname("PLWEB_DATA");
  serve_cmd->add_option("--static", config.static_root, "Web client assets")
      ->envname("PLWEB_STATIC");
  serve_cmd->add_option("--max-engines", config.sessions.max_engines,
                        "Concurrent engine limit")
      ->envname("PLWEB_MAX_ENGINES");
  serve_cmd->add_option("--threads", config.threads, "HTTP worker threads");
  serve_cmd->add_flag("--access-log", config.access_log, "Log each request to stderr");

  std::string file;
  std::string query;
  std::vector<std::string> modifiers;
  size_t limit = 1'000'000;
  CLI::App* run_cmd = app.add_subcommand("run", "Consult a file and run one query");
  run_cmd->add_option("query", query, "Query text")->required();
  run_cmd->add_option("-f,--file", file, "Program to consult");
  run_cmd->add_option("-m,--modifier", modifiers, "count_all, distinct, limit(N), ...");
  run_cmd->add_option("-n,--limit", limit, "Maximum number of answers");

  std::string tokens_file;
  CLI::App* tokens_cmd = app.add_subcommand("tokens", "Print the highlight payload of a file");
  tokens_cmd->add_option("file", tokens_file)->required();

  for (CLI::App* cmd : {serve_cmd, run_cmd}) {
    cmd->add_flag("--no-sandbox", no_sandbox, "Run without the safety analysis")
        ->envname("PLWEB_NO_SANDBOX");
    cmd->add_option("--wall-limit", budget.wall_time_limit, "Seconds per query")
        ->envname("PLWEB_WALL_LIMIT");
    cmd->add_option("--inference-limit", budget.inference_limit, "Inferences per query")
        ->envname("PLWEB_INFERENCE_LIMIT");
    cmd->add_option("--depth-limit", budget.depth_limit, "Maximum recursion depth")
        ->envname("PLWEB_DEPTH_LIMIT");
    cmd->add_option("--memory-limit", budget.memory_limit, "Heap cells per query")
        ->envname("PLWEB_MEMORY_LIMIT");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) {
      config.sessions.budget = budget;
      config.sessions.sandbox = !no_sandbox;
      return serve(config);
    }
    if (*run_cmd) return run(file, query, modifiers, limit, !no_sandbox, budget);
    if (*tokens_cmd) {
      plweb::MirrorRegistry mirrors;
      mirrors.set_text("file", read_file(tokens_file));
      std::cout << plweb::tokens_to_json(mirrors.enriched_tokens("file")).dump(2) << "\n";
      return 0;
    }
  } catch (const plweb::SyntaxError& e) {
    std::cerr << "syntax error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return 1;
  }
  return 0;
}
