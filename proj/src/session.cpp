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


#include "plweb/session.hpp"

#include <chrono>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <random>
#include <thread>

#include "plweb/reader.hpp"
#include "plweb/render.hpp"
#include "plweb/sandbox.hpp"
#include "plweb/writer.hpp"

namespace plweb {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr SessionState kAllStates[] = {
    SessionState::kCreated,     SessionState::kRunning, SessionState::kWaitingMore,
    SessionState::kPromptingInput, SessionState::kPausedDebug, SessionState::kDone,
    SessionState::kAborted,     SessionState::kFailedError, SessionState::kDestroyed,
};

double seconds_since(Clock::time_point t) {
  return std::chrono::duration<double>(Clock::now() - t).count();
}

}  // namespace

std::string_view session_state_name(SessionState state) {
  switch (state) {
    case SessionState::kCreated: return "created";
    case SessionState::kRunning: return "running";
    case SessionState::kWaitingMore: return "waiting_more";
    case SessionState::kPromptingInput: return "prompting_input";
    case SessionState::kPausedDebug: return "paused_debug";
    case SessionState::kDone: return "done";
    case SessionState::kAborted: return "aborted";
    case SessionState::kFailedError: return "failed_error";
    case SessionState::kDestroyed: return "destroyed";
  }
  return "destroyed";
}

std::optional<SessionState> parse_session_state(std::string_view name) {
  for (SessionState s : kAllStates) {
    if (session_state_name(s) == name) return s;
  }
  return std::nullopt;
}

bool is_terminal(SessionState state) {
  return state == SessionState::kDone || state == SessionState::kAborted ||
         state == SessionState::kFailedError;
}

bool legal_transition(SessionState from, SessionState to) {
  using S = SessionState;
  if (from == S::kDestroyed) return false;
  if (to == S::kDestroyed) return true;
  switch (from) {
    case S::kCreated: return to == S::kRunning;
    case S::kRunning:
      return to == S::kWaitingMore || to == S::kPromptingInput || to == S::kPausedDebug ||
             to == S::kDone || to == S::kAborted || to == S::kFailedError;
    case S::kWaitingMore: return to == S::kRunning || to == S::kDone || to == S::kAborted;
    case S::kPromptingInput: return to == S::kRunning || to == S::kAborted;
    case S::kPausedDebug: return to == S::kRunning || to == S::kAborted;
    default: return false;
  }
}

std::string_view SessionError::code_name() const {
  switch (code_) {
    case Code::kNotFound: return "not_found";
    case Code::kProtocol: return "protocol_error";
    case Code::kTooManyEngines: return "too_many_engines";
    case Code::kBadRequest: return "bad_request";
  }
  return "bad_request";
}

namespace {

enum class Command { kNone, kNext, kStop, kAbort, kInput, kDebug };

/// One engine. The worker thread owns the workspace and the query; all
/// other fields are guarded by mu.
class Session : public IoChannel, public DebugHook {
 public:
  Session(std::string id, std::atomic<size_t>& live) : id_(std::move(id)), live_(live) {
    path_.push_back(SessionState::kCreated);
  }

  const std::string& id() const { return id_; }
  std::mutex& mu() const { return mu_; }
  std::condition_variable& events_cv() { return events_cv_; }

  // --- state and events (call with mu held) -----------------------------------

  SessionState state() const { return state_; }
  const std::vector<SessionState>& path() const { return path_; }
  std::optional<SessionState> final_state() const { return final_; }

  void enter(SessionState to) {
    if (!legal_transition(state_, to)) {
      throw std::logic_error("illegal session transition " +
                             std::string(session_state_name(state_)) + " -> " +
                             std::string(session_state_name(to)));
    }
    state_ = to;
    path_.push_back(to);
    if (is_terminal(to)) final_ = to;
    if (to == SessionState::kDestroyed) {
      destroyed_at_ = Clock::now();
      --live_;
    }
  }

  void emit(json ev) {
    if (ev["event"] != "output") flush_output();
    ev["seq"] = next_seq_++;
    events_.push_back(std::move(ev));
    events_cv_.notify_all();
  }

  void destroy_now() {
    flush_output();
    emit({{"event", "destroyed"}});
    enter(SessionState::kDestroyed);
    cmd_cv_.notify_all();
  }

  void touch() { last_activity_ = Clock::now(); }
  double idle_seconds() const { return seconds_since(last_activity_); }
  double destroyed_seconds() const { return seconds_since(destroyed_at_); }

  EventBatch take_events(std::optional<uint64_t> cursor) {
    uint64_t ack = cursor.value_or(delivered_);
    while (!events_.empty() && events_.front()["seq"].get<uint64_t>() < ack) {
      events_.pop_front();
    }
    EventBatch batch;
    batch.cursor = ack;
    for (const json& ev : events_) {
      if (ev["seq"].get<uint64_t>() < ack) continue;
      batch.events.push_back(ev);
      batch.cursor = ev["seq"].get<uint64_t>() + 1;
    }
    delivered_ = std::max(delivered_, batch.cursor);
    return batch;
  }

  bool has_events_from(std::optional<uint64_t> cursor) const {
    uint64_t ack = cursor.value_or(delivered_);
    return !events_.empty() && events_.back()["seq"].get<uint64_t>() >= ack;
  }

  // --- commands from the API side (call with mu held) -------------------------

  void post(Command cmd) {
    cmd_ = cmd;
    cmd_cv_.notify_all();
  }
  void post_count(size_t n) {
    count_ = n;
    post(Command::kNext);
  }
  void post_input(std::string input) {
    input_ = std::move(input);
    post(Command::kInput);
  }
  void post_debug(DebugCommand c) {
    debug_cmd_ = c;
    post(Command::kDebug);
  }
  void request_abort() {
    abort_.store(true);
    post(Command::kAbort);
  }
  bool abort_requested() const { return abort_.load(); }
  void set_pending_breakpoints(std::set<int> lines) {
    pending_breakpoints_ = std::move(lines);
    cmd_cv_.notify_all();
  }
  std::set<int>& breakpoints() { return breakpoints_; }
  bool asked() const { return asked_; }
  void mark_asked() { asked_ = true; }

  // --- worker side ---------------------------------------------------------------

  std::unique_ptr<Workspace> ws;
  std::thread worker;

  void run(const SessionConfig& config, const AskRequest& request) {
    SessionState end = run_query(config, request);
    ws.reset();
    std::lock_guard lock(mu_);
    if (state_ != end) enter(end);
    destroy_now();
  }

  void write(std::string_view text) override {
    std::lock_guard lock(mu_);
    output_ += text;
    if (output_.size() >= 4096 || seconds_since(last_flush_) > 0.1) flush_output();
  }

  std::optional<std::string> read_line() override {
    std::unique_lock lock(mu_);
    emit({{"event", "prompt"}, {"kind", "read_term"}});
    enter(SessionState::kPromptingInput);
    cmd_cv_.wait(lock, [&] { return cmd_ == Command::kInput || abort_.load(); });
    if (abort_.load()) throw QueryAborted();
    cmd_ = Command::kNone;
    return std::exchange(input_, {});
  }

  void report_input_error(const std::string& message) override {
    std::lock_guard lock(mu_);
    emit({{"event", "error"}, {"kind", "syntax_error"}, {"source", "input"},
          {"message", message}});
  }

  DebugCommand on_pause(const PortEvent& ev) override {
    std::unique_lock lock(mu_);
    json dbg = {{"event", "debug"},
                {"port", std::string(port_name(ev.port))},
                {"goal", writeq(ev.goal, ws->ops())},
                {"depth", ev.depth},
                {"frame", ev.frame}};
    dbg["line"] = ev.line ? json(*ev.line) : json(nullptr);
    emit(std::move(dbg));
    emit({{"event", "prompt"}, {"kind", "debug"}});
    enter(SessionState::kPausedDebug);
    for (;;) {
      cmd_cv_.wait(lock, [&] {
        return cmd_ == Command::kDebug || abort_.load() || pending_breakpoints_.has_value();
      });
      if (abort_.load()) return DebugCommand::kAbort;
      if (pending_breakpoints_) {
        breakpoints_ = std::move(*pending_breakpoints_);
        pending_breakpoints_.reset();
        if (query_ != nullptr) query_->set_breakpoints(breakpoints_);
        continue;
      }
      cmd_ = Command::kNone;
      return debug_cmd_;
    }
  }

 private:
  void flush_output() {
    last_flush_ = Clock::now();
    if (output_.empty()) return;
    json ev = {{"event", "output"}, {"text", std::exchange(output_, {})}};
    emit(std::move(ev));
  }

  json error_event(const PrologError& e) const {
    return {{"event", "error"},
            {"kind", e.kind()},
            {"source", "runtime"},
            {"message", writeq(e.term(), ws->ops())},
            {"term", writeq(e.term(), ws->ops())}};
  }

  json success_event(const Query::Chunk& chunk, const std::vector<std::string>& projection,
                     bool table, double time) const {
    json solutions = json::array();
    for (const Solution& s : chunk.solutions) {
      json bindings = json::array();
      for (const auto& [name, value] : s.bindings) {
        json renderings = json::array();
        for (const Rendering& r : render_term(value, *ws)) renderings.push_back(r.to_json());
        bindings.push_back({{"var", name}, {"renderings", renderings}});
      }
      solutions.push_back({{"bindings", bindings}});
    }
    json ev = {{"event", "success"},
               {"solutions", solutions},
               {"projection", projection},
               {"more", chunk.more},
               {"time", time}};
    if (table) ev["table"] = render_table(projection, chunk.solutions, *ws).to_json();
    return ev;
  }

  SessionState run_query(const SessionConfig& config, const AskRequest& request) {
    ParsedTerm pt;
    try {
      pt = read_term_from_string(request.query, ws->ops(), true);
    } catch (const SyntaxError& e) {
      std::lock_guard lock(mu_);
      emit({{"event", "error"}, {"kind", "syntax_error"}, {"source", "query"},
            {"message", e.what()}});
      return SessionState::kFailedError;
    }
    Term goal = pt.term;
    std::vector<std::pair<std::string, Term>> vars = pt.var_names;
    bool debug = request.debug;
    try {
      for (const Modifier& m : request.modifiers) {
        ModifiedQuery mq = apply_modifier(goal, vars, m);
        goal = mq.goal;
        vars = mq.var_names;
        debug = debug || mq.debug;
      }
    } catch (const PrologError& e) {
      std::lock_guard lock(mu_);
      emit(error_event(e));
      return SessionState::kFailedError;
    }
    if (config.sandbox) {
      SafetyVerdict verdict = safe_goal(goal, *ws);
      if (!verdict.safe) {
        const Violation& v = *verdict.violation;
        json trace = json::array();
        for (const Term& t : v.trace) trace.push_back(writeq(t, ws->ops()));
        std::lock_guard lock(mu_);
        emit({{"event", "error"},
              {"kind", std::string(violation_kind_name(v.kind))},
              {"source", "sandbox"},
              {"message", v.message},
              {"culprit", writeq(v.culprit, ws->ops())},
              {"trace", trace}});
        return SessionState::kFailedError;
      }
    }
    std::vector<std::string> projection;
    for (const auto& [name, var] : vars) {
      if (!name.starts_with("_")) projection.push_back(name);
    }

    QueryOptions opts;
    opts.budget = config.budget;
    opts.io = this;
    opts.debug = this;
    opts.abort = &abort_;
    {
      std::lock_guard lock(mu_);
      opts.debug_state.breakpoints = breakpoints_;
    }
    if (debug) {
      opts.debug_state.mode =
          opts.debug_state.breakpoints.empty() ? DebugMode::kCreep : DebugMode::kNodebugUntilBreakpoint;
    }
    try {
      Query q(*ws, goal, vars, opts);
      query_ = &q;
      size_t n = std::max<size_t>(1, std::min(request.chunk, config.max_chunk));
      size_t total = 0;
      for (;;) {
        auto t0 = Clock::now();
        Query::Chunk chunk = q.next(n);
        double time = seconds_since(t0);
        std::unique_lock lock(mu_);
        if (total == 0 && chunk.solutions.empty()) {
          emit({{"event", "failure"}, {"time", time}});
          query_ = nullptr;
          return SessionState::kDone;
        }
        total += chunk.solutions.size();
        emit(success_event(chunk, projection, request.table, time));
        if (!chunk.more) {
          query_ = nullptr;
          return SessionState::kDone;
        }
        enter(SessionState::kWaitingMore);
        cmd_cv_.wait(lock, [&] { return cmd_ != Command::kNone || abort_.load(); });
        Command cmd = std::exchange(cmd_, Command::kNone);
        if (abort_.load()) {
          emit({{"event", "aborted"}});
          query_ = nullptr;
          return SessionState::kAborted;
        }
        if (cmd == Command::kStop) {
          query_ = nullptr;
          return SessionState::kDone;
        }
        n = count_;
      }
    } catch (const PrologError& e) {
      query_ = nullptr;
      std::lock_guard lock(mu_);
      emit(error_event(e));
      return SessionState::kFailedError;
    } catch (const QueryAborted&) {
      query_ = nullptr;
      std::lock_guard lock(mu_);
      emit({{"event", "aborted"}});
      return SessionState::kAborted;
    } catch (const std::exception& e) {
      query_ = nullptr;
      std::lock_guard lock(mu_);
      emit({{"event", "error"}, {"kind", "system_error"}, {"source", "runtime"},
            {"message", e.what()}});
      return SessionState::kFailedError;
    }
  }

  std::string id_;
  std::atomic<size_t>& live_;
  mutable std::mutex mu_;
  std::condition_variable cmd_cv_;
  std::condition_variable events_cv_;

  SessionState state_ = SessionState::kCreated;
  std::vector<SessionState> path_;
  std::optional<SessionState> final_;
  std::deque<json> events_;
  uint64_t next_seq_ = 0;
  uint64_t delivered_ = 0;
  Clock::time_point last_activity_ = Clock::now();
  Clock::time_point destroyed_at_;

  Command cmd_ = Command::kNone;
  size_t count_ = 1;
  std::string input_;
  DebugCommand debug_cmd_ = DebugCommand::kStepInto;
  std::atomic<bool> abort_{false};
  std::set<int> breakpoints_;
  std::optional<std::set<int>> pending_breakpoints_;
  bool asked_ = false;

  Query* query_ = nullptr;
  std::string output_;
  Clock::time_point last_flush_ = Clock::now();
};

}  // namespace

struct SessionManager::Impl {
  explicit Impl(SessionConfig c) : config(std::move(c)), rng(std::random_device{}()) {}

  SessionConfig config;
  mutable std::mutex mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::atomic<size_t> live{0};
  std::atomic<bool> closed{false};
  std::mt19937_64 rng;

  std::mutex reaper_mu;
  std::condition_variable reaper_cv;
  bool stopping = false;
  std::thread reaper;

  std::string fresh_id() {
    static constexpr char kHex[] = "0123456789abcdef";
    for (;;) {
      std::string id;
      for (int i = 0; i < 2; ++i) {
        uint64_t r = rng();
        for (int j = 0; j < 16; ++j) id += kHex[(r >> (4 * j)) & 15];
      }
      if (!sessions.count(id)) return id;
    }
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lock(mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) {
      throw SessionError(SessionError::Code::kNotFound, "no such engine: " + id);
    }
    return it->second;
  }

  static SessionError protocol(const Session& s, std::string_view op) {
    return SessionError(SessionError::Code::kProtocol,
                        std::string(op) + " is not allowed in state " +
                            std::string(session_state_name(s.state())));
  }

  void reap() {
    std::vector<std::shared_ptr<Session>> gone;
    {
      std::lock_guard lock(mu);
      for (auto it = sessions.begin(); it != sessions.end();) {
        Session& s = *it->second;
        std::lock_guard slock(s.mu());
        if (s.state() == SessionState::kCreated && s.idle_seconds() > config.idle_timeout) {
          s.destroy_now();
        }
        if (s.state() == SessionState::kDestroyed &&
            s.destroyed_seconds() > config.destroy_grace) {
          gone.push_back(it->second);
          it = sessions.erase(it);
        } else {
          ++it;
        }
      }
    }
    for (auto& s : gone) {
      // Wake pollers still waiting on the forgotten session.
      s->events_cv().notify_all();
      if (s->worker.joinable()) s->worker.join();
    }
  }

  void reaper_loop() {
    std::unique_lock lock(reaper_mu);
    while (!stopping) {
      double tick = std::clamp(std::min(config.destroy_grace, config.idle_timeout) / 4, 0.01, 1.0);
      reaper_cv.wait_for(lock, std::chrono::duration<double>(tick));
      if (stopping) break;
      lock.unlock();
      reap();
      lock.lock();
    }
  }
};

SessionManager::SessionManager(SessionConfig config)
    : impl_(std::make_unique<Impl>(std::move(config))) {
  impl_->reaper = std::thread([this] { impl_->reaper_loop(); });
}

SessionManager::~SessionManager() {
  {
    std::lock_guard lock(impl_->reaper_mu);
    impl_->stopping = true;
  }
  impl_->reaper_cv.notify_all();
  impl_->reaper.join();
  std::map<std::string, std::shared_ptr<Session>> all;
  {
    std::lock_guard lock(impl_->mu);
    all = std::move(impl_->sessions);
  }
  for (auto& [id, s] : all) {
    std::lock_guard lock(s->mu());
    if (s->state() == SessionState::kCreated) {
      s->destroy_now();
    } else if (s->state() != SessionState::kDestroyed) {
      s->request_abort();
    }
  }
  for (auto& [id, s] : all) {
    if (s->worker.joinable()) s->worker.join();
  }
}

std::string SessionManager::create(const std::string& src) {
  std::shared_ptr<Session> s;
  {
    std::lock_guard lock(impl_->mu);
    if (impl_->live.load() >= impl_->config.max_engines) {
      throw SessionError(SessionError::Code::kTooManyEngines,
                         "engine limit of " + std::to_string(impl_->config.max_engines) +
                             " reached");
    }
    ++impl_->live;
    s = std::make_shared<Session>(impl_->fresh_id(), impl_->live);
    impl_->sessions.emplace(s->id(), s);
  }
  auto ws = std::make_unique<Workspace>();
  ConsultOptions opts;
  opts.include = impl_->config.include;
  if (impl_->config.sandbox) {
    opts.check_directive = check_directive;
  } else {
    opts.run_other_directives = true;
  }
  std::vector<LoadError> errors = consult_text(*ws, src, opts);

  std::lock_guard lock(s->mu());
  json created = {{"event", "create"},
                  {"id", s->id()},
                  {"renderers", ws->renderers()},
                  {"examples", extract_examples(src)}};
  s->emit(std::move(created));
  for (const LoadError& e : errors) {
    s->emit({{"event", "error"},
             {"kind", e.kind},
             {"source", "load"},
             {"message", e.message},
             {"line", e.line}});
  }
  s->ws = std::move(ws);
  s->touch();
  return s->id();
}

void SessionManager::ask(const std::string& id, const AskRequest& request) {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  s->touch();
  if (s->asked() || s->state() != SessionState::kCreated) throw Impl::protocol(*s, "ask");
  s->mark_asked();
  s->enter(SessionState::kRunning);
  const SessionConfig& config = impl_->config;
  s->worker = std::thread([s, &config, request] { s->run(config, request); });
}

void SessionManager::next(const std::string& id, size_t count) {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  s->touch();
  if (s->state() != SessionState::kWaitingMore) throw Impl::protocol(*s, "next");
  s->enter(SessionState::kRunning);
  s->post_count(std::clamp<size_t>(count, 1, impl_->config.max_chunk));
}

void SessionManager::stop(const std::string& id) {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  s->touch();
  if (s->state() != SessionState::kWaitingMore) throw Impl::protocol(*s, "stop");
  s->emit({{"event", "stopped"}});
  s->enter(SessionState::kDone);
  s->post(Command::kStop);
}

void SessionManager::abort(const std::string& id) {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  s->touch();
  switch (s->state()) {
    case SessionState::kRunning:
    case SessionState::kWaitingMore:
    case SessionState::kPromptingInput:
    case SessionState::kPausedDebug: s->request_abort(); return;
    default: throw Impl::protocol(*s, "abort");
  }
}

void SessionManager::respond(const std::string& id, const std::string& input) {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  s->touch();
  if (s->abort_requested()) throw Impl::protocol(*s, "respond");
  if (s->state() == SessionState::kPromptingInput) {
    s->enter(SessionState::kRunning);
    s->post_input(input);
    return;
  }
  if (s->state() == SessionState::kPausedDebug) {
    std::optional<DebugCommand> cmd = parse_debug_command(input);
    if (!cmd) {
      throw SessionError(SessionError::Code::kBadRequest, "unknown debug command: " + input);
    }
    s->enter(SessionState::kRunning);
    s->post_debug(*cmd);
    return;
  }
  throw Impl::protocol(*s, "respond");
}

void SessionManager::set_breakpoints(const std::string& id, std::set<int> lines) {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  s->touch();
  if (s->state() == SessionState::kCreated) {
    s->breakpoints() = std::move(lines);
  } else if (s->state() == SessionState::kPausedDebug) {
    s->set_pending_breakpoints(std::move(lines));
  } else {
    throw Impl::protocol(*s, "set_breakpoints");
  }
}

EventBatch SessionManager::pull_events(const std::string& id, std::optional<uint64_t> cursor,
                                       double timeout) {
  auto s = impl_->find(id);
  std::unique_lock lock(s->mu());
  s->touch();
  if (!s->has_events_from(cursor) && timeout > 0 && !impl_->closed.load()) {
    auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                       std::chrono::duration<double>(timeout));
    s->events_cv().wait_until(lock, deadline, [&] {
      return s->has_events_from(cursor) || s->state() == SessionState::kDestroyed ||
             impl_->closed.load();
    });
  }
  s->touch();
  return s->take_events(cursor);
}

void SessionManager::destroy(const std::string& id) {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  switch (s->state()) {
    case SessionState::kCreated: s->destroy_now(); return;
    case SessionState::kDestroyed: return;
    default:
      // The worker reports aborted and destroyed once it unwinds.
      if (!is_terminal(s->state())) s->request_abort();
      return;
  }
}

SessionState SessionManager::state(const std::string& id) const {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  return s->state();
}

std::vector<SessionState> SessionManager::state_path(const std::string& id) const {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  return s->path();
}

std::optional<SessionState> SessionManager::final_state(const std::string& id) const {
  auto s = impl_->find(id);
  std::lock_guard lock(s->mu());
  return s->final_state();
}

size_t SessionManager::live() const { return impl_->live.load(); }

size_t SessionManager::size() const {
  std::lock_guard lock(impl_->mu);
  return impl_->sessions.size();
}

void SessionManager::reap() { impl_->reap(); }

const SessionConfig& SessionManager::config() const { return impl_->config; }

void SessionManager::close() {
  impl_->closed.store(true);
  std::lock_guard lock(impl_->mu);
  for (auto& [id, s] : impl_->sessions) {
    std::lock_guard slock(s->mu());
    s->events_cv().notify_all();
  }
}

}  // namespace plweb
