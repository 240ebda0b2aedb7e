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


#ifndef PLWEB_SESSION_HPP
#define PLWEB_SESSION_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "plweb/engine.hpp"
#include "plweb/modifiers.hpp"
#include "plweb/workspace.hpp"

namespace plweb {

enum class SessionState {
  kCreated,
  kRunning,
  kWaitingMore,
  kPromptingInput,
  kPausedDebug,
  kDone,
  kAborted,
  kFailedError,
  kDestroyed,
};
std::string_view session_state_name(SessionState state);
std::optional<SessionState> parse_session_state(std::string_view name);
/// done, aborted and failed_error.
bool is_terminal(SessionState state);
bool legal_transition(SessionState from, SessionState to);

class SessionError : public std::runtime_error {
 public:
  enum class Code { kNotFound, kProtocol, kTooManyEngines, kBadRequest };
  SessionError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  [[nodiscard]] Code code() const { return code_; }
  /// not_found, protocol_error, too_many_engines, bad_request.
  [[nodiscard]] std::string_view code_name() const;

 private:
  Code code_;
};

struct SessionConfig {
  Budget budget;
  size_t max_engines = 16;
  bool sandbox = true;
  /// Seconds a destroyed session stays pollable before it is forgotten.
  double destroy_grace = 60;
  /// Seconds a created session may wait for its query.
  double idle_timeout = 15 * 60;
  size_t max_chunk = 1000;
  /// Resolves include/1 while consulting.
  std::function<std::optional<std::string>(const std::string&)> include;
};

struct AskRequest {
  std::string query;
  size_t chunk = 1;
  std::vector<Modifier> modifiers;
  bool debug = false;
  /// Adds a table rendering of each chunk.
  bool table = false;
};

struct EventBatch {
  /// JSON objects with "event" and "seq" plus the per-kind payload.
  std::vector<nlohmann::json> events;
  /// Cursor acknowledging everything in this batch.
  uint64_t cursor = 0;
};

/// The registry of engine sessions. Every session answers a single query
/// on its own thread and reports through an ordered event queue.
class SessionManager {
 public:
  explicit SessionManager(SessionConfig config = {});
  ~SessionManager();
  SessionManager(const SessionManager&) = delete;
  SessionManager& operator=(const SessionManager&) = delete;

  /// Consults src into a fresh workspace; load errors become error events.
  std::string create(const std::string& src);
  void ask(const std::string& id, const AskRequest& request);
  void next(const std::string& id, size_t count);
  void stop(const std::string& id);
  /// Returns at once; the aborted event follows asynchronously.
  void abort(const std::string& id);
  void respond(const std::string& id, const std::string& input);
  void set_breakpoints(const std::string& id, std::set<int> lines);
  /// Drops events below cursor, then waits up to timeout seconds for at
  /// least one event. Without a cursor the previous batch is acknowledged.
  EventBatch pull_events(const std::string& id, std::optional<uint64_t> cursor,
                         double timeout);
  /// Ends the session whatever its state.
  void destroy(const std::string& id);

  [[nodiscard]] SessionState state(const std::string& id) const;
  /// Every state the session has been in, starting with created.
  [[nodiscard]] std::vector<SessionState> state_path(const std::string& id) const;
  /// The terminal state reached before destruction, if any.
  [[nodiscard]] std::optional<SessionState> final_state(const std::string& id) const;
  /// Sessions not yet destroyed.
  [[nodiscard]] size_t live() const;
  /// Sessions still known, destroyed ones included.
  [[nodiscard]] size_t size() const;
  /// Expires idle sessions and forgets old destroyed ones. Also runs
  /// periodically in the background.
  void reap();
  [[nodiscard]] const SessionConfig& config() const;
  /// Releases blocked pollers and refuses further pulls' waits.
  void close();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace plweb

#endif  // PLWEB_SESSION_HPP
