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

#ifndef PLWEB_ENGINE_HPP
#define PLWEB_ENGINE_HPP

#include <atomic>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "plweb/term.hpp"
#include "plweb/workspace.hpp"

namespace plweb {

struct Budget {
  double wall_time_limit = 60.0;
  int64_t inference_limit = 100'000'000;
  int64_t depth_limit = 1'000'000;
  /// Heap cells a query may hold at once.
  int64_t memory_limit = 16'000'000;
};

/// An error term raised by the running program, e.g.
/// error(type_error(callable, 1), context(call/1, _)).
class PrologError : public std::runtime_error {
 public:
  explicit PrologError(Term term);
  [[nodiscard]] const Term& term() const { return term_; }
  /// The formal part (type_error, existence_error, ...) name.
  [[nodiscard]] std::string kind() const;

 private:
  Term term_;
};

/// Thrown out of a query after abort was requested.
class QueryAborted : public std::runtime_error {
 public:
  QueryAborted() : std::runtime_error("aborted") {}
};

/// Output and input redirection for a running query.
class IoChannel {
 public:
  virtual ~IoChannel() = default;
  virtual void write(std::string_view text) = 0;
  /// Blocks until the client supplies a line. nullopt ends the query.
  virtual std::optional<std::string> read_line() = 0;
  /// A supplied line did not parse; the read is retried.
  virtual void report_input_error(const std::string& message) { (void)message; }
};

/// Collects output in memory; reads come from a fixed list.
class BufferIo : public IoChannel {
 public:
  explicit BufferIo(std::vector<std::string> input = {}) : input_(std::move(input)) {}
  void write(std::string_view text) override { output_ += text; }
  std::optional<std::string> read_line() override;
  void report_input_error(const std::string& message) override {
    errors_.push_back(message);
  }
  [[nodiscard]] const std::string& output() const { return output_; }
  [[nodiscard]] const std::vector<std::string>& errors() const { return errors_; }
  std::string take_output() { return std::exchange(output_, {}); }

 private:
  std::vector<std::string> input_;
  size_t next_ = 0;
  std::string output_;
  std::vector<std::string> errors_;
};

enum class Port { kCall, kExit, kRedo, kFail };
std::string_view port_name(Port port);

struct PortEvent {
  Port port = Port::kCall;
  Term goal;
  int depth = 0;
  std::optional<int> line;
  /// Identifies the goal frame; a retried goal gets a fresh id.
  int64_t frame = 0;
};

enum class DebugCommand { kStepInto, kStepOver, kStepOut, kRetry, kContinue, kAbort };
std::optional<DebugCommand> parse_debug_command(std::string_view text);

enum class DebugMode { kOff, kCreep, kSkip, kOut, kNodebugUntilBreakpoint };

struct DebugState {
  DebugMode mode = DebugMode::kOff;
  /// Reference depth for kSkip and kOut.
  int depth = 0;
  std::set<int> breakpoints;
};

/// Receives every port while tracing. on_pause blocks until the client
/// decides how to continue.
class DebugHook {
 public:
  virtual ~DebugHook() = default;
  /// Every traced port, paused or not.
  virtual void on_port(const PortEvent& event) { (void)event; }
  virtual DebugCommand on_pause(const PortEvent& event) = 0;
};

struct Solution {
  std::vector<std::pair<std::string, Term>> bindings;
  bool more = false;
};

struct QueryOptions {
  Budget budget;
  IoChannel* io = nullptr;
  DebugHook* debug = nullptr;
  DebugState debug_state;
  const std::atomic<bool>* abort = nullptr;
};

struct QueryStats {
  int64_t inferences = 0;
  double wall_time = 0;
};

namespace detail {
class Machine;
}

/// A lazily enumerated solution stream over one workspace.
class Query {
 public:
  /// var_names maps the query's variable names; the rest stay anonymous.
  Query(Workspace& ws, const Term& goal,
        const std::vector<std::pair<std::string, Term>>& var_names, QueryOptions options);
  ~Query();
  Query(const Query&) = delete;
  Query& operator=(const Query&) = delete;

  /// The next solution, or nullopt once the search space is exhausted.
  /// Throws PrologError or QueryAborted; the query is closed afterwards.
  std::optional<Solution> next_solution();

  struct Chunk {
    std::vector<Solution> solutions;
    bool more = false;
  };
  /// Up to n solutions. more is false exactly when the search is exhausted.
  Chunk next(size_t n);

  /// Replaces the breakpoint lines. Safe from within DebugHook callbacks.
  void set_breakpoints(std::set<int> lines);

  [[nodiscard]] bool closed() const { return closed_; }
  [[nodiscard]] QueryStats stats() const;
  /// Operator table of the workspace, for rendering answers.
  [[nodiscard]] const Workspace& workspace() const { return ws_; }

 private:
  Workspace& ws_;
  std::unique_ptr<detail::Machine> machine_;
  bool started_ = false;
  bool closed_ = false;
};

/// Runs goal to its first solution; handy for directives and tests.
std::optional<Solution> solve_once(Workspace& ws, const Term& goal,
                                   const std::vector<std::pair<std::string, Term>>& var_names,
                                   QueryOptions options = {});

/// Reads text as a query and returns all solutions (at most limit).
std::vector<Solution> solve_all(Workspace& ws, std::string_view query_text,
                                QueryOptions options = {}, size_t limit = 1'000'000);

/// Meta-argument annotation per argument: -1 for data, otherwise the
/// argument is a goal called with that many extra arguments.
struct BuiltinInfo {
  std::string name;
  size_t arity = 0;
  std::vector<int> meta;
  /// Structural control constructs (',', ';', '->', '\+', ...).
  bool control = false;
};

/// The whitelist-backing builtin table, sorted by name then arity.
const std::vector<BuiltinInfo>& builtin_table();
const BuiltinInfo* find_builtin(std::string_view name, size_t arity);
bool is_builtin(std::string_view name, size_t arity);

}  // namespace plweb

#endif  // PLWEB_ENGINE_HPP
