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

#include "plweb/engine.hpp"

#include <set>
#include <unordered_map>

#include "machine.hpp"
#include "plweb/reader.hpp"
#include "plweb/writer.hpp"

namespace plweb {

PrologError::PrologError(Term term) : std::runtime_error(writeq(term)), term_(std::move(term)) {}

std::string PrologError::kind() const {
  const Term& formal = term_.is_compound("error", 2) ? term_.arg(0) : term_;
  if (formal.is_atom() || formal.is_compound()) return formal.name();
  return "error";
}

std::optional<std::string> BufferIo::read_line() {
  if (next_ >= input_.size()) return std::nullopt;
  return input_[next_++];
}

std::string_view port_name(Port port) {
  switch (port) {
    case Port::kCall: return "call";
    case Port::kExit: return "exit";
    case Port::kRedo: return "redo";
    case Port::kFail: return "fail";
  }
  return "call";
}

std::optional<DebugCommand> parse_debug_command(std::string_view text) {
  if (text == "step_into") return DebugCommand::kStepInto;
  if (text == "step_over") return DebugCommand::kStepOver;
  if (text == "step_out") return DebugCommand::kStepOut;
  if (text == "retry") return DebugCommand::kRetry;
  if (text == "continue") return DebugCommand::kContinue;
  if (text == "abort") return DebugCommand::kAbort;
  return std::nullopt;
}

namespace {

/// Gives unnamed variables in answers the names _A, _B, ... in order of
/// first occurrence, skipping names taken by the query.
class FreshNames {
 public:
  explicit FreshNames(const std::vector<std::pair<std::string, Term>>& bindings) {
    for (const auto& b : bindings) taken_.insert(b.first);
  }

  Term rename(const Term& t) {
    if (t.is_var()) {
      if (!t.name().empty()) return t;
      auto [it, fresh] = names_.try_emplace(t.var_id());
      if (fresh) it->second = next_name();
      return Term::Var(t.var_id(), it->second);
    }
    if (!t.is_compound()) return t;
    if (t.is_list_cell()) {
      std::vector<Term> items;
      Term cur = t;
      while (cur.is_list_cell()) {
        items.push_back(rename(cur.arg(0)));
        cur = cur.arg(1);
      }
      return Term::List(std::move(items), rename(cur));
    }
    std::vector<Term> args;
    for (const Term& a : t.args()) args.push_back(rename(a));
    return Term::Compound(t.name(), std::move(args));
  }

 private:
  std::string next_name() {
    for (;;) {
      std::string name = "_";
      size_t n = counter_++;
      std::string suffix;
      do {
        suffix.insert(suffix.begin(), static_cast<char>('A' + n % 26));
        n /= 26;
      } while (n-- > 0);
      name += suffix;
      if (!taken_.count(name)) return name;
    }
  }

  std::set<std::string> taken_;
  std::unordered_map<int64_t, std::string> names_;
  size_t counter_ = 0;
};

}  // namespace

Query::Query(Workspace& ws, const Term& goal,
             const std::vector<std::pair<std::string, Term>>& var_names, QueryOptions options)
    : ws_(ws), machine_(std::make_unique<detail::Machine>(ws.db(), std::move(options))) {
  machine_->load_goal(goal, var_names);
}

Query::~Query() = default;

std::optional<Solution> Query::next_solution() {
  if (closed_) return std::nullopt;
  started_ = true;
  bool ok = false;
  try {
    ok = machine_->next();
  } catch (...) {
    closed_ = true;
    throw;
  }
  if (!ok) {
    closed_ = true;
    return std::nullopt;
  }
  Solution s = machine_->solution();
  FreshNames names(s.bindings);
  for (auto& b : s.bindings) b.second = names.rename(b.second);
  s.more = machine_->has_alternatives();
  if (!s.more) closed_ = true;
  return s;
}

Query::Chunk Query::next(size_t n) {
  Chunk chunk;
  while (chunk.solutions.size() < n) {
    std::optional<Solution> s = next_solution();
    if (!s) break;
    chunk.solutions.push_back(std::move(*s));
  }
  chunk.more = !closed_;
  return chunk;
}

void Query::set_breakpoints(std::set<int> lines) { machine_->set_breakpoints(std::move(lines)); }

QueryStats Query::stats() const { return machine_->stats(); }

std::optional<Solution> solve_once(Workspace& ws, const Term& goal,
                                   const std::vector<std::pair<std::string, Term>>& var_names,
                                   QueryOptions options) {
  Query q(ws, goal, var_names, std::move(options));
  return q.next_solution();
}

std::vector<Solution> solve_all(Workspace& ws, std::string_view query_text, QueryOptions options,
                                size_t limit) {
  ParsedTerm pt = read_term_from_string(query_text, ws.ops(), true);
  Query q(ws, pt.term, pt.var_names, std::move(options));
  std::vector<Solution> out;
  while (out.size() < limit) {
    std::optional<Solution> s = q.next_solution();
    if (!s) break;
    out.push_back(std::move(*s));
  }
  return out;
}

}  // namespace plweb
