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

#ifndef PLWEB_MACHINE_HPP
#define PLWEB_MACHINE_HPP

#include <chrono>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "cells.hpp"
#include "database.hpp"
#include "plweb/engine.hpp"
#include "plweb/writer.hpp"

namespace plweb::detail {

enum class FrameKind : uint8_t {
  kGoal,
  kCutTo,
  kFail,
  kTraceExit,
  kCollect,
  kLimit,
  kDistinct,
  kTimeExit,
};

/// One continuation cell. Continuations are immutable linked lists shared
/// between choicepoints, with intrusive reference counts.
struct Frame {
  uint32_t refs = 1;
  FrameKind kind = FrameKind::kGoal;
  int32_t tdepth = 0;
  uint32_t height = 1;
  uint64_t goal = 0;
  uint64_t cut = 0;
  int64_t aux = 0;
  Frame* next = nullptr;
};

class FrameRef {
 public:
  FrameRef() = default;
  explicit FrameRef(Frame* f) : f_(f) {}
  FrameRef(const FrameRef& o) : f_(o.f_) {
    if (f_) ++f_->refs;
  }
  FrameRef(FrameRef&& o) noexcept : f_(std::exchange(o.f_, nullptr)) {}
  FrameRef& operator=(FrameRef o) noexcept {
    std::swap(f_, o.f_);
    return *this;
  }
  ~FrameRef() { release(f_); }

  [[nodiscard]] Frame* get() const { return f_; }
  Frame* operator->() const { return f_; }
  explicit operator bool() const { return f_ != nullptr; }
  /// Gives up ownership.
  Frame* detach() { return std::exchange(f_, nullptr); }

  static void release(Frame* f) {
    // Iterative so that long continuations do not recurse.
    while (f != nullptr && --f->refs == 0) {
      Frame* next = f->next;
      delete f;
      f = next;
    }
  }

 private:
  Frame* f_ = nullptr;
};

enum class CpKind : uint8_t {
  kClauses,
  kAlt,
  kRedo,
  kCollectEnd,
  kFailPort,
  kRedoPort,
  kTimeFail,
};

struct ChoicePoint {
  CpKind kind = CpKind::kAlt;
  uint64_t heap_top = 0;
  uint64_t trail_top = 0;
  FrameRef cont;
  uint64_t goal = 0;
  uint64_t cut = 0;
  int32_t tdepth = 0;
  int64_t aux = 0;
  int64_t state = 0;
  std::shared_ptr<const ClauseList> clauses;
};

struct Number {
  bool is_int = true;
  int64_t i = 0;
  double f = 0;
  [[nodiscard]] double as_double() const { return is_int ? static_cast<double>(i) : f; }
};

class Machine;

/// Result of a nondeterministic builtin step.
enum class Redo { kFail, kLast, kMore };

using DetBuiltin = bool (*)(Machine& m, uint64_t args);
using NondetBuiltin = Redo (*)(Machine& m, uint64_t args, int64_t& state);

struct BuiltinEntry {
  DetBuiltin det = nullptr;
  NondetBuiltin nondet = nullptr;
  bool traced = true;
};

/// State of findall/3, aggregate_all/3, limit/2, distinct/2 and time/1.
struct Collector {
  std::vector<Template> results;
  int64_t count = 0;
  int64_t max = 0;
  uint64_t template_slot = 0;
  uint64_t result_slot = 0;
  uint32_t aggregate = 0;
  std::unordered_set<std::string> seen;
  /// Direction per order_by key.
  std::vector<bool> desc;
  double start_elapsed = 0;
  int64_t start_inferences = 0;
};

class Machine {
 public:
  Machine(Database& db, QueryOptions options);
  ~Machine();

  /// Places the goal on the heap; returns the address of each named
  /// variable.
  void load_goal(const Term& goal, const std::vector<std::pair<std::string, Term>>& var_names);
  /// Runs to the next solution. The first call starts the query.
  bool next();
  [[nodiscard]] bool has_alternatives() const;
  Solution solution() const;
  [[nodiscard]] QueryStats stats() const;
  /// Replaces the breakpoint lines; call only between ports.
  void set_breakpoints(std::set<int> lines);

  // Heap access for builtins.
  Database& db() { return db_; }
  std::vector<Cell>& heap() { return heap_; }
  uint64_t deref(uint64_t addr) const {
    for (;;) {
      const Cell& c = heap_[addr];
      if (c.tag != Tag::kRef || c.u == addr) return addr;
      addr = c.u;
    }
  }
  [[nodiscard]] const Cell& cell(uint64_t addr) const { return heap_[addr]; }
  [[nodiscard]] bool is_unbound(uint64_t addr) const {
    addr = deref(addr);
    return heap_[addr].tag == Tag::kRef;
  }
  uint64_t new_var();
  uint64_t new_cell(Cell c);
  /// Allocates functor + arity unbound argument cells; returns the address
  /// of a Struct cell pointing at them.
  uint64_t new_struct(uint32_t name, uint32_t arity);
  uint64_t new_struct_cell(uint32_t name, uint32_t arity, uint64_t* args_out);
  uint64_t new_list(const std::vector<uint64_t>& items, uint64_t tail);
  uint64_t new_atom(uint32_t id) { return new_cell(Cell::Atom(id)); }
  uint64_t new_int(int64_t v) { return new_cell(Cell::Int(v)); }
  /// Address of argument i (0-based) of the compound at addr.
  uint64_t arg(uint64_t addr, size_t i) const { return heap_[deref(addr)].u + 1 + i; }
  [[nodiscard]] const Cell& functor(uint64_t addr) const { return heap_[heap_[deref(addr)].u]; }

  bool unify(uint64_t a, uint64_t b);
  /// Whether a and b unify; leaves no bindings.
  bool would_unify(uint64_t a, uint64_t b);
  bool unify_cell(uint64_t a, Cell c) { return unify(a, new_cell(c)); }
  int compare(uint64_t a, uint64_t b);
  bool variant(uint64_t a, uint64_t b);
  /// Canonical text identifying a term up to variable renaming.
  std::string variant_key(uint64_t addr);

  Template copy_out(const std::vector<uint64_t>& roots);
  /// Instantiates a template; returns the address of root 0.
  uint64_t copy_in(const Template& t);
  /// Converts to a tree term. Unbound variables keep their address as id.
  Term export_term(uint64_t addr, size_t max_depth = kDefaultWriteDepth) const;
  uint64_t import_term(const Term& t, std::unordered_map<int64_t, uint64_t>* vars = nullptr);

  Number eval(uint64_t addr);
  uint64_t number_cell(const Number& n) {
    return new_cell(n.is_int ? Cell::Int(n.i) : Cell::Flt(n.f));
  }

  // Errors raised as PrologError terms.
  [[noreturn]] void throw_error(const Term& formal);
  [[noreturn]] void instantiation_error();
  [[noreturn]] void type_error(std::string_view type, uint64_t culprit);
  [[noreturn]] void domain_error(std::string_view domain, uint64_t culprit);
  [[noreturn]] void representation_error(std::string_view what);
  [[noreturn]] void evaluation_error(std::string_view what);
  [[noreturn]] void resource_error(std::string_view what);
  [[noreturn]] void permission_error(std::string_view action, std::string_view type,
                                     const Term& culprit);
  [[noreturn]] void existence_error(std::string_view type, const Term& culprit);

  /// Text of an atom, number or string; "" and false for other terms.
  bool text_of(uint64_t addr, std::string& out) const;
  /// The elements of a proper list. Throws on partial lists when strict.
  bool list_elements(uint64_t addr, std::vector<uint64_t>& out) const;

  void write_output(std::string_view text);
  std::optional<std::string> read_input();
  void report_input_error(const std::string& message);

  void assert_clause(uint64_t clause, bool at_end);
  bool retract_clause(uint64_t clause);

  const std::string& atom_name(uint32_t id) const { return db_.atoms.name(id); }
  uint32_t intern(std::string_view name) { return db_.atoms.intern(name); }
  int64_t inferences() const { return inferences_; }
  double elapsed() const;

  /// Sets up renaming for the named query variables.
  std::string format_term(uint64_t addr, bool quoted) const;

 private:
  void push_goal(uint64_t goal, uint64_t cut, int32_t tdepth);
  void push_frame(FrameKind kind, uint64_t goal, uint64_t cut, int32_t tdepth, int64_t aux);
  ChoicePoint& push_cp(CpKind kind);
  void cut_to(uint64_t height);
  void undo_to(const ChoicePoint& cp);
  void bind(uint64_t var, uint64_t value);
  bool backtrack();
  bool run();
  bool step(Frame* f);
  bool call_goal(uint64_t slot, uint64_t cut, int32_t tdepth, bool traced_ok = true);
  bool call_predicate(uint64_t goal, uint64_t key, const Predicate& pred, int32_t tdepth);
  size_t next_matching(const ClauseList& clauses, size_t from, uint64_t goal) const;
  bool resolve(const Clause& c, uint64_t goal, uint64_t cut, int32_t tdepth);
  bool call_builtin(uint64_t goal, const BuiltinEntry& b);
  bool call_meta(uint32_t name, uint32_t arity, uint64_t goal, uint64_t cut, int32_t tdepth,
                 bool& handled);
  bool finish_collect(int64_t id, int32_t tdepth);
  void report_time(int64_t id);
  uint64_t add_args(uint64_t goal, const uint64_t* extra, size_t n);
  void check_budget();
  Frame* new_frame(FrameKind kind, uint64_t goal, uint64_t cut, int32_t tdepth, int64_t aux,
                   Frame* next);

  // Tracing.
  bool trace_call(uint64_t slot, uint64_t goal, uint64_t cut, int32_t tdepth, int line = -1);
  bool trace_exit(Frame* f);
  bool do_retry(uint64_t fail_port);
  void trace_port(Port port, uint64_t goal, int32_t depth, int64_t frame, int line,
                  bool& retry);
  bool should_pause(Port port, int32_t depth, int line) const;
  int line_of(uint64_t slot) const;

  Database& db_;
  QueryOptions opts_;
  std::vector<Cell> heap_;
  std::vector<uint64_t> trail_;
  std::vector<ChoicePoint> cps_;
  FrameRef cont_;
  std::unordered_map<int64_t, Collector> collectors_;
  int64_t next_collector_ = 0;
  std::vector<std::pair<std::string, uint64_t>> query_vars_;
  std::unordered_map<uint64_t, std::string> var_names_;
  uint64_t query_root_ = 0;
  bool started_ = false;

  int64_t inferences_ = 0;
  int64_t steps_ = 0;
  double active_before_ = 0;
  std::chrono::steady_clock::time_point run_started_;
  double paused_in_run_ = 0;
  bool running_ = false;

  bool tracing_ = false;
  std::vector<uint32_t> heap_line_;
  int64_t next_frame_id_ = 0;
};

/// The builtin implementation for a functor key, or nullptr. Keys are
/// stable across workspaces because builtin names are interned first.
const BuiltinEntry* lookup_builtin(uint64_t key);

std::vector<std::string> arithmetic_function_names();

/// Names interned into every database before any program text.
const std::vector<std::string>& reserved_atoms();

}  // namespace plweb::detail

#endif  // PLWEB_MACHINE_HPP
