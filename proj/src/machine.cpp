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

#include "machine.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <cstring>

#include "plweb/writer.hpp"

namespace plweb::detail {

namespace {

using Clock = std::chrono::steady_clock;

constexpr uint64_t kNoIndex = ~uint64_t{0};
constexpr int64_t kBudgetCheckInterval = 4096;
constexpr size_t kExportListCap = 1'000'000;

constexpr uint64_t key(uint32_t name, uint32_t arity) { return functor_key(name, arity); }

bool transparent(CpKind k) {
  return k == CpKind::kFailPort || k == CpKind::kRedoPort || k == CpKind::kTimeFail;
}

int type_rank(Tag t) {
  switch (t) {
    case Tag::kRef: return 0;
    case Tag::kInt:
    case Tag::kFlt: return 1;
    case Tag::kAtom: return 3;
    case Tag::kStr: return 4;
    default: return 5;
  }
}

int compare_numbers(const Cell& a, const Cell& b) {
  if (a.tag == Tag::kInt && b.tag == Tag::kInt) return a.i < b.i ? -1 : a.i > b.i ? 1 : 0;
  double x = a.tag == Tag::kInt ? static_cast<double>(a.i) : a.f;
  double y = b.tag == Tag::kInt ? static_cast<double>(b.i) : b.f;
  if (x < y) return -1;
  if (x > y) return 1;
  if (a.tag == b.tag) return 0;
  return a.tag == Tag::kFlt ? -1 : 1;
}

}  // namespace

Machine::Machine(Database& db, QueryOptions options) : db_(db), opts_(std::move(options)) {
  heap_.reserve(1 << 14);
  if (opts_.debug != nullptr) {
    auto& ds = opts_.debug_state;
    if (ds.mode == DebugMode::kOff && !ds.breakpoints.empty()) {
      ds.mode = DebugMode::kNodebugUntilBreakpoint;
    }
    tracing_ = ds.mode != DebugMode::kOff;
  }
}

void Machine::set_breakpoints(std::set<int> lines) {
  if (opts_.debug == nullptr) return;
  auto& ds = opts_.debug_state;
  ds.breakpoints = std::move(lines);
  if (ds.mode == DebugMode::kOff && !ds.breakpoints.empty()) {
    ds.mode = DebugMode::kNodebugUntilBreakpoint;
  }
  tracing_ = ds.mode != DebugMode::kOff;
}

Machine::~Machine() {
  // Release continuations before the choicepoints that share them.
  cont_ = FrameRef();
  cps_.clear();
}

Frame* Machine::new_frame(FrameKind kind, uint64_t goal, uint64_t cut, int32_t tdepth,
                          int64_t aux, Frame* next) {
  auto* f = new Frame;
  f->kind = kind;
  f->goal = goal;
  f->cut = cut;
  f->tdepth = tdepth;
  f->aux = aux;
  f->next = next;
  f->height = next != nullptr ? next->height + 1 : 1;
  if (static_cast<int64_t>(f->height) > opts_.budget.depth_limit) {
    FrameRef::release(f);
    resource_error("depth");
  }
  return f;
}

void Machine::push_goal(uint64_t goal, uint64_t cut, int32_t tdepth) {
  push_frame(FrameKind::kGoal, goal, cut, tdepth, 0);
}

void Machine::push_frame(FrameKind kind, uint64_t goal, uint64_t cut, int32_t tdepth,
                         int64_t aux) {
  cont_ = FrameRef(new_frame(kind, goal, cut, tdepth, aux, cont_.detach()));
}

ChoicePoint& Machine::push_cp(CpKind kind) {
  ChoicePoint& cp = cps_.emplace_back();
  cp.kind = kind;
  cp.heap_top = heap_.size();
  cp.trail_top = trail_.size();
  cp.cont = cont_;
  return cp;
}

void Machine::cut_to(uint64_t height) {
  while (cps_.size() > height) cps_.pop_back();
}

void Machine::undo_to(const ChoicePoint& cp) {
  while (trail_.size() > cp.trail_top) {
    uint64_t a = trail_.back();
    trail_.pop_back();
    heap_[a] = Cell::Ref(a);
  }
  heap_.resize(cp.heap_top);
  if (heap_line_.size() > heap_.size()) heap_line_.resize(heap_.size());
}

uint64_t Machine::new_cell(Cell c) {
  if (static_cast<int64_t>(heap_.size()) >= opts_.budget.memory_limit) resource_error("memory");
  heap_.push_back(c);
  return heap_.size() - 1;
}

uint64_t Machine::new_var() {
  uint64_t a = new_cell(Cell());
  heap_[a] = Cell::Ref(a);
  return a;
}

uint64_t Machine::new_struct_cell(uint32_t name, uint32_t arity, uint64_t* args_out) {
  if (static_cast<int64_t>(heap_.size() + arity + 2) >= opts_.budget.memory_limit) {
    resource_error("memory");
  }
  uint64_t f = heap_.size();
  heap_.push_back(Cell::Functor(name, arity));
  for (uint32_t i = 0; i < arity; ++i) {
    heap_.push_back(Cell::Ref(f + 1 + i));
  }
  if (args_out != nullptr) *args_out = f + 1;
  heap_.push_back(Cell::Struct(f));
  return heap_.size() - 1;
}

uint64_t Machine::new_struct(uint32_t name, uint32_t arity) {
  if (arity == 0) return new_atom(name);
  return new_struct_cell(name, arity, nullptr);
}

uint64_t Machine::new_list(const std::vector<uint64_t>& items, uint64_t tail) {
  uint64_t list = tail;
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    uint64_t args = 0;
    uint64_t cell = new_struct_cell(atom::kDot, 2, &args);
    heap_[args] = Cell::Ref(*it);
    heap_[args + 1] = Cell::Ref(list);
    list = cell;
  }
  return list;
}

void Machine::bind(uint64_t var, uint64_t value) {
  const Cell& v = heap_[value];
  heap_[var] = v.tag == Tag::kRef ? Cell::Ref(value) : v;
  uint64_t hb = cps_.empty() ? 0 : cps_.back().heap_top;
  if (var < hb) trail_.push_back(var);
}

bool Machine::unify(uint64_t a, uint64_t b) {
  std::vector<std::pair<uint64_t, uint64_t>> stack{{a, b}};
  int64_t guard = 0;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if ((++guard & 0xFFFF) == 0) check_budget();
    x = deref(x);
    y = deref(y);
    if (x == y) continue;
    const Cell& cx = heap_[x];
    const Cell& cy = heap_[y];
    if (cx.tag == Tag::kRef && cy.tag == Tag::kRef) {
      if (x < y) {
        bind(y, x);
      } else {
        bind(x, y);
      }
      continue;
    }
    if (cx.tag == Tag::kRef) {
      bind(x, y);
      continue;
    }
    if (cy.tag == Tag::kRef) {
      bind(y, x);
      continue;
    }
    if (cx.tag != cy.tag) return false;
    switch (cx.tag) {
      case Tag::kAtom:
      case Tag::kInt:
      case Tag::kStr:
      case Tag::kFlt:
        if (cx.u != cy.u) return false;
        break;
      case Tag::kStruct: {
        if (cx.u == cy.u) break;
        const Cell& fx = heap_[cx.u];
        const Cell& fy = heap_[cy.u];
        if (fx.u != fy.u || fx.arity != fy.arity) return false;
        for (uint32_t i = fx.arity; i-- > 0;) {
          stack.emplace_back(cx.u + 1 + i, cy.u + 1 + i);
        }
        break;
      }
      default: return false;
    }
  }
  return true;
}

bool Machine::would_unify(uint64_t a, uint64_t b) {
  uint64_t h = cps_.size();
  push_cp(CpKind::kAlt);
  bool ok = unify(a, b);
  undo_to(cps_.back());
  cut_to(h);
  return ok;
}

int Machine::compare(uint64_t a, uint64_t b) {
  std::vector<std::pair<uint64_t, uint64_t>> stack{{a, b}};
  int64_t guard = 0;
  while (!stack.empty()) {
    auto [x, y] = stack.back();
    stack.pop_back();
    if ((++guard & 0xFFFF) == 0) check_budget();
    x = deref(x);
    y = deref(y);
    if (x == y) continue;
    const Cell& cx = heap_[x];
    const Cell& cy = heap_[y];
    int rx = type_rank(cx.tag);
    int ry = type_rank(cy.tag);
    if (rx != ry) return rx < ry ? -1 : 1;
    switch (cx.tag) {
      case Tag::kRef: return x < y ? -1 : 1;
      case Tag::kInt:
      case Tag::kFlt: {
        int c = compare_numbers(cx, cy);
        if (c != 0) return c;
        break;
      }
      case Tag::kAtom: {
        if (cx.u == cy.u) break;
        int c = atom_name(static_cast<uint32_t>(cx.u)).compare(atom_name(static_cast<uint32_t>(cy.u)));
        if (c != 0) return c < 0 ? -1 : 1;
        break;
      }
      case Tag::kStr: {
        int c = db_.strings.text(static_cast<uint32_t>(cx.u))
                    .compare(db_.strings.text(static_cast<uint32_t>(cy.u)));
        if (c != 0) return c < 0 ? -1 : 1;
        break;
      }
      case Tag::kStruct: {
        const Cell& fx = heap_[cx.u];
        const Cell& fy = heap_[cy.u];
        if (fx.arity != fy.arity) return fx.arity < fy.arity ? -1 : 1;
        if (fx.u != fy.u) {
          int c = atom_name(static_cast<uint32_t>(fx.u)).compare(atom_name(static_cast<uint32_t>(fy.u)));
          if (c != 0) return c < 0 ? -1 : 1;
        }
        for (uint32_t i = fx.arity; i-- > 0;) stack.emplace_back(cx.u + 1 + i, cy.u + 1 + i);
        break;
      }
      default: break;
    }
  }
  return 0;
}

std::string Machine::variant_key(uint64_t addr) {
  std::string out;
  std::unordered_map<uint64_t, size_t> vars;
  std::vector<uint64_t> stack{addr};
  char buf[48];
  while (!stack.empty()) {
    uint64_t a = deref(stack.back());
    stack.pop_back();
    if (static_cast<int64_t>(out.size()) > opts_.budget.memory_limit) resource_error("memory");
    const Cell& c = heap_[a];
    switch (c.tag) {
      case Tag::kRef: {
        auto [it, fresh] = vars.try_emplace(a, vars.size());
        std::snprintf(buf, sizeof buf, "V%zu,", it->second);
        break;
      }
      case Tag::kAtom: std::snprintf(buf, sizeof buf, "A%" PRIu64 ",", c.u); break;
      case Tag::kInt: std::snprintf(buf, sizeof buf, "I%" PRId64 ",", c.i); break;
      case Tag::kFlt: std::snprintf(buf, sizeof buf, "F%" PRIu64 ",", c.u); break;
      case Tag::kStr: std::snprintf(buf, sizeof buf, "S%" PRIu64 ",", c.u); break;
      case Tag::kStruct: {
        const Cell& f = heap_[c.u];
        std::snprintf(buf, sizeof buf, "T%" PRIu64 "/%u,", f.u, f.arity);
        for (uint32_t i = f.arity; i-- > 0;) stack.push_back(c.u + 1 + i);
        break;
      }
      default: buf[0] = '\0';
    }
    out += buf;
  }
  return out;
}

bool Machine::variant(uint64_t a, uint64_t b) { return variant_key(a) == variant_key(b); }

Template Machine::copy_out(const std::vector<uint64_t>& roots) {
  Template out;
  out.roots = static_cast<uint32_t>(roots.size());
  out.cells.resize(roots.size());
  std::unordered_map<uint64_t, uint32_t> vars;
  std::vector<std::pair<uint64_t, size_t>> work;
  for (size_t i = roots.size(); i-- > 0;) work.emplace_back(roots[i], i);
  while (!work.empty()) {
    auto [src, slot] = work.back();
    work.pop_back();
    uint64_t a = deref(src);
    const Cell& c = heap_[a];
    Cell o;
    switch (c.tag) {
      case Tag::kRef: {
        auto [it, fresh] = vars.try_emplace(a, static_cast<uint32_t>(vars.size()));
        o = Cell::Ref(it->second);
        break;
      }
      case Tag::kStruct: {
        const Cell& f = heap_[c.u];
        size_t block = out.cells.size();
        if (static_cast<int64_t>(block + f.arity) > opts_.budget.memory_limit) {
          resource_error("memory");
        }
        out.cells.push_back(f);
        out.cells.resize(block + 1 + f.arity);
        for (uint32_t i = f.arity; i-- > 0;) work.emplace_back(c.u + 1 + i, block + 1 + i);
        o = Cell::Struct(block);
        break;
      }
      default: o = c;
    }
    out.cells[slot] = o;
  }
  out.nvars = static_cast<uint32_t>(vars.size());
  return out;
}

uint64_t Machine::copy_in(const Template& t) {
  uint64_t b = heap_.size();
  if (static_cast<int64_t>(b + t.nvars + t.cells.size()) >= opts_.budget.memory_limit) {
    resource_error("memory");
  }
  heap_.resize(b + t.nvars + t.cells.size());
  for (uint32_t k = 0; k < t.nvars; ++k) heap_[b + k] = Cell::Ref(b + k);
  uint64_t base = b + t.nvars;
  for (size_t i = 0; i < t.cells.size(); ++i) {
    Cell c = t.cells[i];
    if (c.tag == Tag::kRef) {
      c.u += b;
    } else if (c.tag == Tag::kStruct) {
      c.u += base;
    }
    heap_[base + i] = c;
  }
  return base;
}

uint64_t Machine::import_term(const Term& t, std::unordered_map<int64_t, uint64_t>* vars) {
  std::unordered_map<int64_t, uint32_t> index;
  Template tmpl = compile_terms({t}, db_.atoms, db_.strings, &index);
  uint64_t root = copy_in(tmpl);
  if (vars != nullptr) {
    uint64_t b = root - tmpl.nvars;
    for (const auto& [id, k] : index) (*vars)[id] = b + k;
  }
  return root;
}

Term Machine::export_term(uint64_t addr, size_t max_depth) const {
  struct Exporter {
    const Machine& m;
    size_t max_depth;
    Term run(uint64_t addr, size_t depth) {
      if (depth > max_depth) return Term::Atom("...");
      uint64_t a = m.deref(addr);
      const Cell& c = m.heap_[a];
      switch (c.tag) {
        case Tag::kRef: {
          auto it = m.var_names_.find(a);
          return Term::Var(static_cast<int64_t>(a), it != m.var_names_.end() ? it->second : "");
        }
        case Tag::kAtom: return Term::Atom(m.atom_name(static_cast<uint32_t>(c.u)));
        case Tag::kInt: return Term::Int(c.i);
        case Tag::kFlt: return Term::Float(c.f);
        case Tag::kStr: return Term::String(m.db_.strings.text(static_cast<uint32_t>(c.u)));
        case Tag::kStruct: break;
        default: return Term::Atom("...");
      }
      const Cell& f = m.heap_[c.u];
      if (f.u == atom::kDot && f.arity == 2) {
        std::vector<Term> items;
        uint64_t cur = a;
        for (;;) {
          const Cell& cc = m.heap_[cur];
          if (cc.tag != Tag::kStruct) break;
          const Cell& ff = m.heap_[cc.u];
          if (ff.u != atom::kDot || ff.arity != 2) break;
          if (items.size() >= kExportListCap) {
            return Term::List(std::move(items), Term::Atom("..."));
          }
          items.push_back(run(cc.u + 1, depth + 1));
          cur = m.deref(cc.u + 2);
        }
        return Term::List(std::move(items), run(cur, depth + 1));
      }
      std::vector<Term> args;
      args.reserve(f.arity);
      for (uint32_t i = 0; i < f.arity; ++i) args.push_back(run(c.u + 1 + i, depth + 1));
      return Term::Compound(m.atom_name(static_cast<uint32_t>(f.u)), std::move(args));
    }
  };
  return Exporter{*this, max_depth}.run(addr, 0);
}

std::string Machine::format_term(uint64_t addr, bool quoted) const {
  Term t = export_term(addr);
  return quoted ? writeq(t, db_.ops) : write_plain(t, db_.ops);
}

bool Machine::text_of(uint64_t addr, std::string& out) const {
  uint64_t a = deref(addr);
  const Cell& c = heap_[a];
  switch (c.tag) {
    case Tag::kAtom: out = atom_name(static_cast<uint32_t>(c.u)); return true;
    case Tag::kStr: out = db_.strings.text(static_cast<uint32_t>(c.u)); return true;
    case Tag::kInt: out = std::to_string(c.i); return true;
    case Tag::kFlt: out = format_float(c.f); return true;
    default: return false;
  }
}

bool Machine::list_elements(uint64_t addr, std::vector<uint64_t>& out) const {
  uint64_t cur = deref(addr);
  for (;;) {
    const Cell& c = heap_[cur];
    if (c.tag == Tag::kAtom && c.u == atom::kNil) return true;
    if (c.tag != Tag::kStruct) return false;
    const Cell& f = heap_[c.u];
    if (f.u != atom::kDot || f.arity != 2) return false;
    out.push_back(c.u + 1);
    cur = deref(c.u + 2);
  }
}

// --- errors ---------------------------------------------------------------

void Machine::throw_error(const Term& formal) {
  throw PrologError(Term::Compound("error", {formal, Term::Var(-1, "_")}));
}

void Machine::instantiation_error() { throw_error(Term::Atom("instantiation_error")); }

void Machine::type_error(std::string_view type, uint64_t culprit) {
  throw_error(Term::Compound("type_error", {Term::Atom(std::string(type)), export_term(culprit)}));
}

void Machine::domain_error(std::string_view domain, uint64_t culprit) {
  throw_error(
      Term::Compound("domain_error", {Term::Atom(std::string(domain)), export_term(culprit)}));
}

void Machine::representation_error(std::string_view what) {
  throw_error(Term::Compound("representation_error", {Term::Atom(std::string(what))}));
}

void Machine::evaluation_error(std::string_view what) {
  throw_error(Term::Compound("evaluation_error", {Term::Atom(std::string(what))}));
}

void Machine::resource_error(std::string_view what) {
  throw_error(Term::Compound("resource_error", {Term::Atom(std::string(what))}));
}

void Machine::permission_error(std::string_view action, std::string_view type,
                               const Term& culprit) {
  throw_error(Term::Compound("permission_error", {Term::Atom(std::string(action)),
                                                  Term::Atom(std::string(type)), culprit}));
}

void Machine::existence_error(std::string_view type, const Term& culprit) {
  throw_error(Term::Compound("existence_error", {Term::Atom(std::string(type)), culprit}));
}

// --- budget and I/O -------------------------------------------------------

double Machine::elapsed() const {
  double t = active_before_;
  if (running_) {
    t += std::chrono::duration<double>(Clock::now() - run_started_).count() - paused_in_run_;
  }
  return t;
}

void Machine::check_budget() {
  if (opts_.abort != nullptr && opts_.abort->load(std::memory_order_relaxed)) {
    throw QueryAborted();
  }
  if (++steps_ % kBudgetCheckInterval == 0 && elapsed() > opts_.budget.wall_time_limit) {
    resource_error("wall_time");
  }
}

void Machine::write_output(std::string_view text) {
  if (opts_.io != nullptr) opts_.io->write(text);
}

std::optional<std::string> Machine::read_input() {
  if (opts_.io == nullptr) return std::nullopt;
  auto t0 = Clock::now();
  auto line = opts_.io->read_line();
  paused_in_run_ += std::chrono::duration<double>(Clock::now() - t0).count();
  if (opts_.abort != nullptr && opts_.abort->load()) throw QueryAborted();
  return line;
}

void Machine::report_input_error(const std::string& message) {
  if (opts_.io != nullptr) opts_.io->report_input_error(message);
}

QueryStats Machine::stats() const { return {inferences_, elapsed()}; }

// --- query control ----------------------------------------------------------

void Machine::load_goal(const Term& goal,
                        const std::vector<std::pair<std::string, Term>>& var_names) {
  std::unordered_map<int64_t, uint64_t> vars;
  query_root_ = import_term(goal, &vars);
  for (const auto& [name, v] : var_names) {
    if (!v.is_var()) continue;
    auto it = vars.find(v.var_id());
    if (it == vars.end()) continue;
    var_names_[it->second] = name;
    if (!name.empty() && name[0] != '_') query_vars_.emplace_back(name, it->second);
  }
  cont_ = FrameRef(new_frame(FrameKind::kGoal, query_root_, 0, 0, 0, nullptr));
}

bool Machine::next() {
  running_ = true;
  run_started_ = Clock::now();
  paused_in_run_ = 0;
  struct Stop {
    Machine& m;
    ~Stop() {
      m.active_before_ +=
          std::chrono::duration<double>(Clock::now() - m.run_started_).count() - m.paused_in_run_;
      m.running_ = false;
    }
  } stop{*this};
  if (!started_) {
    started_ = true;
    return run();
  }
  return backtrack() && run();
}

bool Machine::has_alternatives() const {
  for (auto it = cps_.rbegin(); it != cps_.rend(); ++it) {
    if (!transparent(it->kind)) return true;
  }
  return false;
}

Solution Machine::solution() const {
  Solution s;
  for (const auto& [name, addr] : query_vars_) {
    uint64_t a = deref(addr);
    if (heap_[a].tag == Tag::kRef && a == addr) continue;
    s.bindings.emplace_back(name, export_term(addr));
  }
  return s;
}

bool Machine::run() {
  for (;;) {
    if (!cont_) return true;
    FrameRef f = std::move(cont_);
    if (f->next != nullptr) {
      ++f->next->refs;
      cont_ = FrameRef(f->next);
    }
    check_budget();
    if (!step(f.get()) && !backtrack()) return false;
  }
}

bool Machine::step(Frame* f) {
  switch (f->kind) {
    case FrameKind::kGoal: return call_goal(f->goal, f->cut, f->tdepth);
    case FrameKind::kCutTo: cut_to(static_cast<uint64_t>(f->aux)); return true;
    case FrameKind::kFail: return false;
    case FrameKind::kTraceExit: return trace_exit(f);
    case FrameKind::kCollect: {
      Collector& c = collectors_.at(f->aux);
      if (c.aggregate == atom::kCount) {
        ++c.count;
      } else {
        c.results.push_back(copy_out({c.template_slot}));
      }
      return false;
    }
    case FrameKind::kLimit: {
      Collector& c = collectors_.at(f->aux);
      if (++c.count >= c.max) cut_to(f->cut);
      return true;
    }
    case FrameKind::kDistinct: {
      Collector& c = collectors_.at(f->aux);
      return c.seen.insert(variant_key(c.template_slot)).second;
    }
    case FrameKind::kTimeExit: report_time(f->aux); return true;
  }
  return false;
}

uint64_t Machine::add_args(uint64_t goal, const uint64_t* extra, size_t n) {
  uint64_t g = deref(goal);
  const Cell& c = heap_[g];
  uint32_t name = 0;
  uint32_t arity = 0;
  uint64_t old_args = 0;
  if (c.tag == Tag::kAtom) {
    name = static_cast<uint32_t>(c.u);
  } else if (c.tag == Tag::kStruct) {
    name = static_cast<uint32_t>(heap_[c.u].u);
    arity = heap_[c.u].arity;
    old_args = c.u + 1;
  } else if (c.tag == Tag::kRef) {
    instantiation_error();
  } else {
    type_error("callable", g);
  }
  uint64_t args = 0;
  uint64_t s = new_struct_cell(name, arity + static_cast<uint32_t>(n), &args);
  for (uint32_t i = 0; i < arity; ++i) heap_[args + i] = Cell::Ref(old_args + i);
  for (size_t i = 0; i < n; ++i) heap_[args + arity + i] = Cell::Ref(extra[i]);
  return s;
}

bool Machine::call_goal(uint64_t slot, uint64_t cut, int32_t tdepth, bool traced_ok) {
  for (;;) {
    uint64_t g = deref(slot);
    const Cell& c = heap_[g];
    uint32_t name = 0;
    uint32_t arity = 0;
    uint64_t fa = 0;
    if (c.tag == Tag::kAtom) {
      name = static_cast<uint32_t>(c.u);
    } else if (c.tag == Tag::kStruct) {
      fa = c.u;
      name = static_cast<uint32_t>(heap_[fa].u);
      arity = heap_[fa].arity;
    } else if (c.tag == Tag::kRef) {
      instantiation_error();
    } else {
      type_error("callable", g);
    }
    switch (key(name, arity)) {
      case key(atom::kComma, 2):
        push_goal(fa + 2, cut, tdepth);
        slot = fa + 1;
        continue;
      case key(atom::kTrue, 0): return true;
      case key(atom::kFail, 0):
      case key(atom::kFalse, 0): return false;
      case key(atom::kCut, 0): cut_to(cut); return true;
      case key(atom::kSemicolon, 2): {
        uint64_t left = deref(fa + 1);
        const Cell& lc = heap_[left];
        if (lc.tag == Tag::kStruct && heap_[lc.u].u == atom::kArrow && heap_[lc.u].arity == 2) {
          uint64_t h = cps_.size();
          ChoicePoint& cp = push_cp(CpKind::kAlt);
          cp.goal = fa + 2;
          cp.cut = cut;
          cp.tdepth = tdepth;
          push_goal(lc.u + 2, cut, tdepth);
          push_frame(FrameKind::kCutTo, 0, 0, tdepth, static_cast<int64_t>(h));
          slot = lc.u + 1;
          cut = h + 1;
          continue;
        }
        ChoicePoint& cp = push_cp(CpKind::kAlt);
        cp.goal = fa + 2;
        cp.cut = cut;
        cp.tdepth = tdepth;
        slot = fa + 1;
        continue;
      }
      case key(atom::kArrow, 2): {
        uint64_t h = cps_.size();
        push_goal(fa + 2, cut, tdepth);
        push_frame(FrameKind::kCutTo, 0, 0, tdepth, static_cast<int64_t>(h));
        slot = fa + 1;
        cut = h;
        continue;
      }
      case key(atom::kNot, 1): {
        uint64_t h = cps_.size();
        ChoicePoint& cp = push_cp(CpKind::kAlt);
        cp.aux = 1;
        cont_ = FrameRef(new_frame(FrameKind::kFail, 0, 0, tdepth, 0, nullptr));
        push_frame(FrameKind::kCutTo, 0, 0, tdepth, static_cast<int64_t>(h));
        slot = fa + 1;
        cut = h + 1;
        continue;
      }
      default: break;
    }
    if (name == atom::kCall && arity >= 1 && arity <= 8) {
      std::vector<uint64_t> extra;
      for (uint32_t i = 1; i < arity; ++i) extra.push_back(fa + 1 + i);
      slot = arity == 1 ? fa + 1 : add_args(fa + 1, extra.data(), extra.size());
      cut = cps_.size();
      continue;
    }

    if (traced_ok) {
      if (++inferences_ > opts_.budget.inference_limit) resource_error("inferences");
      if (tracing_ && atom_name(name).rfind('$', 0) != 0) {
        return trace_call(slot, g, cut, tdepth);
      }
    }

    bool handled = false;
    bool ok = call_meta(name, arity, g, cut, tdepth, handled);
    if (handled) return ok;
    uint64_t k = key(name, arity);
    if (const BuiltinEntry* b = lookup_builtin(k)) return call_builtin(g, *b);
    if (const Predicate* p = db_.find(k)) return call_predicate(g, k, *p, tdepth);
    existence_error("procedure",
                    Term::Compound("/", {Term::Atom(atom_name(name)), Term::Int(arity)}));
  }
}

bool Machine::call_builtin(uint64_t goal, const BuiltinEntry& b) {
  const Cell& c = heap_[goal];
  uint64_t fa = c.tag == Tag::kStruct ? c.u : 0;
  if (b.det != nullptr) return b.det(*this, fa);
  uint64_t h = cps_.size();
  ChoicePoint& cp = push_cp(CpKind::kRedo);
  cp.goal = goal;
  int64_t state = 0;
  Redo r = b.nondet(*this, fa, state);
  switch (r) {
    case Redo::kFail: cut_to(h); return false;
    case Redo::kLast: cut_to(h); return true;
    case Redo::kMore: cps_[h].state = state; return true;
  }
  return false;
}

size_t Machine::next_matching(const ClauseList& clauses, size_t from, uint64_t goal) const {
  const Cell& g = heap_[goal];
  uint64_t fa = g.tag == Tag::kStruct ? g.u : 0;
  uint32_t arity = g.tag == Tag::kStruct ? heap_[fa].arity : 0;
  size_t n = std::min<size_t>(arity, Clause::kIndexedArgs);
  Cell keys[Clause::kIndexedArgs];
  for (size_t k = 0; k < n; ++k) {
    const Cell& a = heap_[deref(fa + 1 + k)];
    keys[k] = a.tag == Tag::kStruct ? heap_[a.u] : a;
  }
  for (size_t i = from; i < clauses.size(); ++i) {
    const Clause& c = *clauses[i];
    bool match = true;
    for (size_t k = 0; k < n && match; ++k) {
      const Cell& ck = c.keys[k];
      if (ck.tag == Tag::kRef || keys[k].tag == Tag::kRef) continue;
      match = ck.tag == keys[k].tag && ck.u == keys[k].u && ck.arity == keys[k].arity;
    }
    if (match) return i;
  }
  return kNoIndex;
}

bool Machine::call_predicate(uint64_t goal, uint64_t k, const Predicate& pred, int32_t tdepth) {
  (void)k;
  std::shared_ptr<const ClauseList> clauses = pred.clauses;
  size_t i = next_matching(*clauses, 0, goal);
  if (i == kNoIndex) return false;
  size_t j = next_matching(*clauses, i + 1, goal);
  uint64_t h = cps_.size();
  if (j != kNoIndex) {
    ChoicePoint& cp = push_cp(CpKind::kClauses);
    cp.goal = goal;
    cp.aux = static_cast<int64_t>(j);
    cp.tdepth = tdepth;
    cp.clauses = clauses;
  }
  return resolve(*(*clauses)[i], goal, h, tdepth);
}

bool Machine::resolve(const Clause& c, uint64_t goal, uint64_t cut, int32_t tdepth) {
  uint64_t base = copy_in(c.tmpl);
  if (tracing_ && !c.goal_lines.empty()) {
    heap_line_.resize(base, 0);
    heap_line_.insert(heap_line_.end(), c.goal_lines.begin(), c.goal_lines.end());
  }
  if (!unify(base, goal)) return false;
  const Cell& body = heap_[base + 1];
  if (body.tag == Tag::kAtom && body.u == atom::kTrue) return true;
  push_goal(base + 1, cut, tdepth + 1);
  return true;
}

bool Machine::backtrack() {
  for (;;) {
    if (cps_.empty()) return false;
    size_t idx = cps_.size() - 1;
    undo_to(cps_[idx]);
    ChoicePoint& cp = cps_[idx];
    switch (cp.kind) {
      case CpKind::kClauses: {
        auto clauses = cp.clauses;
        size_t i = static_cast<size_t>(cp.aux);
        uint64_t goal = cp.goal;
        int32_t tdepth = cp.tdepth;
        cont_ = cp.cont;
        size_t j = next_matching(*clauses, i + 1, goal);
        if (j == kNoIndex) {
          cps_.pop_back();
        } else {
          cp.aux = static_cast<int64_t>(j);
        }
        if (resolve(*(*clauses)[i], goal, idx, tdepth)) return true;
        continue;
      }
      case CpKind::kAlt: {
        FrameRef k = std::move(cp.cont);
        bool resume = cp.aux == 1;
        uint64_t goal = cp.goal;
        uint64_t cut = cp.cut;
        int32_t tdepth = cp.tdepth;
        cps_.pop_back();
        cont_ = std::move(k);
        if (!resume) push_goal(goal, cut, tdepth);
        return true;
      }
      case CpKind::kRedo: {
        int64_t state = cp.state;
        uint64_t goal = cp.goal;
        cont_ = cp.cont;
        const Cell& g = heap_[goal];
        uint64_t fa = g.tag == Tag::kStruct ? g.u : 0;
        uint32_t name = g.tag == Tag::kStruct ? static_cast<uint32_t>(heap_[fa].u)
                                              : static_cast<uint32_t>(g.u);
        uint32_t arity = g.tag == Tag::kStruct ? heap_[fa].arity : 0;
        const BuiltinEntry* b = lookup_builtin(key(name, arity));
        Redo r = b->nondet(*this, fa, state);
        if (r == Redo::kMore) {
          cps_[idx].state = state;
          return true;
        }
        cut_to(idx);
        if (r == Redo::kLast) return true;
        continue;
      }
      case CpKind::kCollectEnd: {
        int64_t id = cp.aux;
        cont_ = std::move(cp.cont);
        int32_t tdepth = cp.tdepth;
        cps_.pop_back();
        if (finish_collect(id, tdepth)) return true;
        continue;
      }
      case CpKind::kFailPort: {
        uint64_t goal = cp.goal;
        uint64_t cut = cp.cut;
        int32_t tdepth = cp.tdepth;
        int line = static_cast<int>(cp.state);
        int64_t id = cp.aux;
        FrameRef k = cp.cont;
        cps_.pop_back();
        bool retry = false;
        trace_port(Port::kFail, goal, tdepth, id, line, retry);
        if (retry) {
          cont_ = std::move(k);
          if (trace_call(0, goal, cut, tdepth, line)) return true;
        }
        continue;
      }
      case CpKind::kRedoPort: {
        uint64_t goal = cp.goal;
        int32_t tdepth = cp.tdepth;
        int line = static_cast<int>(cp.state);
        int64_t id = cp.aux;
        uint64_t fail_port = cp.cut;
        cps_.pop_back();
        bool retry = false;
        trace_port(Port::kRedo, goal, tdepth, id, line, retry);
        if (retry) {
          if (do_retry(fail_port)) return true;
        }
        continue;
      }
      case CpKind::kTimeFail: {
        int64_t id = cp.aux;
        cps_.pop_back();
        report_time(id);
        collectors_.erase(id);
        continue;
      }
    }
  }
}

bool Machine::finish_collect(int64_t id, int32_t tdepth) {
  Collector c = std::move(collectors_.at(id));
  collectors_.erase(id);
  if (c.aggregate == atom::kCount) {
    return unify(c.result_slot, new_int(c.count));
  }
  std::vector<uint64_t> items;
  items.reserve(c.results.size());
  for (const Template& t : c.results) items.push_back(copy_in(t));
  if (c.aggregate == atom::kSet) {
    std::stable_sort(items.begin(), items.end(),
                     [this](uint64_t a, uint64_t b) { return compare(a, b) < 0; });
    items.erase(std::unique(items.begin(), items.end(),
                            [this](uint64_t a, uint64_t b) { return compare(a, b) == 0; }),
                items.end());
  }
  if (c.aggregate == atom::kOrderBy) {
    // Each item is Keys-Goal; sort by the keys with per-key direction.
    std::stable_sort(items.begin(), items.end(), [this, &c](uint64_t a, uint64_t b) {
      uint64_t ka = arg(a, 0);
      uint64_t kb = arg(b, 0);
      for (size_t i = 0; i < c.desc.size(); ++i) {
        int r = compare(arg(ka, i), arg(kb, i));
        if (r != 0) return c.desc[i] ? r > 0 : r < 0;
      }
      return false;
    });
    std::vector<uint64_t> goals;
    for (uint64_t it : items) goals.push_back(arg(it, 1));
    uint64_t list = new_list(goals, new_atom(atom::kNil));
    uint64_t args = 0;
    uint64_t member = new_struct_cell(atom::kSolutionMember, 2, &args);
    heap_[args] = Cell::Ref(c.result_slot);
    heap_[args + 1] = Cell::Ref(list);
    push_goal(member, cps_.size(), tdepth);
    return true;
  }
  return unify(c.result_slot, new_list(items, new_atom(atom::kNil)));
}

void Machine::report_time(int64_t id) {
  auto it = collectors_.find(id);
  if (it == collectors_.end()) return;
  const Collector& c = it->second;
  char buf[96];
  std::snprintf(buf, sizeof buf, "time: %.3fs wall, %" PRId64 " inferences\n",
                elapsed() - c.start_elapsed, inferences_ - c.start_inferences);
  write_output(buf);
}

bool Machine::call_meta(uint32_t name, uint32_t arity, uint64_t g, uint64_t cut, int32_t tdepth,
                        bool& handled) {
  (void)cut;
  handled = true;
  uint64_t fa = arity > 0 ? heap_[g].u : 0;
  switch (key(name, arity)) {
    case key(atom::kFindall, 3):
    case key(atom::kAggregateAll, 3): {
      Collector c;
      c.result_slot = fa + 3;
      if (name == atom::kFindall) {
        c.aggregate = atom::kBag;
        c.template_slot = fa + 1;
      } else {
        uint64_t spec = deref(fa + 1);
        const Cell& s = heap_[spec];
        if (s.tag == Tag::kRef) instantiation_error();
        if (s.tag == Tag::kAtom && s.u == atom::kCount) {
          c.aggregate = atom::kCount;
        } else if (s.tag == Tag::kStruct && heap_[s.u].arity == 1 &&
                   (heap_[s.u].u == atom::kBag || heap_[s.u].u == atom::kSet)) {
          c.aggregate = static_cast<uint32_t>(heap_[s.u].u);
          c.template_slot = s.u + 1;
        } else {
          domain_error("aggregate_spec", spec);
        }
      }
      int64_t id = next_collector_++;
      collectors_.emplace(id, std::move(c));
      uint64_t h = cps_.size();
      ChoicePoint& cp = push_cp(CpKind::kCollectEnd);
      cp.aux = id;
      cp.tdepth = tdepth;
      cont_ = FrameRef(new_frame(FrameKind::kCollect, 0, 0, tdepth, id, nullptr));
      push_goal(fa + 2, h + 1, tdepth + 1);
      return true;
    }
    case key(atom::kForall, 2): {
      // forall(C, A) runs as \+ (C, \+ A).
      uint64_t inner_args = 0;
      uint64_t inner = new_struct_cell(atom::kNot, 1, &inner_args);
      heap_[inner_args] = Cell::Ref(fa + 2);
      uint64_t conj_args = 0;
      uint64_t conj = new_struct_cell(atom::kComma, 2, &conj_args);
      heap_[conj_args] = Cell::Ref(fa + 1);
      heap_[conj_args + 1] = Cell::Ref(inner);
      uint64_t outer_args = 0;
      uint64_t outer = new_struct_cell(atom::kNot, 1, &outer_args);
      heap_[outer_args] = Cell::Ref(conj);
      push_goal(outer, cps_.size(), tdepth + 1);
      return true;
    }
    case key(atom::kLimit, 2): {
      uint64_t n = deref(fa + 1);
      if (heap_[n].tag == Tag::kRef) instantiation_error();
      if (heap_[n].tag != Tag::kInt) type_error("integer", n);
      if (heap_[n].i <= 0) return false;
      Collector c;
      c.max = heap_[n].i;
      int64_t id = next_collector_++;
      collectors_.emplace(id, std::move(c));
      uint64_t h = cps_.size();
      push_frame(FrameKind::kLimit, 0, h, tdepth, id);
      push_goal(fa + 2, h, tdepth + 1);
      return true;
    }
    case key(atom::kDistinct, 1):
    case key(atom::kDistinct, 2): {
      Collector c;
      c.template_slot = fa + 1;
      int64_t id = next_collector_++;
      collectors_.emplace(id, std::move(c));
      push_frame(FrameKind::kDistinct, 0, 0, tdepth, id);
      push_goal(arity == 1 ? fa + 1 : fa + 2, cps_.size(), tdepth + 1);
      return true;
    }
    case key(atom::kOrderBy, 2): {
      uint64_t spec = deref(fa + 1);
      std::vector<uint64_t> specs;
      if (!list_elements(spec, specs)) {
        specs.clear();
        specs.push_back(spec);
      }
      if (specs.empty()) domain_error("order_specifier", spec);
      Collector c;
      std::vector<uint64_t> keys;
      for (uint64_t s : specs) {
        uint64_t d = deref(s);
        const Cell& sc = heap_[d];
        if (sc.tag == Tag::kRef) instantiation_error();
        if (sc.tag != Tag::kStruct || heap_[sc.u].arity != 1 ||
            (heap_[sc.u].u != atom::kAsc && heap_[sc.u].u != atom::kDesc)) {
          domain_error("order_specifier", d);
        }
        c.desc.push_back(heap_[sc.u].u == atom::kDesc);
        keys.push_back(sc.u + 1);
      }
      uint64_t kargs = 0;
      uint64_t ktuple = new_struct_cell(intern("v"), static_cast<uint32_t>(keys.size()), &kargs);
      for (size_t i = 0; i < keys.size(); ++i) heap_[kargs + i] = Cell::Ref(keys[i]);
      uint64_t pargs = 0;
      uint64_t pair = new_struct_cell(atom::kMinus, 2, &pargs);
      heap_[pargs] = Cell::Ref(ktuple);
      heap_[pargs + 1] = Cell::Ref(fa + 2);
      c.template_slot = pair;
      c.result_slot = fa + 2;
      c.aggregate = atom::kOrderBy;
      int64_t id = next_collector_++;
      collectors_.emplace(id, std::move(c));
      uint64_t h = cps_.size();
      ChoicePoint& cp = push_cp(CpKind::kCollectEnd);
      cp.aux = id;
      cp.tdepth = tdepth;
      cont_ = FrameRef(new_frame(FrameKind::kCollect, 0, 0, tdepth, id, nullptr));
      push_goal(fa + 2, h + 1, tdepth + 1);
      return true;
    }
    case key(atom::kTime, 1): {
      Collector c;
      c.start_elapsed = elapsed();
      c.start_inferences = inferences_;
      int64_t id = next_collector_++;
      collectors_.emplace(id, std::move(c));
      uint64_t h = cps_.size();
      ChoicePoint& cp = push_cp(CpKind::kTimeFail);
      cp.aux = id;
      push_frame(FrameKind::kTimeExit, 0, 0, tdepth, id);
      push_goal(fa + 1, h + 1, tdepth + 1);
      return true;
    }
    default: break;
  }
  handled = false;
  return false;
}

// --- assert and retract -----------------------------------------------------

namespace {

void split_clause(const Term& t, Term& head, Term& body) {
  if (t.is_compound(":-", 2)) {
    head = t.arg(0);
    body = t.arg(1);
  } else {
    head = t;
    body = Term::Atom("true");
  }
}

}  // namespace

void Machine::assert_clause(uint64_t clause, bool at_end) {
  Term t = export_term(clause);
  Term head;
  Term body;
  split_clause(t, head, body);
  if (head.is_var()) instantiation_error();
  if (head.is_compound(":", 2)) {
    permission_error("modify", "static_procedure", head);
  }
  if (!head.is_callable()) type_error("callable", import_term(head));
  if (body.is_number()) type_error("callable", import_term(body));
  Term pi = Term::Compound("/", {Term::Atom(head.name()), Term::Int(static_cast<int64_t>(head.arity()))});
  if (is_builtin(head.name(), head.arity())) permission_error("modify", "static_procedure", pi);
  uint64_t k = db_.key_of(head.name(), head.arity());
  Predicate* p = db_.find(k);
  if (p != nullptr && !p->dynamic && (p->origin == Origin::kLibrary || !p->clauses->empty())) {
    permission_error("modify", "static_procedure", pi);
  }
  ClausePtr c = db_.make_clause(head, body, 0);
  Predicate& pred = db_.preds[k];
  pred.dynamic = true;
  pred.origin = Origin::kLocal;
  db_.add_clause(k, std::move(c), at_end);
}

bool Machine::retract_clause(uint64_t clause) {
  uint64_t a = deref(clause);
  uint64_t head = a;
  uint64_t body = 0;
  const Cell& c = heap_[a];
  if (c.tag == Tag::kRef) instantiation_error();
  if (c.tag == Tag::kStruct && heap_[c.u].u == atom::kNeck && heap_[c.u].arity == 2) {
    head = deref(c.u + 1);
    body = c.u + 2;
  }
  const Cell& h = heap_[head];
  uint32_t name = 0;
  uint32_t arity = 0;
  if (h.tag == Tag::kAtom) {
    name = static_cast<uint32_t>(h.u);
  } else if (h.tag == Tag::kStruct) {
    name = static_cast<uint32_t>(heap_[h.u].u);
    arity = heap_[h.u].arity;
  } else if (h.tag == Tag::kRef) {
    instantiation_error();
  } else {
    type_error("callable", head);
  }
  if (name == atom::kColon && arity == 2) {
    permission_error("modify", "static_procedure", export_term(head));
  }
  if (body == 0) body = new_atom(atom::kTrue);
  uint64_t k = key(name, arity);
  Predicate* p = db_.find(k);
  if (p == nullptr) return false;
  Term pi = Term::Compound("/", {Term::Atom(atom_name(name)), Term::Int(arity)});
  if (!p->dynamic) permission_error("modify", "static_procedure", pi);
  std::shared_ptr<const ClauseList> clauses = p->clauses;
  for (const ClausePtr& cl : *clauses) {
    uint64_t h0 = cps_.size();
    push_cp(CpKind::kAlt);
    uint64_t base = copy_in(cl->tmpl);
    if (unify(base, head) && unify(base + 1, body)) {
      cut_to(h0);
      auto next = std::make_shared<ClauseList>();
      for (const ClausePtr& other : *db_.find(k)->clauses) {
        if (other != cl) next->push_back(other);
      }
      db_.find(k)->clauses = std::move(next);
      return true;
    }
    undo_to(cps_.back());
    cut_to(h0);
  }
  return false;
}

// --- tracer -------------------------------------------------------------------

int Machine::line_of(uint64_t slot) const {
  return slot < heap_line_.size() ? static_cast<int>(heap_line_[slot]) : 0;
}

bool Machine::should_pause(Port port, int32_t depth, int line) const {
  const DebugState& ds = opts_.debug_state;
  bool at_breakpoint = port == Port::kCall && line > 0 && ds.breakpoints.count(line) > 0;
  switch (ds.mode) {
    case DebugMode::kOff: return false;
    case DebugMode::kCreep: return true;
    case DebugMode::kSkip: return depth <= ds.depth || at_breakpoint;
    case DebugMode::kOut: return depth < ds.depth || at_breakpoint;
    case DebugMode::kNodebugUntilBreakpoint: return at_breakpoint;
  }
  return false;
}

void Machine::trace_port(Port port, uint64_t goal, int32_t depth, int64_t frame, int line,
                         bool& retry) {
  retry = false;
  PortEvent ev;
  ev.port = port;
  ev.goal = export_term(goal);
  ev.depth = depth;
  if (line > 0) ev.line = line;
  ev.frame = frame;
  opts_.debug->on_port(ev);
  if (!should_pause(port, depth, line)) return;
  DebugState& ds = opts_.debug_state;
  for (;;) {
    auto t0 = Clock::now();
    DebugCommand cmd = opts_.debug->on_pause(ev);
    paused_in_run_ += std::chrono::duration<double>(Clock::now() - t0).count();
    if (opts_.abort != nullptr && opts_.abort->load()) throw QueryAborted();
    switch (cmd) {
      case DebugCommand::kStepInto: ds.mode = DebugMode::kCreep; return;
      case DebugCommand::kStepOver:
        ds.mode = DebugMode::kSkip;
        ds.depth = depth;
        return;
      case DebugCommand::kStepOut:
        ds.mode = DebugMode::kOut;
        ds.depth = depth;
        return;
      case DebugCommand::kContinue: ds.mode = DebugMode::kNodebugUntilBreakpoint; return;
      case DebugCommand::kAbort: throw QueryAborted();
      case DebugCommand::kRetry:
        // Already at the call port: nothing to undo, ask again.
        if (port == Port::kCall) continue;
        ds.mode = DebugMode::kCreep;
        retry = true;
        return;
    }
  }
}

bool Machine::trace_call(uint64_t slot, uint64_t goal, uint64_t cut, int32_t tdepth, int line) {
  if (line < 0) line = line_of(slot);
  int64_t id = ++next_frame_id_;
  bool retry = false;
  trace_port(Port::kCall, goal, tdepth, id, line, retry);
  uint64_t h = cps_.size();
  ChoicePoint& cp = push_cp(CpKind::kFailPort);
  cp.goal = goal;
  cp.cut = cut;
  cp.tdepth = tdepth;
  cp.aux = id;
  cp.state = line;
  push_frame(FrameKind::kTraceExit, goal, h, tdepth, id);
  const Cell& c = heap_[goal];
  uint32_t name = c.tag == Tag::kAtom ? static_cast<uint32_t>(c.u)
                                      : static_cast<uint32_t>(heap_[c.u].u);
  uint32_t arity = c.tag == Tag::kAtom ? 0 : heap_[c.u].arity;
  bool handled = false;
  bool ok = call_meta(name, arity, goal, cut, tdepth, handled);
  if (handled) return ok;
  uint64_t k = key(name, arity);
  if (const BuiltinEntry* b = lookup_builtin(k)) return call_builtin(goal, *b);
  if (const Predicate* p = db_.find(k)) return call_predicate(goal, k, *p, tdepth);
  existence_error("procedure",
                  Term::Compound("/", {Term::Atom(atom_name(name)), Term::Int(arity)}));
}

bool Machine::do_retry(uint64_t fail_port) {
  if (fail_port >= cps_.size() || cps_[fail_port].kind != CpKind::kFailPort) return false;
  cut_to(fail_port + 1);
  undo_to(cps_[fail_port]);
  ChoicePoint& cp = cps_[fail_port];
  uint64_t goal = cp.goal;
  uint64_t cut = cp.cut;
  int32_t tdepth = cp.tdepth;
  int line = static_cast<int>(cp.state);
  cont_ = cp.cont;
  cps_.pop_back();
  return trace_call(0, goal, cut, tdepth, line);
}

bool Machine::trace_exit(Frame* f) {
  uint64_t h = f->cut;
  int64_t id = f->aux;
  if (h >= cps_.size() || cps_[h].kind != CpKind::kFailPort || cps_[h].aux != id) return true;
  int line = static_cast<int>(cps_[h].state);
  bool det = cps_.size() == h + 1;
  bool retry = false;
  trace_port(Port::kExit, f->goal, f->tdepth, id, line, retry);
  if (retry) return do_retry(h);
  if (det) {
    cps_.pop_back();
  } else {
    ChoicePoint& cp = push_cp(CpKind::kRedoPort);
    cp.goal = f->goal;
    cp.tdepth = f->tdepth;
    cp.aux = id;
    cp.state = line;
    cp.cut = h;
  }
  return true;
}

}  // namespace plweb::detail
