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

#include "plweb/sandbox.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "plweb/engine.hpp"
#include "plweb/writer.hpp"

namespace plweb {

std::string_view violation_kind_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::kInstantiation: return "instantiation";
    case ViolationKind::kPermission: return "permission";
    case ViolationKind::kCrossModule: return "cross_module";
  }
  return "permission";
}

const std::vector<WhitelistEntry>& whitelist() {
  static const std::vector<WhitelistEntry> table = [] {
    std::vector<WhitelistEntry> out;
    for (const BuiltinInfo& b : builtin_table()) out.push_back({b.name, b.arity, b.meta});
    for (size_t k = 2; k <= 4; ++k) {
      std::vector<int> meta(k, -1);
      meta[0] = static_cast<int>(k) - 1;
      out.push_back({"maplist", k, std::move(meta)});
    }
    std::sort(out.begin(), out.end(), [](const WhitelistEntry& a, const WhitelistEntry& b) {
      return a.name != b.name ? a.name < b.name : a.arity < b.arity;
    });
    return out;
  }();
  return table;
}

const WhitelistEntry* find_whitelisted(std::string_view name, size_t arity) {
  for (const WhitelistEntry& e : whitelist()) {
    if (e.name == name && e.arity == arity) return &e;
  }
  return nullptr;
}

namespace {

constexpr int kCallPatternDepth = 6;
constexpr size_t kMaxSteps = 200'000;

Term pi(const std::string& name, size_t arity) {
  return Term::Compound("/", {Term::Atom(name), Term::Int(static_cast<int64_t>(arity))});
}

/// Side-effecting or object-enumerating predicates of a full Prolog
/// system. They are never whitelisted, so a call is refused rather than
/// left to raise an existence error.
bool is_host_predicate(const std::string& name, size_t arity) {
  static const std::vector<std::pair<std::string, std::vector<size_t>>> table = {
      {"shell", {0, 1, 2}}, {"halt", {0, 1}}, {"open", {3, 4}}, {"close", {1, 2}},
      {"see", {1}}, {"seen", {0}}, {"tell", {1}}, {"told", {0}}, {"append", {1}},
      {"consult", {1}}, {"ensure_loaded", {1}}, {"use_module", {1, 2}},
      {"load_files", {2}}, {"delete_file", {1}}, {"rename_file", {2}},
      {"make_directory", {1}}, {"delete_directory", {1}}, {"exists_file", {1}},
      {"exists_directory", {1}}, {"directory_files", {2}}, {"working_directory", {2}},
      {"getenv", {2}}, {"setenv", {2}}, {"unsetenv", {1}}, {"current_atom", {1}},
      {"current_predicate", {1, 2}}, {"current_module", {1}}, {"predicate_property", {2}},
      {"current_op", {3}}, {"clause", {2}}, {"abolish", {1, 2}}, {"retractall", {1}},
      {"assert", {2}}, {"asserta", {2}}, {"assertz", {2}}, {"erase", {1}},
      {"recorda", {3}}, {"recordz", {3}}, {"recorded", {3}}, {"flag", {3}},
      {"nb_setval", {2}}, {"b_setval", {2}}, {"nb_getval", {2}}, {"b_getval", {2}},
      {"set_prolog_flag", {2}}, {"thread_create", {3}}, {"process_create", {3}},
      {"tmp_file", {2}}, {"set_input", {1}}, {"set_output", {1}}, {"write", {2}},
      {"writeq", {2}}, {"print", {2}}, {"nl", {1}}, {"format", {3}}, {"read", {2}},
      {"read_term", {2, 3}}, {"get_char", {1, 2}}, {"put_char", {1, 2}},
      {"tab", {2}}, {"assertion", {1}}, {"garbage_collect", {0}}, {"prolog", {0}},
      {"http_open", {3}}, {"sleep", {1}}, {"atom_to_term", {3}}, {"term_to_atom", {2}}};
  for (const auto& [n, arities] : table) {
    if (n == name) return std::find(arities.begin(), arities.end(), arity) != arities.end();
  }
  return false;
}

bool is_assert(const Term& g) {
  return g.is_compound("assert", 1) || g.is_compound("asserta", 1) ||
         g.is_compound("assertz", 1);
}

/// Abstract interpretation of a goal by unfolding: bindings made by
/// clause-head unification are tracked so meta-arguments passed down into
/// local predicates are seen by the callee.
class Analyzer {
 public:
  Analyzer(const Workspace& ws, int64_t first_fresh) : ws_(ws), fresh_(first_fresh) {}

  std::optional<Violation> run(const Term& root) {
    trace_.push_back(root);
    return goal(root, true);
  }

 private:
  Term deref(Term t) const {
    while (t.is_var()) {
      auto it = bindings_.find(t.var_id());
      if (it == bindings_.end()) break;
      t = it->second;
    }
    return t;
  }

  /// Applies the bindings. Subterms below depth limit become fresh
  /// variables, which keeps call patterns finite for recursive programs.
  Term resolve(const Term& t, int limit = 10'000) {
    Term d = deref(t);
    if (!d.is_compound()) return d;
    if (limit <= 0) return fresh_var();
    std::vector<Term> args;
    args.reserve(d.arity());
    for (const Term& a : d.args()) args.push_back(resolve(a, limit - 1));
    return Term::Compound(d.name(), std::move(args));
  }

  Term fresh_var() { return Term::Var(fresh_++); }

  bool occurs(int64_t id, const Term& t) const {
    Term d = deref(t);
    if (d.is_var()) return d.var_id() == id;
    if (!d.is_compound()) return false;
    return std::any_of(d.args().begin(), d.args().end(),
                       [&](const Term& a) { return occurs(id, a); });
  }

  bool unify(const Term& a, const Term& b) {
    Term x = deref(a);
    Term y = deref(b);
    if (x.is_var() && y.is_var() && x.var_id() == y.var_id()) return true;
    if (x.is_var() || y.is_var()) {
      const Term& v = x.is_var() ? x : y;
      const Term& other = x.is_var() ? y : x;
      // A cyclic binding is left out; the variable stays unbound, which
      // only makes the analysis more cautious.
      if (!occurs(v.var_id(), other)) bindings_[v.var_id()] = other;
      return true;
    }
    if (x.kind() != y.kind()) return false;
    if (!x.is_compound()) return x == y;
    if (x.name() != y.name() || x.arity() != y.arity()) return false;
    for (size_t i = 0; i < x.arity(); ++i) {
      if (!unify(x.arg(i), y.arg(i))) return false;
    }
    return true;
  }

  Term rename(const Term& t, std::unordered_map<int64_t, Term>& map) {
    if (t.is_var()) {
      auto [it, fresh] = map.try_emplace(t.var_id());
      if (fresh) it->second = fresh_var();
      return it->second;
    }
    if (!t.is_compound()) return t;
    std::vector<Term> args;
    for (const Term& a : t.args()) args.push_back(rename(a, map));
    return Term::Compound(t.name(), std::move(args));
  }

  /// Variant key: variables numbered by first occurrence.
  void key_of(const Term& t, std::unordered_map<int64_t, size_t>& vars, std::string& out) const {
    if (t.is_var()) {
      auto [it, fresh] = vars.try_emplace(t.var_id(), vars.size());
      out += "_G" + std::to_string(it->second);
      return;
    }
    if (!t.is_compound()) {
      out += writeq(t);
      return;
    }
    out += writeq(Term::Atom(t.name()));
    out += '(';
    for (size_t i = 0; i < t.arity(); ++i) {
      if (i > 0) out += ',';
      key_of(t.arg(i), vars, out);
    }
    out += ')';
  }

  Violation violation(ViolationKind kind, const Term& culprit, std::string message) {
    Violation v{kind, resolve(culprit), {}, std::move(message)};
    for (const Term& t : trace_) v.trace.push_back(resolve(t));
    return v;
  }

  std::optional<Violation> goal(const Term& g0, bool root) {
    if (++steps_ > kMaxSteps) {
      return violation(ViolationKind::kPermission, g0, "goal is too complex to analyze");
    }
    Term g = deref(g0);
    if (g.is_var()) {
      return violation(ViolationKind::kInstantiation, g, "goal is not sufficiently instantiated");
    }
    if (g.is_compound(":", 2)) {
      return violation(ViolationKind::kCrossModule, g, "module-qualified goals are not allowed");
    }
    // Calling a number fails with a type error at run time.
    if (!g.is_callable()) return std::nullopt;
    if (g.is_compound(",", 2) || g.is_compound("->", 2)) {
      if (auto v = goal(g.arg(0), false)) return v;
      return goal(g.arg(1), false);
    }
    if (g.is_compound(";", 2)) {
      // Bindings of a branch do not reach its sibling or the continuation.
      auto saved = bindings_;
      if (auto v = goal(g.arg(0), false)) return v;
      bindings_ = saved;
      if (auto v = goal(g.arg(1), false)) return v;
      bindings_ = std::move(saved);
      return std::nullopt;
    }
    if (g.is_compound("\\+", 1)) {
      auto saved = bindings_;
      if (auto v = goal(g.arg(0), false)) return v;
      bindings_ = std::move(saved);
      return std::nullopt;
    }
    if (g.is_compound("=", 2)) {
      auto saved = bindings_;
      if (!unify(g.arg(0), g.arg(1))) bindings_ = std::move(saved);
      return std::nullopt;
    }
    if (g.is_atom("true") || g.is_atom("fail") || g.is_atom("false") || g.is_atom("!")) {
      return std::nullopt;
    }
    if (!root) trace_.push_back(g);
    std::optional<Violation> v = callable(g);
    if (!root) trace_.pop_back();
    return v;
  }

  std::optional<Violation> callable(const Term& g) {
    const std::string& name = g.name();
    size_t arity = g.arity();
    if (is_assert(g) || g.is_compound("retract", 1)) return clause_arg(g);
    std::optional<Origin> origin = ws_.origin(name, arity);
    // Pure library predicates are unfolded like local ones, which sees
    // through data passed to their meta-arguments.
    if (origin == Origin::kLocal || origin == Origin::kLibrary) return unfold(g);
    if (const WhitelistEntry* e = find_whitelisted(name, arity)) return meta_args(g, *e);
    // An undefined predicate raises an existence error when called.
    if (!is_host_predicate(name, arity)) return std::nullopt;
    return violation(ViolationKind::kPermission, g,
                     "No permission to call sandboxed " + writeq(pi(name, arity)));
  }

  std::optional<Violation> meta_args(const Term& g, const WhitelistEntry& e) {
    for (size_t i = 0; i < e.meta.size(); ++i) {
      if (e.meta[i] < 0) continue;
      Term a = deref(g.arg(i));
      if (a.is_var()) {
        return violation(ViolationKind::kInstantiation, g,
                         "meta-argument " + std::to_string(i + 1) + " of " +
                             writeq(pi(g.name(), g.arity())) + " is unbound");
      }
      if (a.is_compound(":", 2)) {
        return violation(ViolationKind::kCrossModule, a,
                         "module-qualified goals are not allowed");
      }
      if (!a.is_callable()) continue;
      std::vector<Term> args(a.args().begin(), a.args().end());
      if (g.name() == "call") {
        // call/N passes its own remaining arguments.
        args.insert(args.end(), g.args().begin() + 1, g.args().end());
      } else {
        for (int k = 0; k < e.meta[i]; ++k) args.push_back(fresh_var());
      }
      if (auto v = goal(Term::Compound(a.name(), std::move(args)), false)) return v;
    }
    return std::nullopt;
  }

  std::optional<Violation> clause_arg(const Term& g) {
    Term c = deref(g.arg(0));
    if (c.is_var()) {
      if (!is_assert(g)) return std::nullopt;
      return violation(ViolationKind::kInstantiation, g, "asserted clause is unbound");
    }
    Term head = c;
    Term body = Term::Atom("true");
    if (c.is_compound(":-", 2)) {
      head = deref(c.arg(0));
      body = c.arg(1);
    }
    if (head.is_compound(":", 2) || c.is_compound(":", 2)) {
      return violation(ViolationKind::kPermission, head,
                       "No permission to modify a module-qualified predicate");
    }
    if (head.is_var() && is_assert(g)) {
      return violation(ViolationKind::kInstantiation, g, "clause head is unbound");
    }
    if (!is_assert(g)) return std::nullopt;
    return goal(body, false);
  }

  const std::vector<Term>& clauses(const std::string& name, size_t arity) {
    std::string key = name + "/" + std::to_string(arity);
    auto it = clause_cache_.find(key);
    if (it == clause_cache_.end()) it = clause_cache_.emplace(key, ws_.clauses(name, arity)).first;
    return it->second;
  }

  std::optional<Violation> unfold(const Term& g) {
    Term pattern = resolve(g, kCallPatternDepth);
    std::unordered_map<int64_t, size_t> vars;
    std::string key;
    key_of(pattern, vars, key);
    if (!visited_.insert(key).second) return std::nullopt;
    for (const Term& clause : clauses(g.name(), g.arity())) {
      std::unordered_map<int64_t, Term> map;
      Term renamed = rename(clause, map);
      auto saved = bindings_;
      if (unify(renamed.arg(0), pattern)) {
        if (auto v = goal(renamed.arg(1), false)) return v;
      }
      bindings_ = std::move(saved);
    }
    return std::nullopt;
  }

  const Workspace& ws_;
  int64_t fresh_;
  size_t steps_ = 0;
  std::unordered_map<int64_t, Term> bindings_;
  std::vector<Term> trace_;
  std::unordered_set<std::string> visited_;
  std::map<std::string, std::vector<Term>> clause_cache_;
};

int64_t max_var_id(const Term& t) {
  int64_t id = 0;
  for (const Term& v : term_variables(t)) id = std::max(id, v.var_id());
  return id;
}

SafetyVerdict refuse(ViolationKind kind, const Term& culprit, const Term& root,
                     std::string message) {
  return {false, Violation{kind, culprit, {root}, std::move(message)}};
}

/// Name/Arity lists and conjunctions for dynamic/1 and discontiguous/1.
SafetyVerdict indicator_specs(const Term& d) {
  std::vector<Term> items;
  Term cur = d.arg(0);
  if (cur.is_list_cell() || cur.is_nil()) {
    while (cur.is_list_cell()) {
      items.push_back(cur.arg(0));
      cur = cur.arg(1);
    }
    if (cur.is_var()) {
      return refuse(ViolationKind::kInstantiation, cur, d, "partial list of specifications");
    }
  } else {
    items = conjuncts(cur);
  }
  for (const Term& s : items) {
    if (s.is_var()) {
      return refuse(ViolationKind::kInstantiation, s, d, "predicate indicator is unbound");
    }
    if (s.is_compound(":", 2) || (s.is_compound("/", 2) && s.arg(0).is_compound(":", 2))) {
      return refuse(ViolationKind::kPermission, s, d,
                    "No permission to declare a module-qualified predicate");
    }
    if (s.is_compound("/", 2) && (s.arg(0).is_var() || s.arg(1).is_var())) {
      return refuse(ViolationKind::kInstantiation, s, d, "predicate indicator is unbound");
    }
  }
  return {};
}

bool is_op_type(const Term& t) {
  static const std::vector<std::string> types = {"xfx", "xfy", "yfx", "fy", "fx", "xf", "yf"};
  return t.is_atom() && std::find(types.begin(), types.end(), t.name()) != types.end();
}

SafetyVerdict op_directive(const Term& d) {
  const Term& p = d.arg(0);
  const Term& type = d.arg(1);
  const Term& names = d.arg(2);
  for (const Term& a : {p, type, names}) {
    if (a.is_var()) return refuse(ViolationKind::kInstantiation, a, d, "op/3 argument is unbound");
  }
  if (!p.is_int() || p.int_value() < 1 || p.int_value() > 1200) {
    return refuse(ViolationKind::kPermission, d, d, "operator priority must be in 1..1200");
  }
  if (!is_op_type(type)) {
    return refuse(ViolationKind::kPermission, d, d, "invalid operator type " + writeq(type));
  }
  std::vector<Term> items;
  if (names.is_list_cell()) {
    Term cur = names;
    while (cur.is_list_cell()) {
      items.push_back(cur.arg(0));
      cur = cur.arg(1);
    }
    if (!cur.is_nil()) {
      return refuse(ViolationKind::kInstantiation, d, d, "partial list of operator names");
    }
  } else {
    items.push_back(names);
  }
  for (const Term& n : items) {
    if (n.is_var()) return refuse(ViolationKind::kInstantiation, n, d, "operator name is unbound");
    if (n.is_compound(":", 2)) {
      return refuse(ViolationKind::kPermission, n, d,
                    "No permission to define a module-qualified operator");
    }
    if (!n.is_atom() || n.is_atom(",") || n.is_atom("|")) {
      return refuse(ViolationKind::kPermission, n, d,
                    "No permission to modify operator " + writeq(n));
    }
  }
  return {};
}

}  // namespace

SafetyVerdict safe_goal(const Term& goal, const Workspace& ws) {
  Analyzer analyzer(ws, max_var_id(goal) + (int64_t{1} << 32));
  std::optional<Violation> v = analyzer.run(goal);
  if (!v) return {};
  return {false, std::move(v)};
}

SafetyVerdict safe_directive(const Term& d) {
  if (d.is_var()) return refuse(ViolationKind::kInstantiation, d, d, "directive is unbound");
  if (d.is_compound(":", 2)) {
    return refuse(ViolationKind::kCrossModule, d, d, "module-qualified directives are not allowed");
  }
  if (d.is_compound("dynamic", 1) || d.is_compound("discontiguous", 1)) return indicator_specs(d);
  if (d.is_compound("op", 3)) return op_directive(d);
  if (d.is_compound("include", 1)) {
    if (d.arg(0).is_var()) {
      return refuse(ViolationKind::kInstantiation, d.arg(0), d, "include/1 argument is unbound");
    }
    if (d.arg(0).is_atom()) return {};
    return refuse(ViolationKind::kPermission, d, d, "include/1 expects a file name or hash");
  }
  if (d.is_compound("use_rendering", 1) || d.is_compound("use_rendering", 2)) {
    if (d.arg(0).is_var()) {
      return refuse(ViolationKind::kInstantiation, d.arg(0), d, "renderer name is unbound");
    }
    if (d.arg(0).is_atom()) return {};
    return refuse(ViolationKind::kPermission, d, d, "use_rendering expects a renderer name");
  }
  std::string what = d.is_callable() ? writeq(pi(d.name(), d.arity())) : writeq(d);
  return refuse(ViolationKind::kPermission, d, d, "No permission to run directive " + what);
}

std::optional<LoadError> check_directive(const Term& directive) {
  SafetyVerdict v = safe_directive(directive);
  if (v.safe) return std::nullopt;
  return LoadError{std::string(violation_kind_name(v.violation->kind)), v.violation->message, 0,
                   v.violation->culprit};
}

}  // namespace plweb
