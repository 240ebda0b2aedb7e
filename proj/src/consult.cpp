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

#include <algorithm>
#include <set>

#include "database.hpp"
#include "plweb/engine.hpp"
#include "plweb/writer.hpp"

namespace plweb {

namespace {

class Loader {
 public:
  Loader(Workspace& ws, const ConsultOptions& opts) : ws_(ws), db_(ws.db()), opts_(opts) {}

  void load(std::span<const ParsedTerm> program) {
    for (const ParsedTerm& pt : program) handle(pt);
  }

  void run_initialization() {
    for (const auto& [goal, line] : init_goals_) run_goal(goal, line);
  }

  std::vector<LoadError> take_errors() { return std::move(errors_); }

 private:
  void error(std::string kind, std::string message, size_t line, Term culprit = Term::Nil()) {
    errors_.push_back({std::move(kind), std::move(message), line, std::move(culprit)});
  }

  static Term pi(const std::string& name, size_t arity) {
    return Term::Compound("/", {Term::Atom(name), Term::Int(static_cast<int64_t>(arity))});
  }

  void handle(const ParsedTerm& pt) {
    if (pt.is_directive()) {
      directive(pt.term.arg(0), pt.line);
      return;
    }
    const Term& t = pt.term;
    bool rule = t.is_compound(":-", 2);
    Term head = rule ? t.arg(0) : t;
    Term body = rule ? t.arg(1) : Term::Atom("true");
    if (head.is_var()) {
      error("instantiation", "clause head is a variable", pt.line, t);
      return;
    }
    if (!head.is_callable()) {
      error("type", "clause head is not callable: " + writeq(head, db_.ops), pt.line, head);
      return;
    }
    if (body.is_number()) {
      error("type", "clause body is not callable: " + writeq(body, db_.ops), pt.line, body);
      return;
    }
    if (head.is_compound(":", 2)) {
      error("permission", "module-qualified clause heads are not allowed", pt.line, head);
      return;
    }
    if (is_builtin(head.name(), head.arity())) {
      error("permission",
            "No permission to modify static procedure " + writeq(pi(head.name(), head.arity())),
            pt.line, pi(head.name(), head.arity()));
      return;
    }
    uint64_t key = claim(head.name(), head.arity());
    const TermLayout* body_layout =
        rule && pt.layout.args.size() == 2 ? &pt.layout.args[1] : nullptr;
    db_.add_clause(key, db_.make_clause(head, body, pt.line, body_layout), true);
  }

  /// The key of a predicate owned by this program. The first local
  /// clause or declaration replaces a library definition.
  uint64_t claim(const std::string& name, size_t arity) {
    uint64_t key = db_.key_of(name, arity);
    detail::Predicate& p = db_.preds[key];
    if (p.origin == Origin::kLibrary) p = detail::Predicate{};
    return key;
  }

  bool indicators(const Term& specs, std::vector<Indicator>& out) {
    std::vector<Term> items;
    if (specs.is_list_cell() || specs.is_nil()) {
      Term cur = specs;
      while (cur.is_list_cell()) {
        items.push_back(cur.arg(0));
        cur = cur.arg(1);
      }
      if (!cur.is_nil()) return false;
    } else {
      items = conjuncts(specs);
    }
    for (const Term& s : items) {
      if (!s.is_compound("/", 2) || !s.arg(0).is_atom() || !s.arg(1).is_int() ||
          s.arg(1).int_value() < 0) {
        return false;
      }
      out.push_back({s.arg(0).name(), static_cast<size_t>(s.arg(1).int_value())});
    }
    return true;
  }

  void directive(const Term& d, size_t line) {
    if (opts_.check_directive) {
      if (auto refused = opts_.check_directive(d)) {
        if (refused->line == 0) refused->line = line;
        errors_.push_back(std::move(*refused));
        return;
      }
    }
    if (d.is_compound("dynamic", 1)) {
      std::vector<Indicator> specs;
      if (!indicators(d.arg(0), specs)) {
        error("type", "dynamic/1 expects Name/Arity specifications", line, d);
        return;
      }
      for (const Indicator& s : specs) {
        if (is_builtin(s.name, s.arity)) {
          error("permission", "No permission to modify static procedure " + s.str(), line,
                pi(s.name, s.arity));
          continue;
        }
        uint64_t key = claim(s.name, s.arity);
        db_.preds[key].dynamic = true;
      }
      return;
    }
    if (d.is_compound("discontiguous", 1)) return;
    if (d.is_compound("op", 3)) {
      if (!apply_op_directive(d, db_.ops)) {
        error("directive", "invalid operator definition " + writeq(d, db_.ops), line, d);
      }
      return;
    }
    if (d.is_compound("use_rendering", 1) || d.is_compound("use_rendering", 2)) {
      if (!d.arg(0).is_atom()) {
        error("type", "use_rendering/1 expects a renderer name", line, d);
        return;
      }
      ws_.add_renderer(d.arg(0).name());
      return;
    }
    if (d.is_compound("include", 1)) {
      include(d.arg(0), line);
      return;
    }
    if (d.is_compound("initialization", 1) || d.is_compound("initialization", 2)) {
      if (opts_.run_other_directives) {
        init_goals_.emplace_back(d.arg(0), line);
      } else {
        error("directive", "initialization/1 is not allowed", line, d);
      }
      return;
    }
    if (opts_.run_other_directives) {
      run_goal(d, line);
      return;
    }
    error("directive", "unsupported directive " + writeq(d, db_.ops), line, d);
  }

  void include(const Term& spec, size_t line) {
    if (!spec.is_atom()) {
      error("type", "include/1 expects a file name", line, spec);
      return;
    }
    const std::string& name = spec.name();
    if (std::find(include_stack_.begin(), include_stack_.end(), name) != include_stack_.end()) {
      error("include_cycle", "include cycle through " + name, line, spec);
      return;
    }
    std::optional<std::string> text;
    if (opts_.include) text = opts_.include(name);
    if (!text) {
      error("include", "cannot include " + name + ": no such file", line, spec);
      return;
    }
    ProgramParse parsed = parse_program(*text, db_.ops);
    for (const SyntaxError& e : parsed.errors) {
      error("syntax", name + ":" + std::to_string(e.line()) + ": " + e.what(), line, spec);
    }
    include_stack_.push_back(name);
    for (const ParsedTerm& pt : parsed.terms) {
      // Clauses from the included file point at the include directive.
      ParsedTerm copy = pt;
      copy.line = line;
      copy.layout = TermLayout{};
      handle(copy);
    }
    include_stack_.pop_back();
  }

  void run_goal(const Term& goal, size_t line) {
    std::vector<std::pair<std::string, Term>> vars;
    try {
      if (!solve_once(ws_, goal, vars)) {
        error("directive", "directive failed: " + writeq(goal, db_.ops), line, goal);
      }
    } catch (const PrologError& e) {
      error(e.kind(), "directive raised " + writeq(e.term(), db_.ops), line, e.term());
    } catch (const QueryAborted&) {
      error("directive", "directive aborted", line, goal);
    }
  }

  Workspace& ws_;
  detail::Database& db_;
  const ConsultOptions& opts_;
  std::vector<std::string> include_stack_;
  std::vector<std::pair<Term, size_t>> init_goals_;
  std::vector<LoadError> errors_;
};

}  // namespace

std::vector<LoadError> consult(Workspace& ws, std::span<const ParsedTerm> program,
                               const ConsultOptions& options) {
  Loader loader(ws, options);
  loader.load(program);
  loader.run_initialization();
  return loader.take_errors();
}

std::vector<LoadError> consult_text(Workspace& ws, std::string_view text,
                                    const ConsultOptions& options) {
  ProgramParse parsed = parse_program(text, ws.ops());
  std::vector<LoadError> errors;
  for (const SyntaxError& e : parsed.errors) {
    errors.push_back({"syntax", e.what(), e.line(), Term::Nil()});
  }
  std::vector<LoadError> rest = consult(ws, parsed.terms, options);
  errors.insert(errors.end(), rest.begin(), rest.end());
  std::stable_sort(errors.begin(), errors.end(),
                   [](const LoadError& a, const LoadError& b) { return a.line < b.line; });
  return errors;
}

}  // namespace plweb
