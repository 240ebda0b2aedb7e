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

#include "database.hpp"

#include <algorithm>

#include "plweb/engine.hpp"

namespace plweb {

std::string_view origin_name(Origin origin) {
  switch (origin) {
    case Origin::kBuiltin: return "builtin";
    case Origin::kLibrary: return "library";
    case Origin::kLocal: return "local";
  }
  return "local";
}

namespace detail {

namespace {

bool is_control(const Term& g) {
  return g.is_compound(",", 2) || g.is_compound(";", 2) || g.is_compound("->", 2) ||
         g.is_compound("*->", 2);
}

Cell index_key(const Cell& c, const Template& t) {
  if (c.tag == Tag::kStruct) return t.cells[c.u];
  return c;
}

}  // namespace

Term normalize_body(const Term& body) {
  if (body.is_var()) return Term::Compound("call", {body});
  if (is_control(body)) {
    return Term::Compound(body.name(), {normalize_body(body.arg(0)), normalize_body(body.arg(1))});
  }
  if (body.is_compound("\\+", 1)) {
    return Term::Compound("\\+", {normalize_body(body.arg(0))});
  }
  return body;
}

ClausePtr Database::make_clause(const Term& head, const Term& body, size_t line,
                                const TermLayout* body_layout) {
  auto c = std::make_shared<Clause>();
  c->head = head;
  c->body = normalize_body(body);
  c->line = line;
  std::vector<Term> roots{c->head, c->body};
  std::unordered_map<const Term*, size_t> slots;
  c->tmpl = compile_terms(roots, atoms, strings, nullptr, body_layout ? &slots : nullptr);
  if (body_layout != nullptr) {
    c->goal_lines.assign(c->tmpl.cells.size(), 0);
    // Walk goal positions of the body together with their layout.
    std::vector<std::pair<const Term*, const TermLayout*>> work{{&roots[1], body_layout}};
    while (!work.empty()) {
      auto [g, l] = work.back();
      work.pop_back();
      auto it = slots.find(g);
      if (it != slots.end() && l != nullptr) {
        c->goal_lines[it->second] = static_cast<uint32_t>(l->line);
      }
      if (!g->is_compound()) continue;
      std::vector<int> meta;
      if (is_control(*g)) {
        meta = {0, 0};
      } else if (g->is_compound("\\+", 1)) {
        meta = {0};
      } else if (const BuiltinInfo* b = find_builtin(g->name(), g->arity())) {
        meta = b->meta;
      }
      for (size_t i = 0; i < meta.size() && i < g->arity(); ++i) {
        if (meta[i] != 0) continue;
        const TermLayout* al =
            l != nullptr && l->args.size() == g->arity() ? &l->args[i] : nullptr;
        work.emplace_back(&g->arg(i), al);
      }
    }
  }
  const Cell& h = c->tmpl.cells[0];
  if (h.tag == Tag::kStruct) {
    const Cell& f = c->tmpl.cells[h.u];
    for (size_t i = 0; i < Clause::kIndexedArgs && i < f.arity; ++i) {
      c->keys[i] = index_key(c->tmpl.cells[h.u + 1 + i], c->tmpl);
    }
  }
  return c;
}

void Database::add_clause(uint64_t key, ClausePtr clause, bool at_end) {
  Predicate& p = preds[key];
  auto next = std::make_shared<ClauseList>(*p.clauses);
  if (at_end) {
    next->push_back(std::move(clause));
  } else {
    next->insert(next->begin(), std::move(clause));
  }
  p.clauses = std::move(next);
}

}  // namespace detail

Workspace::Workspace() : db_(std::make_unique<detail::Database>(detail::base_database())) {}
Workspace::Workspace(const Workspace& other)
    : db_(std::make_unique<detail::Database>(*other.db_)) {}
Workspace& Workspace::operator=(const Workspace& other) {
  if (this != &other) db_ = std::make_unique<detail::Database>(*other.db_);
  return *this;
}
Workspace::Workspace(Workspace&&) noexcept = default;
Workspace& Workspace::operator=(Workspace&&) noexcept = default;
Workspace::~Workspace() = default;

const OperatorTable& Workspace::ops() const { return db_->ops; }
OperatorTable& Workspace::ops() { return db_->ops; }
const std::vector<std::string>& Workspace::renderers() const { return db_->renderers; }

void Workspace::add_renderer(const std::string& name) {
  auto& r = db_->renderers;
  if (std::find(r.begin(), r.end(), name) == r.end()) r.push_back(name);
}

std::optional<Origin> Workspace::origin(const std::string& name, size_t arity) const {
  if (is_builtin(name, arity)) return Origin::kBuiltin;
  if (const detail::Predicate* p = db_->find(name, arity)) return p->origin;
  return std::nullopt;
}

bool Workspace::is_dynamic(const std::string& name, size_t arity) const {
  const detail::Predicate* p = db_->find(name, arity);
  return p != nullptr && p->dynamic;
}

std::vector<Indicator> Workspace::predicates() const {
  std::vector<Indicator> out;
  for (const auto& [key, p] : db_->preds) {
    out.push_back({db_->atoms.name(detail::key_name(key)), detail::key_arity(key)});
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Term> Workspace::clauses(const std::string& name, size_t arity) const {
  std::vector<Term> out;
  if (const detail::Predicate* p = db_->find(name, arity)) {
    for (const auto& c : *p->clauses) out.push_back(Term::Compound(":-", {c->head, c->body}));
  }
  return out;
}

std::vector<size_t> Workspace::clause_lines(const std::string& name, size_t arity) const {
  std::vector<size_t> out;
  if (const detail::Predicate* p = db_->find(name, arity)) {
    for (const auto& c : *p->clauses) out.push_back(c->line);
  }
  return out;
}

}  // namespace plweb
