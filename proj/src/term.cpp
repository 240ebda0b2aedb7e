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

#include "plweb/term.hpp"

#include <cassert>
#include <unordered_map>
#include <unordered_set>

namespace plweb {

struct Term::Node {
  Kind kind = Kind::kAtom;
  std::string text;
  int64_t ival = 0;
  double fval = 0.0;
  std::vector<Term> args;

  Node() = default;
  Node(const Node&) = delete;
  Node& operator=(const Node&) = delete;

  // Long lists would otherwise be released recursively, one stack frame per
  // element. Steal uniquely owned children into an explicit work list.
  ~Node() {
    if (args.empty()) return;
    std::vector<std::shared_ptr<Node>> pending;
    auto steal = [&pending](std::vector<Term>& from) {
      for (Term& t : from) {
        if (t.node_ && t.node_.use_count() == 1 && !t.node_->args.empty()) {
          pending.push_back(std::move(t.node_));
        }
      }
      from.clear();
    };
    steal(args);
    while (!pending.empty()) {
      std::shared_ptr<Node> n = std::move(pending.back());
      pending.pop_back();
      steal(n->args);
    }
  }
};

Term::Term() {
  static const std::shared_ptr<Node> empty = [] {
    auto n = std::make_shared<Node>();
    n->kind = Kind::kAtom;
    return n;
  }();
  node_ = empty;
}

Term Term::Var(int64_t id, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kVar;
  n->ival = id;
  n->text = std::move(name);
  return Term(std::move(n));
}

Term Term::Atom(std::string name) {
  if (name.empty()) return Term();
  auto n = std::make_shared<Node>();
  n->kind = Kind::kAtom;
  n->text = std::move(name);
  return Term(std::move(n));
}

Term Term::Int(int64_t value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kInt;
  n->ival = value;
  return Term(std::move(n));
}

Term Term::Float(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kFloat;
  n->fval = value;
  return Term(std::move(n));
}

Term Term::String(std::string text) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::kString;
  n->text = std::move(text);
  return Term(std::move(n));
}

Term Term::Compound(std::string functor, std::vector<Term> args) {
  if (args.empty()) return Atom(std::move(functor));
  auto n = std::make_shared<Node>();
  n->kind = Kind::kCompound;
  n->text = std::move(functor);
  n->args = std::move(args);
  return Term(std::move(n));
}

Term Term::List(std::vector<Term> items, Term tail) {
  Term list = std::move(tail);
  for (auto it = items.rbegin(); it != items.rend(); ++it) {
    list = Compound(".", {std::move(*it), std::move(list)});
  }
  return list;
}

Term::Kind Term::kind() const { return node_->kind; }

bool Term::is_atom(std::string_view name) const {
  return node_->kind == Kind::kAtom && node_->text == name;
}

bool Term::is_compound(std::string_view functor, size_t arity) const {
  return node_->kind == Kind::kCompound && node_->args.size() == arity &&
         node_->text == functor;
}

const std::string& Term::name() const { return node_->text; }
int64_t Term::int_value() const { return node_->ival; }
double Term::float_value() const { return node_->fval; }
int64_t Term::var_id() const { return node_->ival; }
size_t Term::arity() const { return node_->args.size(); }
const Term& Term::arg(size_t i) const { return node_->args.at(i); }
std::span<const Term> Term::args() const { return node_->args; }

std::optional<std::vector<Term>> Term::list_items() const {
  std::vector<Term> items;
  const Term* cur = this;
  while (cur->is_list_cell()) {
    items.push_back(cur->arg(0));
    cur = &cur->arg(1);
  }
  if (!cur->is_nil()) return std::nullopt;
  return items;
}

bool operator==(const Term& a, const Term& b) {
  const Term* x = &a;
  const Term* y = &b;
  for (;;) {
    if (x->node_ == y->node_) return true;
    if (x->kind() != y->kind()) return false;
    switch (x->kind()) {
      case Term::Kind::kVar:
        return x->var_id() == y->var_id();
      case Term::Kind::kAtom:
      case Term::Kind::kString:
        return x->name() == y->name();
      case Term::Kind::kInt:
        return x->int_value() == y->int_value();
      case Term::Kind::kFloat:
        return x->float_value() == y->float_value();
      case Term::Kind::kCompound: {
        if (x->arity() != y->arity() || x->name() != y->name()) return false;
        size_t n = x->arity();
        for (size_t i = 0; i + 1 < n; ++i) {
          if (!(x->arg(i) == y->arg(i))) return false;
        }
        x = &x->arg(n - 1);
        y = &y->arg(n - 1);
        break;
      }
    }
  }
}

namespace {

int kind_rank(const Term& t) {
  switch (t.kind()) {
    case Term::Kind::kVar: return 0;
    case Term::Kind::kInt:
    case Term::Kind::kFloat: return 1;
    case Term::Kind::kAtom: return 3;
    case Term::Kind::kString: return 4;
    case Term::Kind::kCompound: return 5;
  }
  return 6;
}

int compare_numbers(const Term& a, const Term& b) {
  long double x = a.is_int() ? static_cast<long double>(a.int_value())
                             : static_cast<long double>(a.float_value());
  long double y = b.is_int() ? static_cast<long double>(b.int_value())
                             : static_cast<long double>(b.float_value());
  if (a.is_int() && b.is_int()) {
    if (a.int_value() != b.int_value()) {
      return a.int_value() < b.int_value() ? -1 : 1;
    }
    return 0;
  }
  if (x < y) return -1;
  if (x > y) return 1;
  if (a.is_float() && b.is_int()) return -1;
  if (a.is_int() && b.is_float()) return 1;
  return 0;
}

int sign(int v) { return v < 0 ? -1 : (v > 0 ? 1 : 0); }

}  // namespace

int compare_terms(const Term& a, const Term& b) {
  const Term* x = &a;
  const Term* y = &b;
  for (;;) {
    int rx = kind_rank(*x);
    int ry = kind_rank(*y);
    if (rx != ry) return rx < ry ? -1 : 1;
    switch (x->kind()) {
      case Term::Kind::kVar:
        if (x->var_id() == y->var_id()) return 0;
        return x->var_id() < y->var_id() ? -1 : 1;
      case Term::Kind::kInt:
      case Term::Kind::kFloat:
        return compare_numbers(*x, *y);
      case Term::Kind::kAtom:
      case Term::Kind::kString:
        return sign(x->name().compare(y->name()));
      case Term::Kind::kCompound: {
        if (x->arity() != y->arity()) return x->arity() < y->arity() ? -1 : 1;
        if (int c = x->name().compare(y->name()); c != 0) return sign(c);
        size_t n = x->arity();
        for (size_t i = 0; i + 1 < n; ++i) {
          if (int c = compare_terms(x->arg(i), y->arg(i)); c != 0) return c;
        }
        x = &x->arg(n - 1);
        y = &y->arg(n - 1);
        break;
      }
    }
  }
}

namespace {

bool variant_rec(const Term& a, const Term& b,
                 std::unordered_map<int64_t, int64_t>& fwd,
                 std::unordered_map<int64_t, int64_t>& bwd) {
  const Term* x = &a;
  const Term* y = &b;
  for (;;) {
    if (x->kind() != y->kind()) return false;
    switch (x->kind()) {
      case Term::Kind::kVar: {
        auto [fi, fnew] = fwd.emplace(x->var_id(), y->var_id());
        auto [bi, bnew] = bwd.emplace(y->var_id(), x->var_id());
        return fi->second == y->var_id() && bi->second == x->var_id();
      }
      case Term::Kind::kCompound: {
        if (x->arity() != y->arity() || x->name() != y->name()) return false;
        size_t n = x->arity();
        for (size_t i = 0; i + 1 < n; ++i) {
          if (!variant_rec(x->arg(i), y->arg(i), fwd, bwd)) return false;
        }
        x = &x->arg(n - 1);
        y = &y->arg(n - 1);
        break;
      }
      default:
        return *x == *y;
    }
  }
}

}  // namespace

bool is_variant(const Term& a, const Term& b) {
  std::unordered_map<int64_t, int64_t> fwd;
  std::unordered_map<int64_t, int64_t> bwd;
  return variant_rec(a, b, fwd, bwd);
}

std::vector<Term> term_variables(const Term& t) {
  std::vector<Term> out;
  std::unordered_set<int64_t> seen;
  std::vector<const Term*> stack{&t};
  while (!stack.empty()) {
    const Term* cur = stack.back();
    stack.pop_back();
    if (cur->is_var()) {
      if (seen.insert(cur->var_id()).second) out.push_back(*cur);
    } else if (cur->is_compound()) {
      auto args = cur->args();
      for (auto it = args.rbegin(); it != args.rend(); ++it) stack.push_back(&*it);
    }
  }
  return out;
}

std::string Indicator::str() const { return name + "/" + std::to_string(arity); }

std::optional<Indicator> indicator_of(const Term& t) {
  if (t.is_atom()) return Indicator{t.name(), 0};
  if (t.is_compound()) return Indicator{t.name(), t.arity()};
  return std::nullopt;
}

std::vector<Term> conjuncts(const Term& t) {
  std::vector<Term> out;
  const Term* cur = &t;
  while (cur->is_compound(",", 2)) {
    out.push_back(cur->arg(0));
    cur = &cur->arg(1);
  }
  out.push_back(*cur);
  return out;
}

}  // namespace plweb
