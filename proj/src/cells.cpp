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

#include "cells.hpp"

#include <utility>

namespace plweb::detail {

namespace {

constexpr const char* kBaseAtoms[] = {
    "[]",  ".",     ",",      "true",  "fail",     "false",   "!",
    ";",   "->",    "\\+",    "call",  ":-",       ":",       "/",
    "-",   "+",     "",       "error", "...",      "=",       "count",
    "bag", "set",   "asc",    "desc",  "{}",       "|",       "*->",
    "findall", "forall", "aggregate_all", "limit", "distinct", "order_by", "time",
    "$call_cleanup", "$solution_member", "end_of_file"};
static_assert(std::size(kBaseAtoms) == atom::kNumBase);

}  // namespace

AtomTable::AtomTable() {
  for (const char* n : kBaseAtoms) intern(n);
}

uint32_t AtomTable::intern(std::string_view name) {
  auto it = ids_.find(std::string(name));
  if (it != ids_.end()) return it->second;
  auto id = static_cast<uint32_t>(names_.size());
  names_.emplace_back(name);
  ids_.emplace(names_.back(), id);
  return id;
}

std::optional<uint32_t> AtomTable::find(std::string_view name) const {
  auto it = ids_.find(std::string(name));
  if (it == ids_.end()) return std::nullopt;
  return it->second;
}

uint32_t StringTable::intern(std::string_view text) {
  auto it = ids_.find(std::string(text));
  if (it != ids_.end()) return it->second;
  auto id = static_cast<uint32_t>(texts_.size());
  texts_.emplace_back(text);
  ids_.emplace(texts_.back(), id);
  return id;
}

Template compile_terms(const std::vector<Term>& terms, AtomTable& atoms, StringTable& strings,
                       std::unordered_map<int64_t, uint32_t>* var_index,
                       std::unordered_map<const Term*, size_t>* slots) {
  Template out;
  std::unordered_map<int64_t, uint32_t> local;
  std::unordered_map<int64_t, uint32_t>& vars = var_index != nullptr ? *var_index : local;
  out.roots = static_cast<uint32_t>(terms.size());
  out.cells.resize(terms.size());
  std::vector<std::pair<const Term*, size_t>> work;
  for (size_t i = terms.size(); i-- > 0;) work.emplace_back(&terms[i], i);
  while (!work.empty()) {
    auto [t, slot] = work.back();
    work.pop_back();
    if (slots != nullptr) (*slots)[t] = slot;
    Cell c;
    switch (t->kind()) {
      case Term::Kind::kVar: {
        auto [it, fresh] = vars.try_emplace(t->var_id(), static_cast<uint32_t>(vars.size()));
        c = Cell::Ref(it->second);
        break;
      }
      case Term::Kind::kAtom: c = Cell::Atom(atoms.intern(t->name())); break;
      case Term::Kind::kInt: c = Cell::Int(t->int_value()); break;
      case Term::Kind::kFloat: c = Cell::Flt(t->float_value()); break;
      case Term::Kind::kString: c = Cell::Str(strings.intern(t->name())); break;
      case Term::Kind::kCompound: {
        size_t block = out.cells.size();
        out.cells.push_back(Cell::Functor(atoms.intern(t->name()),
                                          static_cast<uint32_t>(t->arity())));
        out.cells.resize(block + 1 + t->arity());
        for (size_t i = t->arity(); i-- > 0;) work.emplace_back(&t->arg(i), block + 1 + i);
        c = Cell::Struct(block);
        break;
      }
    }
    out.cells[slot] = c;
  }
  out.nvars = static_cast<uint32_t>(vars.size());
  return out;
}

}  // namespace plweb::detail
