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

#ifndef PLWEB_DATABASE_HPP
#define PLWEB_DATABASE_HPP

#include <array>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "cells.hpp"
#include "plweb/operators.hpp"
#include "plweb/reader.hpp"
#include "plweb/workspace.hpp"

namespace plweb::detail {

struct Clause {
  /// Roots: head, body.
  Template tmpl;
  /// Source line per template cell for goal slots, 0 elsewhere. Empty when
  /// the clause has no source.
  std::vector<uint32_t> goal_lines;
  Term head;
  Term body;
  size_t line = 0;
  /// Index keys of the first arguments, used to skip clauses whose head
  /// cannot match. A Ref tag means the argument is a variable.
  static constexpr size_t kIndexedArgs = 3;
  std::array<Cell, kIndexedArgs> keys{};
};

using ClausePtr = std::shared_ptr<const Clause>;
using ClauseList = std::vector<ClausePtr>;

struct Predicate {
  std::shared_ptr<const ClauseList> clauses = std::make_shared<const ClauseList>();
  bool dynamic = false;
  Origin origin = Origin::kLocal;
};

struct Database {
  AtomTable atoms;
  StringTable strings;
  std::unordered_map<uint64_t, Predicate> preds;
  OperatorTable ops = OperatorTable::Default();
  std::vector<std::string> renderers;

  uint64_t key_of(const std::string& name, size_t arity) {
    return functor_key(atoms.intern(name), static_cast<uint32_t>(arity));
  }
  /// Lookup without interning; nullptr when the name was never seen.
  [[nodiscard]] const Predicate* find(const std::string& name, size_t arity) const {
    auto id = atoms.find(name);
    if (!id) return nullptr;
    return find(functor_key(*id, static_cast<uint32_t>(arity)));
  }
  Predicate* find(uint64_t key) {
    auto it = preds.find(key);
    return it == preds.end() ? nullptr : &it->second;
  }
  const Predicate* find(uint64_t key) const {
    auto it = preds.find(key);
    return it == preds.end() ? nullptr : &it->second;
  }

  /// Builds a clause. Variable goals in the body are wrapped in call/1.
  /// layout, when given, provides goal lines for the debugger.
  ClausePtr make_clause(const Term& head, const Term& body, size_t line,
                        const TermLayout* body_layout = nullptr);

  void add_clause(uint64_t key, ClausePtr clause, bool at_end);
};

/// The body with variable goals in control positions wrapped in call/1.
Term normalize_body(const Term& body);

/// The database with the library predicates, shared by new workspaces.
const Database& base_database();

}  // namespace plweb::detail

#endif  // PLWEB_DATABASE_HPP
