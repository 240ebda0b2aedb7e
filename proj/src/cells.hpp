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

#ifndef PLWEB_CELLS_HPP
#define PLWEB_CELLS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "plweb/term.hpp"

namespace plweb::detail {

enum class Tag : uint8_t { kRef, kAtom, kInt, kFlt, kStr, kStruct, kFunctor };

/// One heap word. A Ref pointing at itself is an unbound variable; a Struct
/// points at a Functor cell followed by the argument cells.
struct Cell {
  Tag tag = Tag::kRef;
  uint32_t arity = 0;
  union {
    uint64_t u;
    int64_t i;
    double f;
  };

  Cell() : u(0) {}
  static Cell Ref(uint64_t addr) {
    Cell c;
    c.tag = Tag::kRef;
    c.u = addr;
    return c;
  }
  static Cell Atom(uint32_t id) {
    Cell c;
    c.tag = Tag::kAtom;
    c.u = id;
    return c;
  }
  static Cell Int(int64_t v) {
    Cell c;
    c.tag = Tag::kInt;
    c.i = v;
    return c;
  }
  static Cell Flt(double v) {
    Cell c;
    c.tag = Tag::kFlt;
    c.f = v;
    return c;
  }
  static Cell Str(uint32_t id) {
    Cell c;
    c.tag = Tag::kStr;
    c.u = id;
    return c;
  }
  static Cell Struct(uint64_t addr) {
    Cell c;
    c.tag = Tag::kStruct;
    c.u = addr;
    return c;
  }
  static Cell Functor(uint32_t name, uint32_t arity) {
    Cell c;
    c.tag = Tag::kFunctor;
    c.u = name;
    c.arity = arity;
    return c;
  }
};
static_assert(sizeof(Cell) == 16);

/// Name/arity packed into one key.
constexpr uint64_t functor_key(uint32_t name, uint32_t arity) {
  return (static_cast<uint64_t>(name) << 32) | arity;
}
inline uint32_t key_name(uint64_t key) { return static_cast<uint32_t>(key >> 32); }
inline uint32_t key_arity(uint64_t key) { return static_cast<uint32_t>(key); }

/// Atoms with fixed ids, present in every table.
namespace atom {
enum : uint32_t {
  kNil,
  kDot,
  kComma,
  kTrue,
  kFail,
  kFalse,
  kCut,
  kSemicolon,
  kArrow,
  kNot,
  kCall,
  kNeck,
  kColon,
  kSlash,
  kMinus,
  kPlus,
  kEmpty,
  kError,
  kEllipsis,
  kEq,
  kCount,
  kBag,
  kSet,
  kAsc,
  kDesc,
  kCurly,
  kBar,
  kSoftArrow,
  kFindall,
  kForall,
  kAggregateAll,
  kLimit,
  kDistinct,
  kOrderBy,
  kTime,
  kCallCleanup,
  kSolutionMember,
  kEof,
  kNumBase
};
}  // namespace atom

class AtomTable {
 public:
  AtomTable();
  uint32_t intern(std::string_view name);
  /// The id of an existing atom.
  [[nodiscard]] std::optional<uint32_t> find(std::string_view name) const;
  [[nodiscard]] const std::string& name(uint32_t id) const { return names_[id]; }
  [[nodiscard]] size_t size() const { return names_.size(); }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, uint32_t> ids_;
};

/// A term compiled to relocatable cells. The first `roots` cells after the
/// variables are the root slots; Ref cells hold variable indices and Struct
/// cells hold offsets into `cells`.
struct Template {
  std::vector<Cell> cells;
  uint32_t nvars = 0;
  uint32_t roots = 0;
};

/// Interned strings used by Str cells.
class StringTable {
 public:
  uint32_t intern(std::string_view text);
  [[nodiscard]] const std::string& text(uint32_t id) const { return texts_[id]; }

 private:
  std::vector<std::string> texts_;
  std::unordered_map<std::string, uint32_t> ids_;
};

/// Compiles tree terms into a template with one root per term. Variables are
/// shared between the roots by id; var_index receives the variable index of
/// every variable id and slots the cell index of every subterm.
Template compile_terms(const std::vector<Term>& terms, AtomTable& atoms, StringTable& strings,
                       std::unordered_map<int64_t, uint32_t>* var_index = nullptr,
                       std::unordered_map<const Term*, size_t>* slots = nullptr);

}  // namespace plweb::detail

#endif  // PLWEB_CELLS_HPP
