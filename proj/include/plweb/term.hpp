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

#ifndef PLWEB_TERM_HPP
#define PLWEB_TERM_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plweb {

/// Immutable tree representation of a term. Copies share structure.
///
/// This is the exchange format between the reader, the resolution engine,
/// the sandbox, the renderers and the wire. The engine keeps its own
/// cell-based heap internally and converts at the boundaries.
class Term {
 public:
  enum class Kind : uint8_t { kVar, kAtom, kInt, kFloat, kString, kCompound };

  /// The empty atom ''.
  Term();

  static Term Var(int64_t id, std::string name = {});
  static Term Atom(std::string name);
  static Term Int(int64_t value);
  static Term Float(double value);
  static Term String(std::string text);
  /// A compound with no arguments collapses to an atom.
  static Term Compound(std::string functor, std::vector<Term> args);
  static Term List(std::vector<Term> items, Term tail = Nil());
  static Term Nil() { return Atom("[]"); }

  [[nodiscard]] Kind kind() const;
  [[nodiscard]] bool is_var() const { return kind() == Kind::kVar; }
  [[nodiscard]] bool is_atom() const { return kind() == Kind::kAtom; }
  [[nodiscard]] bool is_int() const { return kind() == Kind::kInt; }
  [[nodiscard]] bool is_float() const { return kind() == Kind::kFloat; }
  [[nodiscard]] bool is_number() const { return is_int() || is_float(); }
  [[nodiscard]] bool is_string() const { return kind() == Kind::kString; }
  [[nodiscard]] bool is_compound() const { return kind() == Kind::kCompound; }
  [[nodiscard]] bool is_callable() const { return is_atom() || is_compound(); }
  [[nodiscard]] bool is_atomic() const { return !is_var() && !is_compound(); }

  [[nodiscard]] bool is_atom(std::string_view name) const;
  [[nodiscard]] bool is_compound(std::string_view functor, size_t arity) const;
  [[nodiscard]] bool is_nil() const { return is_atom("[]"); }
  [[nodiscard]] bool is_list_cell() const { return is_compound(".", 2); }

  /// Atom text, functor name, string text or variable name.
  [[nodiscard]] const std::string& name() const;
  [[nodiscard]] int64_t int_value() const;
  [[nodiscard]] double float_value() const;
  [[nodiscard]] int64_t var_id() const;
  [[nodiscard]] size_t arity() const;
  [[nodiscard]] const Term& arg(size_t i) const;
  [[nodiscard]] std::span<const Term> args() const;

  /// Elements of a proper list, or nullopt for partial or improper lists.
  [[nodiscard]] std::optional<std::vector<Term>> list_items() const;

  /// Structural identity; variables are equal when their ids match.
  friend bool operator==(const Term& a, const Term& b);

 private:
  struct Node;
  explicit Term(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

/// Standard order of terms: Var < Number < Atom < String < Compound.
/// Compounds order by arity, then name, then arguments left to right.
/// An integer and a float that compare equal order the float first.
int compare_terms(const Term& a, const Term& b);

/// True when a and b are equal up to a consistent renaming of variables.
bool is_variant(const Term& a, const Term& b);

/// Variables of t in depth-first, left-to-right first-occurrence order.
std::vector<Term> term_variables(const Term& t);

/// Name/arity of a callable term.
struct Indicator {
  std::string name;
  size_t arity = 0;
  friend auto operator<=>(const Indicator&, const Indicator&) = default;
  [[nodiscard]] std::string str() const;
};

std::optional<Indicator> indicator_of(const Term& t);

/// Splits a ','/2 chain into its conjuncts.
std::vector<Term> conjuncts(const Term& t);

}  // namespace plweb

#endif  // PLWEB_TERM_HPP
