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

#include "plweb/highlight.hpp"

namespace plweb {

namespace {

struct Row {
  const char* name;
  size_t arity;
  const char* templ;
  const char* summary;
};

constexpr Row kBuiltins[] = {
    {"true", 0, "true", "Always succeeds."},
    {"fail", 0, "fail", "Always fails."},
    {"false", 0, "false", "Always fails."},
    {"!", 0, "!", "Cut: discard the choice points of the clause and the goals before it."},
    {",", 2, "(:Goal1, :Goal2)", "Conjunction: call Goal1, then Goal2."},
    {";", 2, "(:Goal1; :Goal2)", "Disjunction: call Goal1, on backtracking Goal2."},
    {"->", 2, "(:Condition -> :Action)", "If-then: commit to the first solution of Condition."},
    {"\\+", 1, "\\+ :Goal", "True if Goal cannot be proven."},
    {"call", 1, "call(:Goal)", "Call Goal; cut inside Goal is local."},
    {"call", 2, "call(:Goal, ?A1)", "Call Goal with one extra argument."},
    {"call", 3, "call(:Goal, ?A1, ?A2)", "Call Goal with two extra arguments."},
    {"call", 4, "call(:Goal, ?A1, ?A2, ?A3)", "Call Goal with three extra arguments."},
    {"call", 5, "call(:Goal, ?A1, ?A2, ?A3, ?A4)", "Call Goal with four extra arguments."},
    {"call", 6, "call(:Goal, ?A1, ?A2, ?A3, ?A4, ?A5)", "Call Goal with five extra arguments."},
    {"call", 7, "call(:Goal, ?A1, ?A2, ?A3, ?A4, ?A5, ?A6)", "Call Goal with six extra arguments."},
    {"call", 8, "call(:Goal, ?A1, ?A2, ?A3, ?A4, ?A5, ?A6, ?A7)",
     "Call Goal with seven extra arguments."},
    {"findall", 3, "findall(+Template, :Goal, -Bag)",
     "Bag is the list of Template instances for each solution of Goal."},
    {"forall", 2, "forall(:Cond, :Action)", "True if Action succeeds for every solution of Cond."},
    {"aggregate_all", 3, "aggregate_all(+Spec, :Goal, -Result)",
     "Aggregate the solutions of Goal with count, bag(X) or set(X)."},
    {"limit", 2, "limit(+Count, :Goal)", "Return at most Count solutions of Goal."},
    {"distinct", 1, "distinct(:Goal)", "Return only distinct solutions of Goal."},
    {"distinct", 2, "distinct(?Witness, :Goal)", "Return solutions of Goal with distinct Witness."},
    {"order_by", 2, "order_by(+Spec, :Goal)",
     "Return the solutions of Goal sorted by a list of asc(X) and desc(X) keys."},
    {"time", 1, "time(:Goal)", "Call Goal and print the wall time and inference count."},
    {"=", 2, "?Term1 = ?Term2", "Unify Term1 with Term2."},
    {"\\=", 2, "?Term1 \\= ?Term2", "True if Term1 and Term2 do not unify."},
    {"==", 2, "@Term1 == @Term2", "True if the terms are identical."},
    {"\\==", 2, "@Term1 \\== @Term2", "True if the terms are not identical."},
    {"@<", 2, "@Term1 @< @Term2", "Term1 precedes Term2 in the standard order."},
    {"@>", 2, "@Term1 @> @Term2", "Term1 follows Term2 in the standard order."},
    {"@=<", 2, "@Term1 @=< @Term2", "Term1 does not follow Term2 in the standard order."},
    {"@>=", 2, "@Term1 @>= @Term2", "Term1 does not precede Term2 in the standard order."},
    {"compare", 3, "compare(?Order, @Term1, @Term2)",
     "Order is <, = or > by the standard order of terms."},
    {"var", 1, "var(@Term)", "True if Term is an unbound variable."},
    {"nonvar", 1, "nonvar(@Term)", "True if Term is not an unbound variable."},
    {"atom", 1, "atom(@Term)", "True if Term is an atom."},
    {"number", 1, "number(@Term)", "True if Term is an integer or a float."},
    {"integer", 1, "integer(@Term)", "True if Term is an integer."},
    {"float", 1, "float(@Term)", "True if Term is a float."},
    {"string", 1, "string(@Term)", "True if Term is a string."},
    {"atomic", 1, "atomic(@Term)", "True if Term is an atom, number or string."},
    {"compound", 1, "compound(@Term)", "True if Term is a compound term."},
    {"callable", 1, "callable(@Term)", "True if Term is an atom or a compound term."},
    {"is_list", 1, "is_list(@Term)", "True if Term is a proper list."},
    {"is", 2, "-Number is +Expr", "Evaluate the arithmetic expression Expr and unify with Number."},
    {"<", 2, "+Expr1 < +Expr2", "Arithmetic less than."},
    {">", 2, "+Expr1 > +Expr2", "Arithmetic greater than."},
    {"=<", 2, "+Expr1 =< +Expr2", "Arithmetic less than or equal."},
    {">=", 2, "+Expr1 >= +Expr2", "Arithmetic greater than or equal."},
    {"=:=", 2, "+Expr1 =:= +Expr2", "Arithmetic equality."},
    {"=\\=", 2, "+Expr1 =\\= +Expr2", "Arithmetic inequality."},
    {"functor", 3, "functor(?Term, ?Name, ?Arity)", "Term has the given name and arity."},
    {"arg", 3, "arg(?N, +Term, ?Arg)", "Arg is the N-th argument of Term."},
    {"=..", 2, "?Term =.. ?List", "List is [Functor|Args] of Term."},
    {"copy_term", 2, "copy_term(+In, -Out)", "Out is a copy of In with fresh variables."},
    {"between", 3, "between(+Low, +High, ?Value)", "Low =< Value =< High, enumerating Value."},
    {"length", 2, "length(?List, ?Length)", "Length is the number of elements of List."},
    {"succ", 2, "succ(?Int1, ?Int2)", "Int2 is Int1 + 1 for non-negative integers."},
    {"plus", 3, "plus(?Int1, ?Int2, ?Int3)", "Int3 is Int1 + Int2; any one may be unbound."},
    {"atom_length", 2, "atom_length(+Atom, -Length)", "Length is the number of characters of Atom."},
    {"atom_codes", 2, "atom_codes(?Atom, ?Codes)", "Convert between an atom and its character codes."},
    {"atom_chars", 2, "atom_chars(?Atom, ?Chars)", "Convert between an atom and its characters."},
    {"number_codes", 2, "number_codes(?Number, ?Codes)",
     "Convert between a number and its character codes."},
    {"sort", 2, "sort(+List, -Sorted)", "Sort by the standard order, removing duplicates."},
    {"msort", 2, "msort(+List, -Sorted)", "Sort by the standard order, keeping duplicates."},
    {"keysort", 2, "keysort(+Pairs, -Sorted)", "Stable sort of Key-Value pairs by key."},
    {"assert", 1, "assert(+Clause)", "Add Clause at the end of its dynamic predicate."},
    {"asserta", 1, "asserta(+Clause)", "Add Clause at the start of its dynamic predicate."},
    {"assertz", 1, "assertz(+Clause)", "Add Clause at the end of its dynamic predicate."},
    {"retract", 1, "retract(+Clause)", "Remove the first clause that unifies with Clause."},
    {"write", 1, "write(+Term)", "Write Term to the output."},
    {"writeln", 1, "writeln(+Term)", "Write Term followed by a newline."},
    {"print", 1, "print(+Term)", "Print Term using quoted output."},
    {"writeq", 1, "writeq(+Term)", "Write Term quoted so it can be read back."},
    {"nl", 0, "nl", "Write a newline."},
    {"format", 1, "format(+Format)", "Write Format, interpreting ~ directives."},
    {"format", 2, "format(+Format, :Arguments)", "Write Arguments as directed by Format."},
    {"read", 1, "read(-Term)", "Read a term from the input; end_of_file at the end."},
};

constexpr Row kLibrary[] = {
    {"append", 3, "append(?List1, ?List2, ?List1AndList2)",
     "List1AndList2 is the concatenation of List1 and List2."},
    {"member", 2, "member(?Elem, ?List)", "Elem is a member of List."},
    {"reverse", 2, "reverse(?List1, ?List2)", "List2 has the elements of List1 in reverse order."},
    {"nth0", 3, "nth0(?Index, ?List, ?Elem)", "Elem is the Index-th element of List, from 0."},
    {"nth1", 3, "nth1(?Index, ?List, ?Elem)", "Elem is the Index-th element of List, from 1."},
    {"last", 2, "last(?List, ?Last)", "Last is the last element of List."},
    {"maplist", 2, "maplist(:Goal, ?List)", "Goal succeeds for every element of List."},
    {"maplist", 3, "maplist(:Goal, ?List1, ?List2)",
     "Goal succeeds for the pairwise elements of the lists."},
    {"maplist", 4, "maplist(:Goal, ?List1, ?List2, ?List3)",
     "Goal succeeds for the elements of the three lists."},
    {"select", 3, "select(?Elem, ?List1, ?List2)", "List2 is List1 with one Elem removed."},
    {"permutation", 2, "permutation(?Xs, ?Ys)", "Ys is a permutation of Xs."},
};

}  // namespace

const std::vector<PredicateDoc>& doc_table() {
  static const std::vector<PredicateDoc> table = [] {
    std::vector<PredicateDoc> out;
    for (const Row& r : kBuiltins) out.push_back({r.name, r.arity, r.templ, r.summary, Origin::kBuiltin});
    for (const Row& r : kLibrary) out.push_back({r.name, r.arity, r.templ, r.summary, Origin::kLibrary});
    std::sort(out.begin(), out.end(), [](const PredicateDoc& a, const PredicateDoc& b) {
      return a.name != b.name ? a.name < b.name : a.arity < b.arity;
    });
    return out;
  }();
  return table;
}

const PredicateDoc* find_doc(std::string_view name, size_t arity) {
  for (const PredicateDoc& d : doc_table()) {
    if (d.name == name && d.arity == arity) return &d;
  }
  return nullptr;
}

std::vector<std::string> templates(std::string_view prefix) {
  std::vector<std::string> out;
  for (const PredicateDoc& d : doc_table()) {
    if (d.name.starts_with(prefix)) out.push_back(d.templ);
  }
  return out;
}

}  // namespace plweb
