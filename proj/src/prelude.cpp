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

#include <stdexcept>

#include "database.hpp"
#include "machine.hpp"

namespace plweb::detail {

namespace {

constexpr const char* kPrelude = R"PL(
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).

member(X, [Y|Ys]) :- '$member'(Ys, X, Y).
'$member'(_, X, X).
'$member'([Y|Ys], X, _) :- '$member'(Ys, X, Y).

reverse(Xs, Ys) :- '$reverse'(Xs, [], Ys).
'$reverse'([], Ys, Ys).
'$reverse'([X|Xs], Acc, Ys) :- '$reverse'(Xs, [X|Acc], Ys).

nth0(I, L, E) :- integer(I), !, I >= 0, '$nth_det'(I, L, E).
nth0(I, L, E) :- var(I), '$nth_gen'(L, E, 0, I).
nth1(I, L, E) :- integer(I), !, I >= 1, I0 is I-1, '$nth_det'(I0, L, E).
nth1(I, L, E) :- var(I), '$nth_gen'(L, E, 1, I).
'$nth_det'(0, [E|_], E) :- !.
'$nth_det'(I, [_|T], E) :- I1 is I-1, '$nth_det'(I1, T, E).
'$nth_gen'([E|_], E, B, B).
'$nth_gen'([_|T], E, B0, B) :- B1 is B0+1, '$nth_gen'(T, E, B1, B).

last([X|Xs], Last) :- '$last'(Xs, X, Last).
'$last'([], Last, Last).
'$last'([X|Xs], _, Last) :- '$last'(Xs, X, Last).

maplist(_, []).
maplist(G, [X|Xs]) :- call(G, X), maplist(G, Xs).
maplist(_, [], []).
maplist(G, [X|Xs], [Y|Ys]) :- call(G, X, Y), maplist(G, Xs, Ys).
maplist(_, [], [], []).
maplist(G, [X|Xs], [Y|Ys], [Z|Zs]) :- call(G, X, Y, Z), maplist(G, Xs, Ys, Zs).

select(X, [X|T], T).
select(X, [H|T], [H|R]) :- select(X, T, R).

permutation([], []).
permutation(L, [H|T]) :- select(H, L, R), permutation(R, T).
)PL";

Database build_base() {
  Database db;
  for (const std::string& name : reserved_atoms()) db.atoms.intern(name);
  ProgramParse parsed = parse_program(kPrelude, db.ops);
  if (!parsed.errors.empty()) throw std::logic_error(parsed.errors.front().what());
  for (const ParsedTerm& pt : parsed.terms) {
    const Term& t = pt.term;
    bool rule = t.is_compound(":-", 2);
    const Term& head = rule ? t.arg(0) : t;
    Term body = rule ? t.arg(1) : Term::Atom("true");
    uint64_t key = db.key_of(head.name(), head.arity());
    db.preds[key].origin = Origin::kLibrary;
    db.add_clause(key, db.make_clause(head, body, 0), true);
  }
  return db;
}

}  // namespace

const Database& base_database() {
  static const Database db = build_base();
  return db;
}

}  // namespace plweb::detail
