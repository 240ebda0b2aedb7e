#ifndef PLWEB_TESTS_SANDBOX_CORPUS_HPP
#define PLWEB_TESTS_SANDBOX_CORPUS_HPP

#include <vector>

namespace corpus {

// Loaded before every case.
inline const char* kProgram = R"(
:- dynamic counter/1.
:- dynamic fact/1.
counter(0).
incr :- retract(counter(N)), N1 is N+1, assert(counter(N1)).
len([], 0).
len([_|T], N) :- len(T, N0), N is N0+1.
apply_to(G, X) :- call(G, X).
run(G) :- G.
twice(G) :- call(G), call(G).
bad_write :- shell('rm -rf /').
loop :- loop.
even(0).
even(N) :- N > 0, M is N-1, odd(M).
odd(N) :- N > 0, M is N-1, even(M).
left(X) :- left(X), true.
evil(X) :- X = f(Y), call(Y).
grow(X) :- grow(f(X)).
sneaky :- G = shell(ls), call(G).
via_list(L) :- maplist(run, L).
store(X) :- assert(fact(X)).
double(X, Y) :- Y is 2*X.
)";

struct Case {
  const char* query;
  // "safe", "instantiation", "permission" or "cross_module".
  const char* expected;
};

inline const std::vector<Case> kUnsafe = {
    {"read(X), call(X)", "instantiation"},
    {"assert(m:foo)", "permission"},
    {"shell('ls')", "permission"},
    {"call(X)", "instantiation"},
    {"X", "instantiation"},
    {"findall(Y, G, L)", "instantiation"},
    {"lists:append(X, Y, Z)", "cross_module"},
    {"call(system:shell, ls)", "cross_module"},
    {"maplist(G, [1,2])", "instantiation"},
    {"run(_)", "instantiation"},
    {"run(shell(ls))", "permission"},
    {"apply_to(shell, ls)", "permission"},
    {"bad_write", "permission"},
    {"assert((foo :- shell(ls)))", "permission"},
    {"assert((foo :- X))", "instantiation"},
    {"asserta(m:bar(1))", "permission"},
    {"assertz((m:bar(1) :- true))", "permission"},
    {"open('/etc/passwd', read, S)", "permission"},
    {"open('out.txt', write, S), write(S, x)", "permission"},
    {"tell('out.txt'), write(x), told", "permission"},
    {"\\+ shell(ls)", "permission"},
    {"( true ; halt )", "permission"},
    {"forall(member(X, [a]), call(X))", "instantiation"},
    {"evil(_)", "instantiation"},
    {"retract(m:counter(_))", "permission"},
    {"X = shell(ls), call(X)", "permission"},
    {"sneaky", "permission"},
    {"via_list([true, halt])", "permission"},
    {"current_predicate(P)", "permission"},
    {"current_atom(A)", "permission"},
    {"twice(secret:data(_))", "cross_module"},
    {"( X = 1 -> delete_file('x') ; true )", "permission"},
};

inline const std::vector<Case> kSafe = {
    {"maplist(plus(1), [1,2,3])", "safe"},
    {"append([one], [two,three], List)", "safe"},
    {"X is 1+2", "safe"},
    {"len([a,b,c], N)", "safe"},
    {"findall(X, member(X, [a,b]), L)", "safe"},
    {"incr, counter(N)", "safe"},
    {"assert(fact(1)), retract(fact(1))", "safe"},
    {"store(3)", "safe"},
    {"maplist(double, [1,2,3], L)", "safe"},
    {"apply_to(writeln, hello)", "safe"},
    {"run(true)", "safe"},
    {"run((X = 1 ; X = 2))", "safe"},
    {"twice(nl)", "safe"},
    {"loop", "safe"},
    {"even(4)", "safe"},
    {"left(a)", "safe"},
    {"grow(a)", "safe"},
    {"forall(member(X, [1,2]), X > 0)", "safe"},
    {"aggregate_all(count, member(_, [a,b]), C)", "safe"},
    {"\\+ member(z, [a,b])", "safe"},
    {"( member(X, [1,2]) -> Y = X ; Y = 0 )", "safe"},
    {"call(format, \"~w~n\", [x])", "safe"},
    {"X = writeln(hi), call(X)", "safe"},
    {"via_list([true, nl])", "safe"},
    {"sort([b,a], L), msort(L, M), length(M, N)", "safe"},
    {"read(X), atom(X)", "safe"},
    {"permutation([1,2,3], P)", "safe"},
    {"undefined_predicate(1)", "safe"},
    {"asserta((fact(X) :- X > 1))", "safe"},
    {"limit(2, between(1, 9, X))", "safe"},
};

}  // namespace corpus

#endif  // PLWEB_TESTS_SANDBOX_CORPUS_HPP
