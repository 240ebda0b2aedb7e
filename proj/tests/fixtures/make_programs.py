"""Writes the highlight corpus: 50 small programs built from fixed snippets."""
import os
import random
import sys

SNIPPETS = [
    "len([], 0).\nlen([_|T], N) :- len(T, N0), N is N0+1.\n",
    "app([], L, L).\napp([H|T], L, [H|R]) :- app(T, L, R).\n",
    ":- dynamic counter/1.\ncounter(0).\nbump :- retract(counter(N)), N1 is N+1, assertz(counter(N1)).\n",
    "fact(0, 1) :- !.\nfact(N, F) :- N > 0, N1 is N-1, fact(N1, F1), F is N*F1.\n",
    "% Classic family database.\nparent(tom, bob).\nparent(bob, ann).\ngrand(X, Z) :- parent(X, Y), parent(Y, Z).\n",
    "/** <examples>\n?- sum_list([1,2,3], S).\n?- atom_length('a.b', N).\n*/\nsum_list(L, S) :- sum_(L, 0, S).\nsum_([], S, S).\nsum_([X|Xs], A, S) :- A1 is A+X, sum_(Xs, A1, S).\n",
    ":- op(700, xfx, ===>).\nrule(a ===> b).\nrule(b ===> c).\n",
    "greeting(\"hello world\").\nshout :- greeting(G), writeln(G).\n",
    "quoted('it''s').\nquoted('a.b.c').\nquoted('\\n').\n",
    "max_of(X, Y, X) :- X >= Y, !.\nmax_of(_, Y, Y).\n",
    "/* block comment\n   spanning lines */\nedge(a, b).\nedge(b, c).\npath(X, Y) :- edge(X, Y).\npath(X, Y) :- edge(X, Z), path(Z, Y).\n",
    "classify(N, neg) :- N < 0.\nclassify(0, zero).\nclassify(N, pos) :- N > 0.\n",
    "swap(X-Y, Y-X).\npairs(L, Ps) :- findall(A-B, member(A-B, L), Ps).\n",
    "count_to(N) :- between(1, N, X), write(X), nl, fail.\ncount_to(_).\n",
    "safe_div(X, Y, Z) :- ( Y =:= 0 -> Z = inf ; Z is X / Y ).\n",
    "not_member(X, L) :- \\+ member(X, L).\n",
    ":- use_rendering(chess).\nboard([1,5,8,6,3,7,2,4]).\n",
    "pretty(T) :- format(\"~w~n\", [T]).\n",
    "flatten2([], []) :- !.\nflatten2([H|T], F) :- !, flatten2(H, FH), flatten2(T, FT), append(FH, FT, F).\nflatten2(X, [X]).\n",
    "char_test(C) :- C == 0'a.\nfloats(X) :- X is 3.14 * 2.0e1.\n",
    "uses_undefined :- missing_pred(1), other_missing.\n",
    "twice(G) :- call(G), call(G).\nhello :- writeln(hi).\n",
    "op_user(X) :- X = (a :- b, c ; d).\n",
    "codes(X) :- atom_codes(abc, X).\nchars(X) :- atom_chars(abc, X).\n",
    ":- discontiguous color/1.\ncolor(red).\nshape(circle).\ncolor(blue).\n",
    "neg(X, Y) :- Y is -X.\nminus(X, Y, Z) :- Z is X - Y.\n",
    "ite(X) :- ( X > 0 -> writeln(pos) ; X < 0 -> writeln(neg) ; writeln(zero) ).\n",
    "lst([a, 'B', \"c\", 1.5, -2, f(x)]).\n",
]

BROKEN = [
    "broken(:- x.\n",
    "bad(X :- .\n",
    "oops([1,2.\n",
]

COMMENTS = ["% helper predicates\n", "%% section\n", "/* note */\n"]


def build(rng, index):
    parts = rng.sample(SNIPPETS, rng.randint(2, 6))
    if index % 10 == 7:
        parts.insert(rng.randrange(len(parts)), rng.choice(BROKEN))
    out = []
    for p in parts:
        if rng.random() < 0.3:
            out.append(rng.choice(COMMENTS))
        out.append(p)
        out.append("\n" if rng.random() < 0.7 else "")
    return "".join(out)


def main(directory, seed=20150501):
    rng = random.Random(seed)
    os.makedirs(directory, exist_ok=True)
    for i in range(50):
        with open(os.path.join(directory, f"p{i + 1:02d}.pl"), "w") as f:
            f.write(build(rng, i))


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "programs")
