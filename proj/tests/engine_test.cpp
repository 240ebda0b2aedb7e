#include <doctest.h>

#include <atomic>
#include <cctype>
#include <string>
#include <vector>

#include "plweb/engine.hpp"
#include "plweb/reader.hpp"
#include "plweb/workspace.hpp"
#include "plweb/writer.hpp"

using namespace plweb;

namespace {

std::string show(const Solution& s, const Workspace& ws) {
  std::string out;
  for (const auto& [name, value] : s.bindings) {
    if (!out.empty()) out += ", ";
    out += name + " = " + write_answer(value, ws.ops());
  }
  return out.empty() ? "true" : out;
}

std::vector<std::string> answers(Workspace& ws, const std::string& query,
                                 QueryOptions opts = {}) {
  std::vector<std::string> out;
  for (const Solution& s : solve_all(ws, query, std::move(opts))) out.push_back(show(s, ws));
  return out;
}

Workspace load(const std::string& text) {
  Workspace ws;
  auto errors = consult_text(ws, text);
  for (const auto& e : errors) FAIL_CHECK(e.message);
  return ws;
}

std::string error_of(Workspace& ws, const std::string& query, QueryOptions opts = {}) {
  try {
    solve_all(ws, query, std::move(opts));
  } catch (const PrologError& e) {
    return writeq(e.term().arg(0));
  }
  return "none";
}

const char* kQueens = R"(
queens(N, Qs) :- numlist(1, N, Ns), permutation(Ns, Qs), safe(Qs).
numlist(L, H, []) :- L > H, !.
numlist(L, H, [L|T]) :- L1 is L+1, numlist(L1, H, T).
safe([]).
safe([Q|Qs]) :- no_attack(Q, Qs, 1), safe(Qs).
no_attack(_, [], _).
no_attack(Q, [Q1|Qs], D) :- Q =\= Q1 + D, Q =\= Q1 - D, D1 is D+1, no_attack(Q, Qs, D1).
)";

}  // namespace

TEST_CASE("append example enumerates one answer") {
  Workspace ws;
  auto q = read_term_from_string("append([one],[two,three],L)", ws.ops(), true);
  Query query(ws, q.term, q.var_names, {});
  auto s = query.next_solution();
  REQUIRE(s);
  CHECK(show(*s, ws) == "L = [one,two,three]");
  CHECK_FALSE(s->more);
  CHECK_FALSE(query.next_solution());
}

TEST_CASE("arithmetic") {
  Workspace ws;
  CHECK(answers(ws, "X is 1+2") == std::vector<std::string>{"X = 3"});
  CHECK(answers(ws, "X is 7/2") == std::vector<std::string>{"X = 3.5"});
  CHECK(answers(ws, "X is 6/2") == std::vector<std::string>{"X = 3"});
  CHECK(answers(ws, "X is -7 mod 3, Y is -7 rem 3, Z is -7 // 3") ==
        std::vector<std::string>{"X = 2, Y = -1, Z = -2"});
  CHECK(answers(ws, "X is 2**10, Y is 2^0.5") ==
        std::vector<std::string>{"X = 1024, Y = 1.4142135623730951"});
  CHECK(answers(ws, "X is max(3, 4.0), Y is abs(-3), Z is truncate(3.7)") ==
        std::vector<std::string>{"X = 4.0, Y = 3, Z = 3"});
  CHECK(error_of(ws, "X is 1/0") == "evaluation_error(zero_divisor)");
  CHECK(error_of(ws, "X is 9223372036854775807 + 1") == "evaluation_error(int_overflow)");
  CHECK(error_of(ws, "X is foo+1") == "type_error(evaluable,foo/0)");
  CHECK(error_of(ws, "X is Y+1") == "instantiation_error");
  CHECK(answers(ws, "1 < 2, 2.0 =:= 2, 3 =\\= 4") == std::vector<std::string>{"true"});
}

TEST_CASE("answer chunks report more exactly") {
  Workspace ws;
  auto q = read_term_from_string("between(1,3,X)", ws.ops(), true);
  Query query(ws, q.term, q.var_names, {});
  auto c1 = query.next(2);
  REQUIRE(c1.solutions.size() == 2);
  CHECK(show(c1.solutions[0], ws) == "X = 1");
  CHECK(show(c1.solutions[1], ws) == "X = 2");
  CHECK(c1.more);
  auto c2 = query.next(2);
  REQUIRE(c2.solutions.size() == 1);
  CHECK(show(c2.solutions[0], ws) == "X = 3");
  CHECK_FALSE(c2.more);

  auto f = read_term_from_string("fail", ws.ops(), true);
  Query failing(ws, f.term, f.var_names, {});
  auto c3 = failing.next(1);
  CHECK(c3.solutions.empty());
  CHECK_FALSE(c3.more);
}

TEST_CASE("control constructs") {
  Workspace ws = load(R"(
t(X) :- member(X, [1,2,3]), X >= 2, !.
u(X) :- ( X > 0 -> Y = pos ; X < 0 -> Y = neg ; Y = zero ), write(Y).
v(X) :- \+ member(X, [a,b]).
w(a). w(b). w(c).
c(X) :- w(X), X \== a, !.
c(none).
)");
  CHECK(answers(ws, "t(X)") == std::vector<std::string>{"X = 2"});
  CHECK(answers(ws, "v(c)") == std::vector<std::string>{"true"});
  CHECK(answers(ws, "v(a)").empty());
  CHECK(answers(ws, "c(X)") == std::vector<std::string>{"X = b"});
  CHECK(answers(ws, "(X = 1 ; X = 2)") == std::vector<std::string>{"X = 1", "X = 2"});
  CHECK(answers(ws, "member(X, [1,2,3]), (X > 1 -> true ; fail)") ==
        std::vector<std::string>{"X = 2", "X = 3"});
  CHECK(answers(ws, "G = (X = 1, !), call(G) ; X = 2") ==
        std::vector<std::string>{"G = (1=1,!), X = 1", "X = 2"});
  CHECK(answers(ws, "call(member, X, [a,b])") == std::vector<std::string>{"X = a", "X = b"});
  CHECK(answers(ws, "forall(member(X, [1,2]), X > 0)") == std::vector<std::string>{"true"});
  CHECK(answers(ws, "forall(member(X, [1,-2]), X > 0)").empty());
  BufferIo io;
  QueryOptions opts;
  opts.io = &io;
  CHECK(answers(ws, "u(5), u(-1), u(0)", opts) == std::vector<std::string>{"true"});
  CHECK(io.output() == "posnegzero");
}

TEST_CASE("errors") {
  Workspace ws;
  CHECK(error_of(ws, "foo(1)") == "existence_error(procedure,foo/1)");
  CHECK(error_of(ws, "call(1)") == "type_error(callable,1)");
  CHECK(error_of(ws, "call(_)") == "instantiation_error");
  CHECK(error_of(ws, "atom_length(f(x), L)") == "type_error(atom,f(x))");
  CHECK(error_of(ws, "atom_length(abc, foo)") == "type_error(integer,foo)");
  CHECK(error_of(ws, "assertz(append(a,b,c))") ==
        "permission_error(modify,static_procedure,append/3)");
  CHECK(error_of(ws, "assertz(foo:bar)") ==
        "permission_error(modify,static_procedure,foo:bar)");
  CHECK(error_of(ws, "assertz(atom(x))") == "permission_error(modify,static_procedure,atom/1)");
}

TEST_CASE("builtins") {
  Workspace ws;
  auto one = [&](const std::string& q) {
    auto a = answers(ws, q);
    return a.size() == 1 ? a[0] : "<" + std::to_string(a.size()) + " answers>";
  };
  CHECK(one("findall(X-Y, member(X-Y, [1-a, 2-b]), L)") == "L = [1-a,2-b]");
  CHECK(one("findall(X, fail, L)") == "L = []");
  CHECK(one("aggregate_all(count, member(_, [a,b,c]), N)") == "N = 3");
  CHECK(one("aggregate_all(bag(X), member(X, [c,a,c]), L)") == "L = [c,a,c]");
  CHECK(one("aggregate_all(set(X), member(X, [c,a,c]), L)") == "L = [a,c]");
  CHECK(one("sort([c,a,b,a], L)") == "L = [a,b,c]");
  CHECK(one("msort([c,a,b,a], L)") == "L = [a,a,b,c]");
  CHECK(one("keysort([b-1, a-2, b-0], L)") == "L = [a-2,b-1,b-0]");
  CHECK(one("sort([f(x), 1, a, \"s\", 2.0, Z], L)") == "L = [Z,1,2.0,a,\"s\",f(x)]");
  CHECK(one("length([a,b], N)") == "N = 2");
  CHECK(one("length(L, 2)") == "L = [_A,_B]");
  CHECK(answers(ws, "length(L, N), N >= 2, !") == std::vector<std::string>{"L = [_A,_B], N = 2"});
  CHECK(one("functor(f(a,b), N, A)") == "N = f, A = 2");
  CHECK(one("functor(T, g, 2)") == "T = g(_A,_B)");
  CHECK(one("arg(2, f(a,b), X)") == "X = b");
  CHECK(answers(ws, "arg(N, f(a,b), X)") == std::vector<std::string>{"N = 1, X = a", "N = 2, X = b"});
  CHECK(one("f(a,b) =.. L") == "L = [f,a,b]");
  CHECK(one("T =.. [g, 1]") == "T = g(1)");
  CHECK(one("copy_term(f(X, X, Y), C)") == "C = f(_A,_A,_B)");
  CHECK(one("atom_codes(abc, L)") == "L = [97,98,99]");
  CHECK(one("atom_codes(A, [104, 105])") == "A = hi");
  CHECK(one("atom_chars(abc, L)") == "L = [a,b,c]");
  CHECK(one("atom_length('h\xc3\xa9llo', N)") == "N = 5");
  CHECK(one("number_codes(N, \" 42\")") == "N = 42");
  CHECK(one("number_codes(3.5, L), atom_codes(A, L)") == "L = [51,46,53], A = '3.5'");
  CHECK(one("succ(X, 4), succ(4, Y)") == "X = 3, Y = 5");
  CHECK(one("plus(2, Y, 5)") == "Y = 3");
  CHECK(one("compare(O, 1, a)") == "O = (<)");
  CHECK(one("f(X) \\= f(a)").find("answers") != std::string::npos);
  CHECK(one("f(X) \\= g(a)") == "true");
  CHECK(one("nth0(1, [a,b,c], E), nth1(1, [a,b,c], F)") == "E = b, F = a");
  CHECK(answers(ws, "nth1(I, [a,b], E)") == std::vector<std::string>{"I = 1, E = a", "I = 2, E = b"});
  CHECK(one("last([1,2,3], X)") == "X = 3");
  CHECK(one("reverse([1,2,3], X)") == "X = [3,2,1]");
  CHECK(one("maplist(succ, [1,2], L)") == "L = [2,3]");
  CHECK(answers(ws, "select(X, [a,b], R)") == std::vector<std::string>{"X = a, R = [b]", "X = b, R = [a]"});
  CHECK(answers(ws, "permutation([1,2,3], P)").size() == 6);
  CHECK(answers(ws, "X = f(X), Y = 1").size() == 1);
}

TEST_CASE("format directives") {
  Workspace ws;
  BufferIo io;
  QueryOptions opts;
  opts.io = &io;
  auto run = [&](const std::string& q) {
    io.take_output();
    solve_all(ws, q, opts);
    return io.take_output();
  };
  CHECK(run("format(\"~w and ~q~n\", [a, 'B c'])") == "a and 'B c'\n");
  CHECK(run("format(\"~a|~d|~2d|~D\", [x, 42, 314, 1234567])") == "x|42|3.14|1,234,567");
  CHECK(run("format(\"~4f ~e\", [3.14159, 2.5])") == "3.1416 2.500000e+00");
  CHECK(run("format(\"~s~c~8|~w\", [\"ab\", 65, z])") == "abA     z");
  CHECK(run("format(\"~t~w~6|\", [right])") == " right");
  CHECK(run("format(\"~w~t~6+|\", [ab])") == "ab    |");
  CHECK(run("format(\"~8r ~16R\", [8, 255])") == "10 FF");
  CHECK(run("format(hello)") == "hello");
  CHECK(run("format(\"~w\", single)") == "single");
  CHECK(run("print('A'), writeq([a|b]), write(- (1)), nl") == "'A'[a|b]-(1)\n");
  CHECK(error_of(ws, "format(\"~w ~w\", [a])", opts) == "format(\"not enough arguments\")");
  CHECK(error_of(ws, "format(\"~w\", [a, b])", opts) == "format(\"too many arguments\")");
}

TEST_CASE("dynamic database") {
  Workspace ws = load(R"(
:- dynamic counter/1.
counter(0).
bump :- retract(counter(N)), N1 is N+1, assertz(counter(N1)).
)");
  CHECK(answers(ws, "bump, bump, counter(X)") == std::vector<std::string>{"X = 2"});
  CHECK(answers(ws, "assertz(f(1)), assertz(f(2)), asserta(f(0)), findall(X, f(X), L)") ==
        std::vector<std::string>{"L = [0,1,2]"});
  CHECK(answers(ws, "retract(f(_)), findall(X, f(X), L)") == std::vector<std::string>{"L = [1,2]"});
  CHECK(answers(ws, "retract(nothing(_))").empty());
  CHECK(answers(ws, "assertz((g(X) :- X > 1)), g(2)").size() == 1);
  CHECK(ws.is_dynamic("f", 1));
  CHECK(ws.origin("f", 1) == Origin::kLocal);
  // Asserts made on a failing branch stay.
  CHECK(answers(ws, "(assertz(h(1)), fail ; true), h(X)") == std::vector<std::string>{"X = 1"});
}

TEST_CASE("consult") {
  Workspace ws;
  auto errors = consult_text(ws, R"(
sublist(S, L) :- append(_, T, L), append(S, _, T).
sublist(x, y).
:- use_rendering(chess).
atom(x).
:- op(700, xfx, ===>).
a ===> b.
:- foo.
:- include(lists).
)",
                             {.include = [](const std::string& name) -> std::optional<std::string> {
                               if (name == "lists") return "inc(1).\ninc(2).\n";
                               return std::nullopt;
                             }});
  REQUIRE(errors.size() == 2);
  CHECK(errors[0].kind == "permission");
  CHECK(errors[0].line == 5);
  CHECK(errors[1].kind == "directive");
  CHECK(ws.clauses("sublist", 2).size() == 2);
  CHECK(ws.renderers() == std::vector<std::string>{"chess"});
  CHECK(ws.clauses("===>", 2).size() == 1);
  CHECK(ws.clauses("inc", 1).size() == 2);
  CHECK(ws.origin("append", 3) == Origin::kLibrary);
  CHECK(ws.origin("is", 2) == Origin::kBuiltin);

  Workspace cyc;
  auto errs = consult_text(cyc, ":- include(a).\n",
                           {.include = [](const std::string& name) -> std::optional<std::string> {
                             return name == "a" ? ":- include(b).\n" : ":- include(a).\n";
                           }});
  REQUIRE(errs.size() == 1);
  CHECK(errs[0].kind == "include_cycle");

  Workspace local = load("append(mine, _, _).");
  CHECK(local.origin("append", 3) == Origin::kLocal);
  CHECK(answers(local, "append(X, 1, 2)") == std::vector<std::string>{"X = mine"});
  // A fresh workspace still has the library version.
  Workspace fresh;
  CHECK(answers(fresh, "append([a], [b], L)") == std::vector<std::string>{"L = [a,b]"});
}

TEST_CASE("queens count matches the exhaustive oracle") {
  Workspace ws = load(kQueens);
  // Oracle: tests/oracles/queens.py 8 -> 92; 6 -> 4.
  CHECK(answers(ws, "aggregate_all(count, queens(8, _), N)") == std::vector<std::string>{"N = 92"});
  CHECK(answers(ws, "aggregate_all(count, queens(6, _), N)") == std::vector<std::string>{"N = 4"});
}

TEST_CASE("budgets") {
  Workspace ws = load(R"(
loop :- loop.
deep :- deep, true.
count(N) :- N > 0, N1 is N-1, count(N1).
count(0).
)");
  QueryOptions opts;
  opts.budget.inference_limit = 10'000;
  CHECK(error_of(ws, "loop", opts) == "resource_error(inferences)");
  QueryOptions depth;
  depth.budget.depth_limit = 1'000;
  CHECK(error_of(ws, "deep", depth) == "resource_error(depth)");
  // Tail recursion runs in constant depth.
  CHECK(answers(ws, "count(100000)", depth).size() == 1);
  QueryOptions wall;
  wall.budget.wall_time_limit = 0.2;
  CHECK(error_of(ws, "loop", wall) == "resource_error(wall_time)");
  QueryOptions mem;
  mem.budget.memory_limit = 100'000;
  CHECK(error_of(ws, "length(L, 1000000)", mem) == "resource_error(memory)");
  std::atomic<bool> abort{true};
  QueryOptions ab;
  ab.abort = &abort;
  CHECK_THROWS_AS(solve_all(ws, "loop", ab), QueryAborted);
}

TEST_CASE("read from the client") {
  Workspace ws;
  BufferIo io({"foo(Bar, baz)", "foo(Bar, baz)."});
  QueryOptions opts;
  opts.io = &io;
  auto a = answers(ws, "read(X)", opts);
  REQUIRE(a.size() == 1);
  CHECK(a[0] == "X = foo(_A,baz)");
  CHECK(io.errors().size() == 1);
  BufferIo empty;
  opts.io = &empty;
  CHECK(answers(ws, "read(X)", opts) == std::vector<std::string>{"X = end_of_file"});
}

TEST_CASE("modifier meta-goals") {
  Workspace ws;
  CHECK(answers(ws, "limit(2, between(1, 9, X))") == std::vector<std::string>{"X = 1", "X = 2"});
  CHECK(answers(ws, "distinct(X, member(X, [a,a,b]))") == std::vector<std::string>{"X = a", "X = b"});
  CHECK(answers(ws, "order_by([desc(X)], member(X-Y, [1-a, 3-b, 2-c]))") ==
        std::vector<std::string>{"X = 3, Y = b", "X = 2, Y = c", "X = 1, Y = a"});
  CHECK(answers(ws, "order_by([asc(Y)], member(X-Y, [1-c, 3-b, 2-a]))") ==
        std::vector<std::string>{"Y = a, X = 2", "Y = b, X = 3", "Y = c, X = 1"});
  BufferIo io;
  QueryOptions opts;
  opts.io = &io;
  CHECK(answers(ws, "time(between(1, 2, X))", opts) == std::vector<std::string>{"X = 1", "X = 2"});
  CHECK(io.output().rfind("time: ", 0) == 0);
  CHECK(io.output().find("inferences") != std::string::npos);

  auto q = read_term_from_string("limit(2, between(1, 9, X))", ws.ops(), true);
  Query query(ws, q.term, q.var_names, {});
  auto c = query.next(5);
  CHECK(c.solutions.size() == 2);
  CHECK_FALSE(c.more);
}

namespace {

struct Script : DebugHook {
  std::vector<DebugCommand> commands;
  size_t next = 0;
  std::vector<std::string> ports;
  std::vector<std::string> pauses;
  std::vector<PortEvent> pause_events;

  static std::string label(const PortEvent& e) {
    return std::string(port_name(e.port)) + " " + writeq(e.goal) + " @" + std::to_string(e.depth);
  }
  void on_port(const PortEvent& e) override { ports.push_back(label(e)); }
  DebugCommand on_pause(const PortEvent& e) override {
    pauses.push_back(label(e));
    pause_events.push_back(e);
    return next < commands.size() ? commands[next++] : DebugCommand::kContinue;
  }
};

const char* kLists = R"(p(X) :- q(X), r(X).
q(1).
q(2).
r(2).
s(L) :-
    append(X, [c], L),
    length(X, N),
    N > 0.
)";

}  // namespace

TEST_CASE("tracer follows the four-port model") {
  Workspace ws = load(kLists);
  Script hook;
  hook.commands.assign(40, DebugCommand::kStepInto);
  QueryOptions opts;
  opts.debug = &hook;
  opts.debug_state.mode = DebugMode::kCreep;
  auto a = answers(ws, "p(X)", opts);
  CHECK(a == std::vector<std::string>{"X = 2"});
  std::vector<std::string> expected{
      "call p(X) @0", "call q(X) @1", "exit q(1) @1", "call r(1) @1", "fail r(1) @1",
      "redo q(1) @1",  "exit q(2) @1", "call r(2) @1", "exit r(2) @1", "exit p(2) @0"};
  std::vector<std::string> got;
  for (std::string p : hook.ports) {
    // Variable ids differ between runs.
    size_t g = p.find("_G");
    while (g != std::string::npos) {
      size_t e = g + 2;
      while (e < p.size() && std::isdigit(static_cast<unsigned char>(p[e]))) ++e;
      p.erase(g + 2, e - g - 2);
      g = p.find("_G", g + 2);
    }
    got.push_back(p);
  }
  CHECK(got == expected);
  if (got != expected) {
    for (const auto& p : got) MESSAGE(p);
  }
  CHECK(hook.pauses.size() == hook.ports.size());
}

TEST_CASE("tracer breakpoints, skip and retry") {
  Workspace ws = load(kLists);
  SUBCASE("breakpoint pauses at the call port of its line") {
    Script hook;
    QueryOptions opts;
    opts.debug = &hook;
    opts.debug_state.breakpoints = {7};
    auto q = read_term_from_string("s(L)", ws.ops(), true);
    Query query(ws, q.term, q.var_names, opts);
    CHECK(query.next_solution());
    REQUIRE(!hook.pause_events.empty());
    CHECK(hook.pause_events[0].port == Port::kCall);
    CHECK(hook.pause_events[0].line == 7);
    CHECK(writeq(hook.pause_events[0].goal).rfind("length(", 0) == 0);
  }
  SUBCASE("step over pauses only at or above the current depth") {
    Script hook;
    hook.commands = {DebugCommand::kStepInto, DebugCommand::kStepOver, DebugCommand::kStepOver,
                     DebugCommand::kStepOver, DebugCommand::kStepOver};
    QueryOptions opts;
    opts.debug = &hook;
    opts.debug_state.mode = DebugMode::kCreep;
    auto q = read_term_from_string("s(L)", ws.ops(), true);
    Query query(ws, q.term, q.var_names, opts);
    CHECK(query.next_solution());
    REQUIRE(hook.pause_events.size() >= 3);
    for (size_t i = 2; i < hook.pause_events.size(); ++i) {
      CHECK(hook.pause_events[i].depth <= hook.pause_events[i - 1].depth);
    }
  }
  SUBCASE("retry at exit re-enters the call with pre-call bindings") {
    Script hook;
    hook.commands = {DebugCommand::kStepInto, DebugCommand::kStepInto, DebugCommand::kRetry,
                     DebugCommand::kContinue};
    QueryOptions opts;
    opts.debug = &hook;
    opts.debug_state.mode = DebugMode::kCreep;
    auto a = answers(ws, "p(X)", opts);
    CHECK(a == std::vector<std::string>{"X = 2"});
    REQUIRE(hook.pause_events.size() >= 4);
    CHECK(hook.pause_events[2].port == Port::kExit);
    CHECK(writeq(hook.pause_events[2].goal) == "q(1)");
    CHECK(hook.pause_events[3].port == Port::kCall);
    CHECK(hook.pause_events[3].goal.arg(0).is_var());
    CHECK(hook.pause_events[3].frame != hook.pause_events[1].frame);
  }
  SUBCASE("retry at a call port asks again") {
    Script hook;
    hook.commands = {DebugCommand::kRetry, DebugCommand::kContinue};
    QueryOptions opts;
    opts.debug = &hook;
    opts.debug_state.mode = DebugMode::kCreep;
    answers(ws, "p(X)", opts);
    REQUIRE(hook.pause_events.size() == 2);
    CHECK(hook.pause_events[0].frame == hook.pause_events[1].frame);
    CHECK(hook.pause_events[1].port == Port::kCall);
  }
  SUBCASE("abort ends the query") {
    Script hook;
    hook.commands = {DebugCommand::kStepInto, DebugCommand::kAbort};
    QueryOptions opts;
    opts.debug = &hook;
    opts.debug_state.mode = DebugMode::kCreep;
    CHECK_THROWS_AS(answers(ws, "p(X)", opts), QueryAborted);
  }
}
