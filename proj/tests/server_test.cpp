#include <doctest.h>

#include <chrono>
#include <random>
#include <thread>

#include <httplib.h>

#include "plweb/server.hpp"
#include "plweb/session.hpp"

using namespace plweb;
using nlohmann::json;

namespace {

const char* kAppend = R"(/** <examples>
?- append([one], [two,three], List).
*/
append([], L, L).
append([H|T], L, [H|R]) :- append(T, L, R).
)";

const char* kLists = R"(p(X) :- q(X), r(X).
q(1).
q(2).
r(2).
s(L) :-
    append(X, [c], L),
    length(X, N),
    N > 0.
loop :- loop.
)";

double since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

/// Pulls until an event of the given kind arrives; returns everything seen.
std::vector<json> pull_until(SessionManager& m, const std::string& id, const std::string& kind,
                             double timeout = 5) {
  std::vector<json> seen;
  auto t0 = std::chrono::steady_clock::now();
  while (since(t0) < timeout) {
    EventBatch b = m.pull_events(id, std::nullopt, 0.5);
    for (const json& ev : b.events) {
      seen.push_back(ev);
      if (ev["event"] == kind) return seen;
    }
  }
  return seen;
}

std::vector<std::string> kinds(const std::vector<json>& events) {
  std::vector<std::string> out;
  for (const json& ev : events) out.push_back(ev["event"].get<std::string>());
  return out;
}

std::string prolog_text(const json& binding) {
  for (const json& r : binding["renderings"]) {
    if (r["renderer"] == "prolog") return r["payload"].get<std::string>();
  }
  return {};
}

bool wait_for_state(SessionManager& m, const std::string& id, SessionState s, double timeout = 5) {
  auto t0 = std::chrono::steady_clock::now();
  while (since(t0) < timeout) {
    if (m.state(id) == s) return true;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  return false;
}

bool path_is_legal(const std::vector<SessionState>& path) {
  if (path.empty() || path.front() != SessionState::kCreated) return false;
  for (size_t i = 1; i < path.size(); ++i) {
    if (!legal_transition(path[i - 1], path[i])) return false;
  }
  return true;
}

/// Creates a session and drains its create event.
std::string fresh(SessionManager& m, const std::string& src) {
  std::string id = m.create(src);
  m.pull_events(id, std::nullopt, 0);
  return id;
}

AskRequest ask(std::string query, size_t chunk = 1) {
  AskRequest r;
  r.query = std::move(query);
  r.chunk = chunk;
  return r;
}

}  // namespace

TEST_CASE("state machine relation") {
  using S = SessionState;
  CHECK(legal_transition(S::kCreated, S::kRunning));
  CHECK_FALSE(legal_transition(S::kCreated, S::kDone));
  CHECK(legal_transition(S::kWaitingMore, S::kDone));
  CHECK(legal_transition(S::kPausedDebug, S::kAborted));
  CHECK_FALSE(legal_transition(S::kDone, S::kRunning));
  CHECK_FALSE(legal_transition(S::kDestroyed, S::kDestroyed));
  CHECK(legal_transition(S::kDone, S::kDestroyed));
  CHECK(parse_session_state("waiting_more") == S::kWaitingMore);
  CHECK(is_terminal(S::kFailedError));
  CHECK_FALSE(is_terminal(S::kDestroyed));
}

TEST_CASE("append round trip") {
  SessionManager m;
  std::string id = m.create(kAppend);
  CHECK(m.state(id) == SessionState::kCreated);
  EventBatch first = m.pull_events(id, std::nullopt, 0);
  REQUIRE(first.events.size() == 1);
  CHECK(first.events[0]["event"] == "create");
  CHECK(first.events[0]["examples"] == json::array({"append([one], [two,three], List)"}));

  m.ask(id, ask("append([one],[two,three],List)"));
  auto events = pull_until(m, id, "destroyed");
  CHECK(kinds(events) == std::vector<std::string>{"success", "destroyed"});
  const json& s = events[0];
  CHECK(s["more"] == false);
  REQUIRE(s["solutions"].size() == 1);
  CHECK(s["solutions"][0]["bindings"][0]["var"] == "List");
  CHECK(prolog_text(s["solutions"][0]["bindings"][0]) == "[one,two,three]");
  CHECK(m.final_state(id) == SessionState::kDone);
  CHECK(path_is_legal(m.state_path(id)));
  CHECK(m.live() == 0);
}

TEST_CASE("chunked answers") {
  SessionManager m;
  std::string id = fresh(m, "");
  m.ask(id, ask("between(1,25,X)", 10));
  auto e1 = pull_until(m, id, "success");
  REQUIRE(!e1.empty());
  CHECK(e1.back()["solutions"].size() == 10);
  CHECK(e1.back()["more"] == true);
  REQUIRE(wait_for_state(m, id, SessionState::kWaitingMore));
  m.next(id, 10);
  auto e2 = pull_until(m, id, "success");
  CHECK(e2.back()["solutions"].size() == 10);
  CHECK(e2.back()["more"] == true);
  REQUIRE(wait_for_state(m, id, SessionState::kWaitingMore));
  m.next(id, 1000);
  auto e3 = pull_until(m, id, "destroyed");
  REQUIRE(e3.size() == 2);
  CHECK(e3[0]["solutions"].size() == 5);
  CHECK(prolog_text(e3[0]["solutions"][4]["bindings"][0]) == "25");
  CHECK(e3[0]["more"] == false);
  CHECK_THROWS_AS(m.next(id, 1), SessionError);
}

TEST_CASE("next counts are clamped") {
  SessionManager m;
  std::string id = fresh(m, "");
  m.ask(id, ask("between(1,3000,X)", 0));
  auto e1 = pull_until(m, id, "success");
  CHECK(e1.back()["solutions"].size() == 1);
  REQUIRE(wait_for_state(m, id, SessionState::kWaitingMore));
  m.next(id, 5000);
  auto e2 = pull_until(m, id, "success");
  CHECK(e2.back()["solutions"].size() == 1000);
  m.abort(id);
}

TEST_CASE("failure and errors") {
  SessionManager m;
  SUBCASE("failure") {
    std::string id = fresh(m, "");
    m.ask(id, ask("fail"));
    CHECK(kinds(pull_until(m, id, "destroyed")) ==
          std::vector<std::string>{"failure", "destroyed"});
    CHECK(m.final_state(id) == SessionState::kDone);
  }
  SUBCASE("runtime error") {
    std::string id = fresh(m, "");
    m.ask(id, ask("X is 1/0"));
    auto events = pull_until(m, id, "destroyed");
    REQUIRE(events.size() == 2);
    CHECK(events[0]["event"] == "error");
    CHECK(events[0]["kind"] == "evaluation_error");
    CHECK(m.final_state(id) == SessionState::kFailedError);
  }
  SUBCASE("unknown predicate") {
    std::string id = fresh(m, "");
    m.ask(id, ask("nope(1)"));
    auto events = pull_until(m, id, "destroyed");
    CHECK(events[0]["kind"] == "existence_error");
  }
  SUBCASE("query syntax error") {
    std::string id = fresh(m, "");
    m.ask(id, ask("foo("));
    auto events = pull_until(m, id, "destroyed");
    CHECK(events[0]["kind"] == "syntax_error");
    CHECK(path_is_legal(m.state_path(id)));
  }
  SUBCASE("unsafe query carries the trace") {
    std::string id = fresh(m, "");
    m.ask(id, ask("read(X), call(X)"));
    auto events = pull_until(m, id, "destroyed");
    REQUIRE(events.size() == 2);
    CHECK(events[0]["kind"] == "instantiation");
    CHECK(events[0]["source"] == "sandbox");
    CHECK(!events[0]["trace"].empty());
  }
  SUBCASE("budget exhaustion") {
    SessionConfig c;
    c.budget.inference_limit = 10000;
    SessionManager limited(c);
    std::string id = fresh(limited, "loop :- loop.");
    limited.ask(id, ask("loop"));
    auto events = pull_until(limited, id, "destroyed");
    CHECK(events[0]["kind"] == "resource_error");
  }
}

TEST_CASE("load errors keep the session") {
  SessionManager m;
  std::string id = m.create("main :- true.\n:- initialization(main).\nfoo(.\n");
  auto events = m.pull_events(id, std::nullopt, 0).events;
  REQUIRE(events.size() == 3);
  CHECK(events[0]["event"] == "create");
  CHECK(events[1]["kind"] == "permission");
  CHECK(events[1]["line"] == 2);
  CHECK(events[2]["kind"] == "syntax");
  CHECK(m.state(id) == SessionState::kCreated);
}

TEST_CASE("protocol errors") {
  SessionManager m;
  std::string id = fresh(m, kLists);
  CHECK_THROWS_AS(m.next(id, 1), SessionError);
  CHECK_THROWS_AS(m.stop(id), SessionError);
  CHECK_THROWS_AS(m.abort(id), SessionError);
  CHECK_THROWS_AS(m.respond(id, "x."), SessionError);
  m.ask(id, ask("q(X)"));
  try {
    m.ask(id, ask("q(X)"));
    FAIL("second ask accepted");
  } catch (const SessionError& e) {
    CHECK(e.code() == SessionError::Code::kProtocol);
    CHECK(e.code_name() == "protocol_error");
  }
  REQUIRE(wait_for_state(m, id, SessionState::kWaitingMore));
  m.stop(id);
  CHECK_THROWS_AS(m.stop(id), SessionError);
  auto events = pull_until(m, id, "destroyed");
  CHECK(kinds(events) == std::vector<std::string>{"success", "stopped", "destroyed"});
  CHECK_THROWS_AS(m.abort(id), SessionError);
  CHECK_THROWS_AS(m.set_breakpoints(id, {1}), SessionError);
  try {
    (void)m.state("0000");
    FAIL("unknown id accepted");
  } catch (const SessionError& e) {
    CHECK(e.code() == SessionError::Code::kNotFound);
  }
}

TEST_CASE("abort") {
  SessionManager m;
  SUBCASE("infinite loop stops within a second") {
    std::string id = fresh(m, kLists);
    m.ask(id, ask("loop"));
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    CHECK(m.state(id) == SessionState::kRunning);
    CHECK_THROWS_AS(m.respond(id, "x."), SessionError);
    auto t0 = std::chrono::steady_clock::now();
    m.abort(id);
    CHECK(since(t0) < 0.1);
    auto events = pull_until(m, id, "destroyed", 2);
    CHECK(since(t0) < 1.0);
    CHECK(kinds(events) == std::vector<std::string>{"aborted", "destroyed"});
    CHECK(m.final_state(id) == SessionState::kAborted);
  }
  SUBCASE("while prompting") {
    std::string id = fresh(m, "");
    m.ask(id, ask("read(X)"));
    REQUIRE(wait_for_state(m, id, SessionState::kPromptingInput));
    m.abort(id);
    auto events = pull_until(m, id, "destroyed");
    CHECK(kinds(events) == std::vector<std::string>{"prompt", "aborted", "destroyed"});
    CHECK(path_is_legal(m.state_path(id)));
  }
  SUBCASE("while waiting for more") {
    std::string id = fresh(m, "");
    m.ask(id, ask("between(1,inf,X)"));
    REQUIRE(wait_for_state(m, id, SessionState::kWaitingMore));
    m.abort(id);
    auto events = pull_until(m, id, "destroyed");
    CHECK(kinds(events) == std::vector<std::string>{"success", "aborted", "destroyed"});
  }
  SUBCASE("destroy while running") {
    std::string id = fresh(m, kLists);
    m.ask(id, ask("loop"));
    m.destroy(id);
    REQUIRE(wait_for_state(m, id, SessionState::kDestroyed, 1));
    CHECK(m.live() == 0);
  }
}

TEST_CASE("input") {
  SessionManager m;
  std::string id = fresh(m, "");
  m.ask(id, ask("read(X), writeln(X)"));
  auto prompt = pull_until(m, id, "prompt");
  REQUIRE(!prompt.empty());
  CHECK(prompt.back()["kind"] == "read_term");
  REQUIRE(wait_for_state(m, id, SessionState::kPromptingInput));
  m.respond(id, "foo(");
  auto retry = pull_until(m, id, "prompt");
  CHECK(kinds(retry) == std::vector<std::string>{"error", "prompt"});
  CHECK(retry[0]["kind"] == "syntax_error");
  REQUIRE(wait_for_state(m, id, SessionState::kPromptingInput));
  m.respond(id, "hello.");
  auto events = pull_until(m, id, "destroyed");
  REQUIRE(kinds(events) == std::vector<std::string>{"output", "success", "destroyed"});
  CHECK(events[0]["text"] == "hello\n");
  CHECK(prolog_text(events[1]["solutions"][0]["bindings"][0]) == "hello");
  CHECK(path_is_legal(m.state_path(id)));
}

TEST_CASE("debugger over the session") {
  SessionManager m;
  SUBCASE("breakpoint then continue") {
    std::string id = fresh(m, kLists);
    m.set_breakpoints(id, {7});
    AskRequest r = ask("s(L)");
    r.debug = true;
    m.ask(id, r);
    auto events = pull_until(m, id, "prompt");
    REQUIRE(events.size() == 2);
    CHECK(events[0]["event"] == "debug");
    CHECK(events[0]["port"] == "call");
    CHECK(events[0]["line"] == 7);
    CHECK(events[1]["kind"] == "debug");
    REQUIRE(wait_for_state(m, id, SessionState::kPausedDebug));
    CHECK_THROWS_AS(m.respond(id, "jump"), SessionError);
    m.set_breakpoints(id, {});
    m.respond(id, "continue");
    auto rest = pull_until(m, id, "success");
    CHECK(rest.back()["event"] == "success");
    m.abort(id);
  }
  SUBCASE("retry replays the call port") {
    std::string id = fresh(m, kLists);
    AskRequest r = ask("q(X)");
    r.debug = true;
    m.ask(id, r);
    auto call = pull_until(m, id, "prompt");
    CHECK(call[0]["port"] == "call");
    REQUIRE(wait_for_state(m, id, SessionState::kPausedDebug));
    m.respond(id, "step_into");
    auto exit = pull_until(m, id, "prompt");
    CHECK(exit[0]["port"] == "exit");
    CHECK(exit[0]["goal"] == "q(1)");
    REQUIRE(wait_for_state(m, id, SessionState::kPausedDebug));
    m.respond(id, "retry");
    auto again = pull_until(m, id, "prompt");
    CHECK(again[0]["port"] == "call");
    CHECK(again[0]["goal"] == "q(X)");
    CHECK(again[0]["frame"] != call[0]["frame"]);
    REQUIRE(wait_for_state(m, id, SessionState::kPausedDebug));
    m.respond(id, "abort");
    auto end = pull_until(m, id, "destroyed");
    CHECK(kinds(end) == std::vector<std::string>{"aborted", "destroyed"});
  }
  SUBCASE("no breakpoints and no debug never pauses") {
    std::string id = fresh(m, kLists);
    m.set_breakpoints(id, {});
    m.ask(id, ask("s(L)"));
    auto events = pull_until(m, id, "success");
    CHECK(kinds(events) == std::vector<std::string>{"success"});
    m.abort(id);
  }
}

TEST_CASE("modifiers and table mode") {
  SessionManager m;
  std::string id = fresh(m, "");
  AskRequest r = ask("member(X-Y,[b-1,a-2])", 10);
  r.modifiers.push_back(*parse_modifier("order_by(X)"));
  r.table = true;
  m.ask(id, r);
  auto events = pull_until(m, id, "destroyed");
  REQUIRE(events[0]["event"] == "success");
  CHECK(prolog_text(events[0]["solutions"][0]["bindings"][0]) == "a");
  CHECK(events[0]["projection"] == json::array({"X", "Y"}));
  CHECK(events[0]["table"]["tag"] == "table");
}

TEST_CASE("sandbox can be disabled") {
  SessionConfig c;
  c.sandbox = false;
  SessionManager m(c);
  std::string id = m.create("t :- assertz(seen(1)).\n:- t.\n");
  auto created = m.pull_events(id, std::nullopt, 0).events;
  CHECK(created.size() == 1);
  m.ask(id, ask("seen(X)"));
  auto events = pull_until(m, id, "destroyed");
  CHECK(events[0]["event"] == "success");
}

TEST_CASE("workspaces are isolated") {
  SessionManager m;
  const char* prog = ":- dynamic fact/1.\n";
  std::string a = fresh(m, prog);
  std::string b = fresh(m, prog);
  m.ask(a, ask("assertz(fact(a)), fact(X)"));
  pull_until(m, a, "destroyed");
  m.ask(b, ask("findall(X, fact(X), L)"));
  auto events = pull_until(m, b, "destroyed");
  const json& bindings = events[0]["solutions"][0]["bindings"];
  REQUIRE(bindings.size() == 1);
  CHECK(bindings[0]["var"] == "L");
  CHECK(prolog_text(bindings[0]) == "[]");
}

TEST_CASE("engine limit") {
  SessionConfig c;
  c.max_engines = 2;
  SessionManager m(c);
  std::string a = m.create("");
  m.create("");
  try {
    m.create("");
    FAIL("limit not enforced");
  } catch (const SessionError& e) {
    CHECK(e.code() == SessionError::Code::kTooManyEngines);
  }
  m.destroy(a);
  CHECK(m.live() == 1);
  CHECK_NOTHROW(m.create(""));
}

TEST_CASE("event cursor") {
  SessionManager m;
  std::string id = m.create("");
  EventBatch first = m.pull_events(id, 0, 0);
  REQUIRE(first.events.size() == 1);
  // Replays until acknowledged.
  EventBatch again = m.pull_events(id, 0, 0);
  CHECK(again.events.size() == 1);
  EventBatch acked = m.pull_events(id, first.cursor, 0);
  CHECK(acked.events.empty());
  CHECK(acked.cursor == first.cursor);
  auto t0 = std::chrono::steady_clock::now();
  EventBatch empty = m.pull_events(id, std::nullopt, 1);
  double waited = since(t0);
  CHECK(empty.events.empty());
  CHECK(waited > 0.9);
  CHECK(waited < 1.5);
}

TEST_CASE("expiry") {
  SessionConfig c;
  c.destroy_grace = 0.2;
  c.idle_timeout = 0.2;
  SessionManager m(c);
  std::string idle = m.create("");
  std::string done = m.create("");
  m.ask(done, ask("true"));
  pull_until(m, done, "destroyed");
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  m.reap();
  m.reap();
  CHECK_THROWS_AS(m.pull_events(done, std::nullopt, 0), SessionError);
  CHECK(m.live() == 0);
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  m.reap();
  CHECK(m.size() == 0);
  CHECK_THROWS_AS((void)m.state(idle), SessionError);
}

TEST_CASE("randomized client scripts follow the state machine") {
  SessionConfig c;
  c.max_engines = 64;
  SessionManager m(c);
  std::mt19937 rng(20150501);
  const char* queries[] = {"between(1,5,X)", "read(X), writeln(X)", "q(X)", "loop",
                           "fail",           "X is 1/0",            "p(X)", "member(X,[a,b])"};
  for (int round = 0; round < 60; ++round) {
    std::string id = m.create(kLists);
    std::vector<json> seen;
    auto record = [&](double timeout) {
      for (json& ev : m.pull_events(id, std::nullopt, timeout).events) seen.push_back(ev);
    };
    AskRequest r = ask(queries[rng() % 8], 1 + rng() % 3);
    r.debug = rng() % 4 == 0;
    m.ask(id, r);
    for (int step = 0; step < 12; ++step) {
      std::this_thread::sleep_for(std::chrono::microseconds(rng() % 2000));
      SessionState s = m.state(id);
      if (s == SessionState::kDestroyed) break;
      try {
        switch (rng() % 6) {
          case 0: m.next(id, 1 + rng() % 3); break;
          case 1: m.stop(id); break;
          case 2: m.respond(id, rng() % 2 ? "step_into" : "hi."); break;
          case 3: m.respond(id, "continue"); break;
          case 4: record(0); break;
          case 5:
            if (step > 8) m.abort(id);
            break;
        }
      } catch (const SessionError& e) {
        CHECK(e.code() != SessionError::Code::kNotFound);
      }
    }
    if (m.state(id) != SessionState::kDestroyed) m.destroy(id);
    CHECK(wait_for_state(m, id, SessionState::kDestroyed, 2));
    auto path = m.state_path(id);
    INFO("round " << round);
    CHECK(path_is_legal(path));
    record(0);
    REQUIRE(!seen.empty());
    CHECK(seen.front()["event"] == "create");
    CHECK(seen.back()["event"] == "destroyed");
    for (size_t i = 1; i < seen.size(); ++i) {
      CHECK(seen[i]["seq"].get<uint64_t>() == seen[i - 1]["seq"].get<uint64_t>() + 1);
    }
  }
  CHECK(m.live() == 0);
}

TEST_CASE("http endpoints") {
  ServerConfig config;
  config.sessions.max_engines = 3;
  Server server(config);
  int port = server.bind_any_port();
  REQUIRE(port > 0);
  std::thread serving([&] { server.serve(); });
  httplib::Client cli("127.0.0.1", port);
  cli.set_read_timeout(10, 0);

  auto post = [&](const std::string& path, const json& body) {
    auto res = cli.Post(path, body.dump(), "application/json");
    REQUIRE(res);
    return std::make_pair(res->status, res->body.empty() ? json() : json::parse(res->body));
  };
  auto get = [&](const std::string& path) {
    auto res = cli.Get(path);
    REQUIRE(res);
    return std::make_pair(res->status, json::parse(res->body));
  };

  SUBCASE("engine round trip") {
    auto t0 = std::chrono::steady_clock::now();
    auto [st, created] = post("/api/pengine/create", {{"src", kAppend}});
    REQUIRE(st == 200);
    std::string id = created["id"];
    CHECK(post("/api/pengine/" + id + "/ask", {{"query", "append([one],[two,three],List)"}})
              .first == 200);
    std::vector<json> events;
    uint64_t cursor = 0;
    while (events.empty() || events.back()["event"] != "destroyed") {
      auto [s2, batch] = get("/api/pengine/" + id + "/events?timeout=2&cursor=" +
                             std::to_string(cursor));
      REQUIRE(s2 == 200);
      for (const json& ev : batch["events"]) events.push_back(ev);
      cursor = batch["cursor"];
      if (since(t0) > 5) break;
    }
    CHECK(since(t0) < 1.0);
    CHECK(kinds(events) == std::vector<std::string>{"create", "success", "destroyed"});
    CHECK(prolog_text(events[1]["solutions"][0]["bindings"][0]) == "[one,two,three]");
    auto [s3, state] = get("/api/pengine/" + id);
    CHECK(s3 == 200);
    CHECK(state["state"] == "destroyed");
    CHECK(state["final_state"] == "done");
    CHECK(post("/api/pengine/" + id + "/next", {{"count", 10}}).first == 409);
  }
  SUBCASE("error statuses") {
    CHECK(get("/api/pengine/abcdef/events").first == 404);
    auto [s1, e1] = post("/api/pengine/create", json::object());
    CHECK(s1 == 200);
    auto bad = cli.Post("/api/pengine/" + e1["id"].get<std::string>() + "/ask", "{", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);
    post("/api/pengine/create", json::object());
    post("/api/pengine/create", json::object());
    auto [s4, e4] = post("/api/pengine/create", json::object());
    CHECK(s4 == 429);
    CHECK(e4["error"] == "too_many_engines");
    auto del = cli.Delete("/api/pengine/" + e1["id"].get<std::string>());
    REQUIRE(del);
    CHECK(del->status == 200);
    CHECK(post("/api/pengine/create", json::object()).first == 200);
  }
  SUBCASE("store") {
    auto [s1, saved] = post("/api/store", {{"content", "a(1).\n"}});
    REQUIRE(s1 == 200);
    std::string name = saved["name"];
    CHECK(saved["hash"] == sha1_hex("a(1).\n"));
    auto put = cli.Put("/api/store/" + name,
                       json({{"content", "a(2).\n"}, {"previous", saved["hash"]}}).dump(),
                       "application/json");
    REQUIRE(put);
    CHECK(put->status == 200);
    auto stale = cli.Put("/api/store/" + name,
                         json({{"content", "a(3).\n"}, {"previous", saved["hash"]}}).dump(),
                         "application/json");
    REQUIRE(stale);
    CHECK(stale->status == 409);
    CHECK(json::parse(stale->body)["current"] == sha1_hex("a(2).\n"));
    auto raw = cli.Get("/api/store/" + name);
    REQUIRE(raw);
    CHECK(raw->body == "a(2).\n");
    auto old = cli.Get("/api/store/" + name + "?version=" + saved["hash"].get<std::string>());
    REQUIRE(old);
    CHECK(old->body == "a(1).\n");
    auto [s2, hist] = get("/api/store/" + name + "/history");
    CHECK(s2 == 200);
    CHECK(hist.size() == 2);
    auto [s3, fork] = post("/api/store/" + name + "/fork", json::object());
    CHECK(s3 == 200);
    CHECK(fork["hash"] == sha1_hex("a(2).\n"));
    CHECK(get("/api/store/nosuchname").first == 404);

    // Engines include stored programs by name.
    auto [s4, created] =
        post("/api/pengine/create", {{"src", ":- include('" + name + "').\n"}});
    std::string id = created["id"];
    post("/api/pengine/" + id + "/ask", {{"query", "a(X)"}});
    auto events = pull_until(server.sessions(), id, "destroyed");
    REQUIRE(!events.empty());
    CHECK(kinds(events) == std::vector<std::string>{"create", "success", "destroyed"});
  }
  SUBCASE("highlight") {
    auto [s1, tokens] = post("/api/highlight/doc1", {{"text", "p :- q.\nq.\n"}});
    REQUIRE(s1 == 200);
    CHECK(tokens["generation"] == 1);
    REQUIRE(tokens["groups"].size() == 2);
    const json& g0 = tokens["groups"][0];
    CHECK(g0[0]["kind"] == "atom");
    CHECK(g0[0]["len"] == 1);
    CHECK(g0[0]["class"] == "head_defined");
    CHECK(g0[1]["kind"] == "layout");
    size_t total = 0;
    for (const json& g : tokens["groups"])
      for (const json& t : g) total += t["len"].get<size_t>();
    CHECK(total == std::string("p :- q.\nq.").size());
    auto [s2, changed] = post("/api/highlight/doc1",
                              {{"generation", 1},
                               {"changes", json::array({{{"from", 5}, {"to", 6}, {"insert", "r"}}})}});
    CHECK(s2 == 200);
    CHECK(changed["generation"] == 2);
    CHECK(changed["groups"][0][4]["class"] == "goal_undefined");
    auto [s3, stale] = post("/api/highlight/doc1",
                            {{"generation", 1}, {"changes", json::array()}});
    CHECK(s3 == 409);
    CHECK(stale["error"] == "stale_generation");
    auto [s4, hov] = get("/api/hover/doc1?offset=8");
    CHECK(s4 == 200);
    CHECK(hov["origin"] == "local");
    auto [s5, templ] = get("/api/templates?prefix=atom_len");
    CHECK(templ["templates"] == json::array({"atom_length(+Atom, -Length)"}));
    CHECK(get("/api/hover/nodoc?offset=0").first == 404);
  }
  SUBCASE("index page") {
    auto res = cli.Get("/");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->body.find("<html>") != std::string::npos);
  }
  server.stop();
  serving.join();
}
