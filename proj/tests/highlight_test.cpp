#include <doctest.h>

#include <string>
#include <thread>
#include <vector>

#include "plweb/engine.hpp"
#include "plweb/highlight.hpp"
#include "plweb/reader.hpp"

using namespace plweb;

namespace {

/// Class of the first token whose text equals text.
std::string class_of(const std::string& program, const std::string& text, size_t nth = 0) {
  for (const auto& group : enrich(program)) {
    for (const EnrichedToken& t : group) {
      if (t.base.text != text) continue;
      if (nth-- > 0) continue;
      return t.cls ? std::string(token_class_name(*t.cls)) : "none";
    }
  }
  return "missing";
}

std::set<std::string> names(const std::set<Indicator>& s) {
  std::set<std::string> out;
  for (const Indicator& pi : s) out.insert(pi.str());
  return out;
}

}  // namespace

TEST_CASE("xref") {
  XrefTable a = xref("a :- b. b.");
  CHECK(names({a.defined.count({"a", 0}) ? Indicator{"a", 0} : Indicator{"x", 9},
               a.defined.count({"b", 0}) ? Indicator{"b", 0} : Indicator{"x", 9}}) ==
        std::set<std::string>{"a/0", "b/0"});
  CHECK(names(a.called) == std::set<std::string>{"b/0"});
  CHECK(a.undefined().empty());

  CHECK(names(xref("a :- c.").undefined()) == std::set<std::string>{"c/0"});
  XrefTable f = xref("a :- findall(X, q(X), _).");
  CHECK(f.called.count({"q", 1}) == 1);
  CHECK(names(xref("a :- call(p, 1), maplist(r, [x]).").called) ==
        std::set<std::string>{"call/2", "maplist/2", "p/1", "r/1"});
  XrefTable d = xref(":- dynamic counter/1.\nget(X) :- counter(X).\n");
  CHECK(d.dynamic_decls.count({"counter", 1}) == 1);
  CHECK(d.undefined().empty());
  XrefTable lines = xref("p(1).\n\np(2).\n");
  CHECK(lines.defined.at({"p", 1}) == std::vector<size_t>{1, 3});
}

TEST_CASE("xref follows includes") {
  IncludeResolver inc = [](const std::string& name) -> std::optional<std::string> {
    if (name == "lists") return "my_len([], 0).\n";
    return std::nullopt;
  };
  XrefTable x = xref(":- include(lists).\nmain :- my_len([], N), write(N).\n", inc);
  CHECK(x.undefined().empty());
  CHECK(x.defined.at({"my_len", 2}) == std::vector<size_t>{1});
}

TEST_CASE("token classes") {
  CHECK(class_of("a :- undefined_thing.", "undefined_thing") == "goal_undefined");
  CHECK(class_of("foo(X) :- bar.", "X") == "singleton");
  CHECK(class_of("foo(X) :- bar(X).", "X") == "var_normal");
  CHECK(class_of("foo(_X) :- bar.", "_X") == "var_normal");
  CHECK(class_of("foo(X) :- bar.", "foo") == "head_defined");
  CHECK(class_of("t :- X is 1, X > 0.", "is") == "goal_built_in");
  CHECK(class_of("t :- append(X, Y, Z), u(X, Y, Z).\nu(_, _, _).", "append") == "goal_imported");
  CHECK(class_of("t :- u.\nu.", "u") == "goal_local");
  CHECK(class_of(":- dynamic c/1.\nt :- c(1).", "c", 1) == "goal_dynamic");
  CHECK(class_of(":- dynamic c/1.", "dynamic") == "directive");
  CHECK(class_of("t :- findall(X, q(X), L), write(L).", "q") == "goal_undefined");
  CHECK(class_of("t :- \\+ q.\nq.", "q") == "goal_local");
  CHECK(class_of("% c\nt.", "% c") == "none");
  CHECK(class_of("t :- foo(. u.", "foo") == "syntax_error");
}

TEST_CASE("grouping per term") {
  std::string text = "% header\na(1).\n/* b */\nb :- a(X), write(X).\n% tail\n";
  auto groups = enrich(text);
  REQUIRE(groups.size() == 3);
  CHECK(groups[0].front().base.text == "% header");
  CHECK(groups[1].front().base.text == "/* b */");
  CHECK(groups[2].size() == 1);
  CHECK(groups[2][0].base.text == "% tail");

  CHECK(enrich("a. b.").size() == 2);
  CHECK(enrich("").empty());

  std::vector<Token> flat;
  for (const auto& g : groups) {
    for (const auto& t : g) flat.push_back(t.base);
  }
  std::vector<Token> direct = tokenize(text);
  REQUIRE(flat.size() == direct.size());
  for (size_t i = 0; i < flat.size(); ++i) {
    CHECK(flat[i].text == direct[i].text);
    CHECK(flat[i].kind == direct[i].kind);
    CHECK(flat[i].span == direct[i].span);
  }
}

TEST_CASE("hover") {
  std::string text = "t :- X is 1, u(X). % note\nu(_).\n";
  auto is = hover(text, text.find("is"));
  REQUIRE(is.has_value());
  CHECK(is->origin == Origin::kBuiltin);
  CHECK(is->predicate.str() == "is/2");
  CHECK(is->templ == "-Number is +Expr");
  CHECK_FALSE(is->summary.empty());

  auto u = hover(text, text.find("u("));
  REQUIRE(u.has_value());
  CHECK(u->origin == Origin::kLocal);
  CHECK(u->line == 2);
  CHECK_FALSE(hover(text, text.find("note")).has_value());
  CHECK_FALSE(hover(text, text.find("X")).has_value());
}

TEST_CASE("templates") {
  CHECK(templates("atom_l") == std::vector<std::string>{"atom_length(+Atom, -Length)"});
  CHECK(templates("zzz").empty());
  CHECK(templates("").size() == doc_table().size());
  auto maplists = templates("maplist");
  CHECK(maplists.size() == 3);
  CHECK(maplists[0] == "maplist(:Goal, ?List)");
  for (const BuiltinInfo& b : builtin_table()) {
    INFO(std::string(b.name + "/" + std::to_string(b.arity)));
    CHECK(find_doc(b.name, b.arity) != nullptr);
  }
}

TEST_CASE("mirror updates") {
  MirrorRegistry reg;
  CHECK(reg.set_text("d1", "foo.") == 1);
  CHECK(reg.apply_changes("d1", 1, {{0, 3, "bar"}}) == 2);
  CHECK(reg.text("d1") == "bar.");
  try {
    reg.apply_changes("d1", 1, {{0, 0, "x"}});
    FAIL("expected stale_generation");
  } catch (const HighlightError& e) {
    CHECK(e.code_name() == "stale_generation");
  }
  try {
    reg.enriched_tokens("nope");
    FAIL("expected unknown_uuid");
  } catch (const HighlightError& e) {
    CHECK(e.code_name() == "unknown_uuid");
  }
  CHECK_THROWS_AS(reg.apply_changes("d1", 2, {{3, 9, ""}}), HighlightError);
  CHECK(reg.apply_changes("d1", 2, {{4, 4, "\nbaz :- bar."}, {0, 0, "% c\n"}}) == 3);
  CHECK(reg.text("d1") == "% c\nbar.\nbaz :- bar.");
  auto tokens = reg.enriched_tokens("d1");
  CHECK(tokens.generation == 3);
  CHECK(tokens.groups.size() == 2);
  CHECK(reg.set_text("d1", "x.") == 4);
}

TEST_CASE("mirror edits use code point offsets") {
  MirrorRegistry reg;
  reg.set_text("u", "a('\xc3\xa9').");
  reg.apply_changes("u", 1, {{4, 5, "x"}});
  CHECK(reg.text("u") == "a('\xc3\xa9x).");
}

TEST_CASE("mirrors accept concurrent updates") {
  MirrorRegistry reg;
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&reg, t] {
      std::string id = "doc" + std::to_string(t);
      for (int i = 0; i < 50; ++i) {
        reg.set_text(id, "p(" + std::to_string(i) + ").");
        reg.enriched_tokens(id);
      }
    });
  }
  for (auto& th : threads) th.join();
  CHECK(reg.size() == 4);
  CHECK(reg.generation("doc2") == 50);
}
