#include <random>

#include "char_class.hpp"
#include "doctest.h"
#include "plweb/reader.hpp"
#include "plweb/writer.hpp"

using namespace plweb;

namespace {

std::vector<std::pair<TokenKind, std::string>> kinds(std::string_view text) {
  std::vector<std::pair<TokenKind, std::string>> out;
  for (const Token& t : tokenize(text)) out.emplace_back(t.kind, t.text);
  return out;
}

Term read(std::string_view text) {
  return read_term_from_string(text, OperatorTable::Default()).term;
}

}  // namespace

TEST_CASE("tokenize clause with trailing comment") {
  auto k = kinds("foo(X). % c");
  std::vector<std::pair<TokenKind, std::string>> want = {
      {TokenKind::kFunctor, "foo"},   {TokenKind::kPunct, "("},
      {TokenKind::kVar, "X"},         {TokenKind::kPunct, ")"},
      {TokenKind::kFullstop, "."},    {TokenKind::kCommentLine, "% c"}};
  CHECK(k == want);
}

TEST_CASE("tokenize quoted atoms, pairs and errors") {
  auto toks = tokenize("'it''s'");
  REQUIRE(toks.size() == 1);
  CHECK(toks[0].kind == TokenKind::kQuotedAtom);
  CHECK(toks[0].value == "it's");

  auto k = kinds("X-Y");
  REQUIRE(k.size() == 3);
  CHECK(k[0].first == TokenKind::kVar);
  CHECK(k[1] == std::pair{TokenKind::kOperator, std::string("-")});
  CHECK(k[2].first == TokenKind::kVar);

  auto err = tokenize("a /* open");
  CHECK(err.back().kind == TokenKind::kError);
  CHECK(err.back().text == "/* open");
  CHECK(tokenize("a # b")[1].kind == TokenKind::kOperator);
  CHECK(tokenize("a \x01 b")[1].kind == TokenKind::kError);
}

TEST_CASE("token spans cover the input") {
  std::string text = "p(X, 'a b', \"s\", 0'c, 1.5e3) :-\n  X = [1|T], % x\n  /* y */ q.";
  auto toks = tokenize(text);
  SourceText src(text);
  size_t pos = 0;
  for (const Token& t : toks) {
    CHECK(t.span.start >= pos);
    for (size_t i = pos; i < t.span.start; ++i) CHECK(chars::is_layout(src.at(i)));
    CHECK(src.slice(t.span.start, t.span.end) == t.text);
    pos = t.span.end;
  }
  CHECK(pos == src.size());
}

TEST_CASE("operator precedence") {
  CHECK(read("1+2*3.") == Term::Compound("+", {Term::Int(1),
                                               Term::Compound("*", {Term::Int(2), Term::Int(3)})}));
  CHECK(writeq(read("1-2-3.")) == "1-2-3");
  CHECK(writeq(read("1-(2-3).")) == "1-(2-3)");
  CHECK(writeq(read("a:-b,c;d->e.")) == "a:-b,c;d->e");
  CHECK(writeq(read("- 1.")) == "-(1)");
  CHECK(read("-1.") == Term::Int(-1));
  CHECK(read("- a.") == Term::Compound("-", {Term::Atom("a")}));
  CHECK(read("\\+ \\+ a.") ==
        Term::Compound("\\+", {Term::Compound("\\+", {Term::Atom("a")})}));
  CHECK(read("X = - .").arg(1) == Term::Atom("-"));
  CHECK(read("f(a;b).").arg(0).is_compound(";", 2));
  CHECK(read("(a|b).").is_compound(";", 2));
  CHECK(read("f(:- a).").arg(0).is_compound(":-", 1));
  CHECK(read("f(a:-b, c).").arity() == 2);
  CHECK(read("[a;b, c|d].").arg(0).is_compound(";", 2));
  CHECK_THROWS_AS(read("a :- b :- c."), SyntaxError);
  CHECK_THROWS_AS(read("{a}."), SyntaxError);
  CHECK_THROWS_AS(read("99999999999999999999."), SyntaxError);
}

TEST_CASE("variables and singletons") {
  auto p = read_term_from_string("foo(X,Y,X).", OperatorTable::Default());
  CHECK(p.singletons == std::set<std::string>{"Y"});
  REQUIRE(p.var_names.size() == 2);
  CHECK(p.var_names[0].first == "X");
  CHECK(p.var_names[1].first == "Y");
  auto q = read_term_from_string("foo(_A, _, _).", OperatorTable::Default());
  CHECK(q.singletons.empty());
  CHECK(q.var_names.size() == 1);
}

TEST_CASE("lists") {
  Term t = read("append([one], [two,three], List).");
  CHECK(t.is_compound("append", 3));
  CHECK(t.arg(0) == Term::List({Term::Atom("one")}));
  CHECK(t.arg(1) == Term::List({Term::Atom("two"), Term::Atom("three")}));
  CHECK(writeq(read("[a,b|T].")) == "[a,b|T]");
  CHECK(read("[].").is_nil());
}

TEST_CASE("missing full stop") {
  std::vector<Token> toks = tokenize("foo(a)");
  size_t pos = 0;
  try {
    read_term(toks, pos, OperatorTable::Default());
    FAIL("expected error");
  } catch (const SyntaxError& e) {
    CHECK(e.kind() == SyntaxError::Kind::kUnterminated);
  }
  CHECK(read_term_from_string("foo(a)", OperatorTable::Default(), true).term.is_compound("foo", 1));
}

TEST_CASE("parse_program recovers at full stops") {
  auto two = parse_program("a.\nb :- a.\n", OperatorTable::Default());
  CHECK(two.terms.size() == 2);
  CHECK(two.errors.empty());

  auto bad = parse_program("foo(. bar.", OperatorTable::Default());
  CHECK(bad.errors.size() == 1);
  REQUIRE(bad.terms.size() == 1);
  CHECK(bad.terms[0].term == Term::Atom("bar"));

  auto empty = parse_program("", OperatorTable::Default());
  CHECK(empty.terms.empty());
  CHECK(empty.errors.empty());
}

TEST_CASE("op directives extend the table for later terms") {
  auto p = parse_program(":- op(700, xfx, ===).\nx(A, B) :- A === B.\n",
                         OperatorTable::Default());
  CHECK(p.errors.empty());
  REQUIRE(p.terms.size() == 2);
  CHECK(p.terms[1].term.arg(1).is_compound("===", 2));
  CHECK(p.ops.infix("==="));
  OperatorTable ops = OperatorTable::Default();
  CHECK_FALSE(apply_op_directive(read("op(1201, xfx, foo)."), ops));
  CHECK_FALSE(apply_op_directive(read("op(700, abc, foo)."), ops));
  CHECK_FALSE(apply_op_directive(read("op(700, xfx, m:foo)."), ops));
  CHECK(apply_op_directive(read("op(200, xfy, [aa, bb])."), ops));
  CHECK(ops.infix("bb"));
}

TEST_CASE("extract examples") {
  std::string src = "/** <examples>\n\n?- append([one], [two,three], List).\n*/\n";
  CHECK(extract_examples(src) == std::vector<std::string>{"append([one], [two,three], List)"});
  std::string two = "p.\n/** <examples>\n?- a(1).\n?-b(2) .\n?- write('a.b').\n*/";
  CHECK(extract_examples(two) == std::vector<std::string>{"a(1)", "b(2)", "write('a.b')"});
  CHECK(extract_examples("/* <examples> ?- a. */").size() == 1);
  CHECK(extract_examples("/** examples ?- a. */").empty());
  CHECK(extract_examples("/** <examples> ?- a */").empty());
  CHECK(extract_examples("% ?- a.\n").empty());
}

TEST_CASE("writeq quoting and floats") {
  OperatorTable ops = OperatorTable::Default();
  CHECK(writeq(Term::Compound("foo", {Term::Atom("A b")})) == "foo('A b')");
  CHECK(writeq(Term::Atom("[]")) == "[]");
  CHECK(writeq(Term::Atom(",")) == "','");
  CHECK(writeq(Term::Atom("it's")) == "'it\\'s'");
  CHECK(writeq(Term::String("a\"b")) == "\"a\\\"b\"");
  CHECK(writeq(Term::Float(1.0)) == "1.0");
  CHECK(writeq(Term::Float(1e20)) == "1.0e20");
  CHECK(writeq(Term::Float(0.1)) == "0.1");
  CHECK(writeq(read("X is 1 mod 2.")) == "X is 1 mod 2");
  CHECK(writeq(read("1 - -1.")) == "1- -1");
  CHECK(writeq(read("- (1^2).")) == "- 1^2");
  CHECK(writeq(read("\\+ (a,b).")) == "\\+ (a,b)");
  CHECK(writeq(read("f((a,b)).")) == "f((a,b))");
  CHECK(writeq(read("(-) = a.")) == "(-)=a");
  CHECK(write_plain(Term::Compound("f", {Term::Atom("A b"), Term::String("s")})) == "f(A b,s)");
}

namespace {

Term random_term(std::mt19937& rng, int depth, int& var_counter) {
  static const char* kAtoms[] = {"a", "foo", "[]", "A", "it's", "+", "-", ",", "|", "mod",
                                 "\\+", ":-", "", "hello world", "=..", ";", "!", "*"};
  static const char* kFunctors[] = {"f", "g", "+", "-", "*", "^", ":-", ",", ";", "->",
                                    "=", "is", "\\+", ".", "mod", "'q", "[]", "{}", "~"};
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 4 : 8);
  switch (pick(rng)) {
    case 0: return Term::Atom(kAtoms[rng() % std::size(kAtoms)]);
    case 1: return Term::Int(static_cast<int64_t>(rng() % 200) - 100);
    case 2: return Term::Float((static_cast<int>(rng() % 2000) - 1000) / 8.0);
    case 3: {
      int id = var_counter++;
      return Term::Var(id, "V" + std::to_string(id));
    }
    case 4: return Term::String(rng() % 2 ? "str" : "q\"x\n");
    case 5:
    case 6: {
      std::vector<Term> items;
      size_t n = 1 + rng() % 3;
      for (size_t i = 0; i < n; ++i) items.push_back(random_term(rng, depth - 1, var_counter));
      Term tail = rng() % 3 == 0 ? random_term(rng, 0, var_counter) : Term::Nil();
      return Term::List(items, tail);
    }
    default: {
      const char* f = kFunctors[rng() % std::size(kFunctors)];
      size_t n = 1 + rng() % 2;
      if (std::string_view(f) == ".") n = 3;
      std::vector<Term> args;
      for (size_t i = 0; i < n; ++i) args.push_back(random_term(rng, depth - 1, var_counter));
      return Term::Compound(f, args);
    }
  }
}

}  // namespace

TEST_CASE("writeq round trip on random terms") {
  std::mt19937 rng(12345);
  for (int i = 0; i < 3000; ++i) {
    int vars = 0;
    Term t = random_term(rng, 4, vars);
    std::string text = writeq(t);
    INFO(text);
    WriteOptions canonical;
    canonical.quoted = true;
    canonical.ignore_ops = true;
    INFO(format_term(t, canonical));
    Term back;
    try {
      back = read_term_from_string(text + " .", OperatorTable::Default()).term;
    } catch (const SyntaxError& e) {
      FAIL_CHECK(std::string(e.what()));
      continue;
    }
    CHECK(is_variant(t, back));
  }
}
