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

#include "plweb/reader.hpp"

#include <algorithm>
#include <charconv>
#include <map>

#include "char_class.hpp"

namespace plweb {

namespace {

class Parser {
 public:
  Parser(std::span<const Token> tokens, size_t pos, const OperatorTable& ops)
      : toks_(tokens), pos_(pos), ops_(ops) {
    skip_comments();
  }

  ParsedTerm read_clause() {
    if (pos_ >= toks_.size()) {
      throw SyntaxError(SyntaxError::Kind::kUnterminated, end_offset(), end_line(),
                        "unexpected end of file");
    }
    ParsedTerm out;
    out.first_token = pos_;
    out.line = toks_[pos_].line;
    size_t start = toks_[pos_].span.start;
    Result r = parse(1200);
    const Token* t = peek();
    if (t == nullptr) {
      throw SyntaxError(SyntaxError::Kind::kUnterminated, end_offset(), end_line(),
                        "missing full stop");
    }
    if (t->kind != TokenKind::kFullstop) error(*t, "operator expected");
    out.span = {start, t->span.end};
    out.end_token = pos_ + 1;
    advance();
    out.term = std::move(r.term);
    out.layout = std::move(r.layout);
    assign_lines(out.layout, out.first_token, out.end_token);
    for (const auto& name : var_order_) {
      const VarInfo& info = vars_.at(name);
      out.var_names.emplace_back(name, info.var);
      if (info.count == 1 && name[0] != '_') out.singletons.insert(name);
    }
    return out;
  }

  [[nodiscard]] size_t pos() const { return pos_; }
  [[nodiscard]] size_t failure_index() const { return failure_index_; }

 private:
  struct Result {
    Term term;
    TermLayout layout;
    int prec = 0;
  };
  struct VarInfo {
    Term var;
    int count = 0;
  };

  // Fills in layout lines from the tokens that start each subterm.
  void assign_lines(TermLayout& root, size_t first, size_t end) const {
    std::vector<TermLayout*> work{&root};
    while (!work.empty()) {
      TermLayout* l = work.back();
      work.pop_back();
      auto it = std::lower_bound(toks_.begin() + first, toks_.begin() + end, l->span.start,
                                 [](const Token& t, size_t start) { return t.span.start < start; });
      l->line = it != toks_.begin() + end ? it->line : toks_[first].line;
      for (TermLayout& a : l->args) work.push_back(&a);
    }
  }

  void skip_comments() {
    while (pos_ < toks_.size() && toks_[pos_].is_comment()) ++pos_;
  }
  const Token* peek() const { return pos_ < toks_.size() ? &toks_[pos_] : nullptr; }
  const Token* peek_next() const {
    size_t p = pos_ + 1;
    while (p < toks_.size() && toks_[p].is_comment()) ++p;
    return p < toks_.size() ? &toks_[p] : nullptr;
  }
  void advance() {
    ++pos_;
    skip_comments();
  }

  size_t end_offset() const { return toks_.empty() ? 0 : toks_.back().span.end; }
  size_t end_line() const { return toks_.empty() ? 1 : toks_.back().line; }

  [[noreturn]] void error(const Token& t, const std::string& message) {
    failure_index_ = static_cast<size_t>(&t - toks_.data());
    throw SyntaxError(SyntaxError::Kind::kSyntax, t.span.start, t.line, message);
  }

  const Token& need() {
    const Token* t = peek();
    if (t == nullptr) {
      failure_index_ = toks_.size();
      throw SyntaxError(SyntaxError::Kind::kUnterminated, end_offset(), end_line(),
                        "unexpected end of file");
    }
    return *t;
  }

  static bool is_term_end(const Token* t) {
    if (t == nullptr || t->kind == TokenKind::kFullstop) return true;
    if (t->kind != TokenKind::kPunct) return false;
    return t->text == ")" || t->text == "," || t->text == "|" || t->text == "]" ||
           t->text == "}";
  }

  Term variable(const std::string& name) {
    if (name == "_") return Term::Var(next_var_++, "_");
    auto it = vars_.find(name);
    if (it == vars_.end()) {
      it = vars_.emplace(name, VarInfo{Term::Var(next_var_++, name), 0}).first;
      var_order_.push_back(name);
    }
    ++it->second.count;
    return it->second.var;
  }

  Term number(const Token& t, bool negative) {
    std::string text = negative ? "-" + t.value : t.value;
    if (t.kind == TokenKind::kFloat) {
      double v = 0;
      auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || p != text.data() + text.size()) {
        error(t, "illegal number");
      }
      return Term::Float(v);
    }
    int64_t v = 0;
    auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc::result_out_of_range) error(t, "integer too large");
    if (ec != std::errc() || p != text.data() + text.size()) {
      error(t, "illegal number");
    }
    return Term::Int(v);
  }

  // In argument position (arg set) the comma and bar end the term, while
  // other operators above 999 are still accepted.
  Result parse(int max, bool arg = false) {
    Result left = parse_primary(max, arg);
    return parse_infix(std::move(left), max, arg);
  }

  Result parse_primary(int max, bool arg) {
    const Token& t = need();
    size_t index = pos_;
    switch (t.kind) {
      case TokenKind::kInteger:
      case TokenKind::kFloat: {
        advance();
        return {number(t, false), TermLayout{t.span, kNoToken, {}}, 0};
      }
      case TokenKind::kVar:
      case TokenKind::kAnonVar:
        advance();
        return {variable(t.value), TermLayout{t.span, kNoToken, {}}, 0};
      case TokenKind::kString:
        advance();
        return {Term::String(t.value), TermLayout{t.span, kNoToken, {}}, 0};
      case TokenKind::kPunct:
        return parse_punct(t);
      case TokenKind::kFullstop:
        error(t, "unexpected end of clause");
      case TokenKind::kError:
        error(t, "illegal token");
      case TokenKind::kCommentLine:
      case TokenKind::kCommentBlock:
        error(t, "unexpected comment");
      case TokenKind::kFunctor: {
        advance();
        return parse_compound(t, index);
      }
      case TokenKind::kAtom:
      case TokenKind::kQuotedAtom:
      case TokenKind::kOperator:
        break;
    }

    const Token* next = peek_next();
    if (t.kind == TokenKind::kOperator && t.value == "-" && next != nullptr &&
        (next->kind == TokenKind::kInteger || next->kind == TokenKind::kFloat) &&
        next->span.start == t.span.end) {
      advance();
      advance();
      return {number(*next, true), TermLayout{{t.span.start, next->span.end}, kNoToken, {}},
              0};
    }

    if (t.kind != TokenKind::kQuotedAtom) {
      if (auto def = ops_.prefix(t.value)) {
        bool as_atom = is_term_end(next);
        if (!as_atom && next->is_name() && next->kind != TokenKind::kFunctor &&
            !ops_.prefix(next->value) &&
            (ops_.infix(next->value) || ops_.postfix(next->value))) {
          as_atom = true;
        }
        if (!as_atom) {
          int p = std::min(def->priority, max);
          int arg_max = def->type == OpType::kFy ? p : p - 1;
          advance();
          Result operand = parse(arg_max, arg);
          TermLayout layout{{t.span.start, operand.layout.span.end}, index, {}};
          layout.args.push_back(std::move(operand.layout));
          return {Term::Compound(t.value, {std::move(operand.term)}), std::move(layout),
                  p};
        }
      }
    }
    advance();
    return {Term::Atom(t.value), TermLayout{t.span, index, {}}, 0};
  }

  Result parse_punct(const Token& t) {
    size_t index = pos_;
    if (t.text == "(") {
      advance();
      Result inner = parse(1200);
      const Token& close = need();
      if (!close.is_punct(")")) error(close, "expected \")\"");
      advance();
      inner.layout.span = {t.span.start, close.span.end};
      inner.prec = 0;
      return inner;
    }
    if (t.text == "[") {
      advance();
      const Token& n = need();
      if (n.is_punct("]")) {
        advance();
        return {Term::Nil(), TermLayout{{t.span.start, n.span.end}, index, {}}, 0};
      }
      return parse_list(t);
    }
    if (t.text == "{") error(t, "curly-brace terms are not supported");
    error(t, "unexpected \"" + t.text + "\"");
  }

  Result parse_list(const Token& open) {
    std::vector<Result> items;
    for (;;) {
      items.push_back(parse(999, true));
      const Token& sep = need();
      if (sep.is_punct(",")) {
        advance();
        continue;
      }
      break;
    }
    Result tail{Term::Nil(), {}, 0};
    bool explicit_tail = false;
    const Token& t = need();
    if (t.is_punct("|")) {
      advance();
      tail = parse(999, true);
      explicit_tail = true;
    }
    const Token& close = need();
    if (!close.is_punct("]")) error(close, "expected \"]\"");
    advance();
    if (!explicit_tail) tail.layout = TermLayout{{close.span.start, close.span.end}, kNoToken, {}};
    Term list = std::move(tail.term);
    TermLayout layout = std::move(tail.layout);
    for (auto it = items.rbegin(); it != items.rend(); ++it) {
      TermLayout cell{{it->layout.span.start, close.span.end}, kNoToken, {}};
      cell.args.push_back(std::move(it->layout));
      cell.args.push_back(std::move(layout));
      layout = std::move(cell);
      list = Term::Compound(".", {std::move(it->term), std::move(list)});
    }
    layout.span.start = open.span.start;
    return {std::move(list), std::move(layout), 0};
  }

  Result parse_compound(const Token& name, size_t index) {
    // The tokenizer guarantees "(" follows.
    advance();
    std::vector<Term> args;
    TermLayout layout{{name.span.start, name.span.end}, index, {}};
    for (;;) {
      Result a = parse(999, true);
      args.push_back(std::move(a.term));
      layout.args.push_back(std::move(a.layout));
      const Token& sep = need();
      if (sep.is_punct(",")) {
        advance();
        continue;
      }
      if (sep.is_punct(")")) {
        layout.span.end = sep.span.end;
        advance();
        break;
      }
      error(sep, "expected \",\" or \")\"");
    }
    return {Term::Compound(name.value, std::move(args)), std::move(layout), 0};
  }

  Result parse_infix(Result left, int max, bool arg) {
    for (;;) {
      const Token* t = peek();
      if (t == nullptr) return left;
      std::string name;
      if (t->is_name()) {
        name = t->value;
      } else if (t->is_punct(",") && !arg) {
        name = ",";
      } else if (t->is_punct("|") && !arg) {
        name = "|";
      } else {
        return left;
      }
      size_t index = pos_;
      std::optional<OpDef> infix;
      if (name == "|") {
        infix = OpDef{1100, OpType::kXfy};
      } else if (name == ",") {
        infix = OpDef{1000, OpType::kXfy};
      } else {
        infix = ops_.infix(name);
      }
      int limit = arg && max >= 999 ? 1200 : max;
      if (infix && infix->priority <= limit && left.prec <= infix->left_max()) {
        advance();
        Result right = parse(infix->right_max(), arg);
        std::string functor = name == "|" ? ";" : name;
        TermLayout layout{{left.layout.span.start, right.layout.span.end}, index, {}};
        layout.args.push_back(std::move(left.layout));
        layout.args.push_back(std::move(right.layout));
        left = {Term::Compound(functor, {std::move(left.term), std::move(right.term)}),
                std::move(layout), infix->priority};
        continue;
      }
      std::optional<OpDef> postfix = name == "," || name == "|" ? std::nullopt
                                                                 : ops_.postfix(name);
      if (postfix && postfix->priority <= limit && left.prec <= postfix->left_max()) {
        advance();
        TermLayout layout{{left.layout.span.start, t->span.end}, index, {}};
        layout.args.push_back(std::move(left.layout));
        left = {Term::Compound(name, {std::move(left.term)}), std::move(layout),
                postfix->priority};
        continue;
      }
      return left;
    }
  }

  std::span<const Token> toks_;
  size_t pos_;
  const OperatorTable& ops_;
  std::map<std::string, VarInfo> vars_;
  std::vector<std::string> var_order_;
  int64_t next_var_ = 0;
  size_t failure_index_ = 0;
};

std::string trim(std::string_view s) {
  size_t b = 0;
  size_t e = s.size();
  while (b < e && chars::is_layout(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && chars::is_layout(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

ParsedTerm read_term(std::span<const Token> tokens, size_t& pos,
                     const OperatorTable& ops) {
  Parser parser(tokens, pos, ops);
  try {
    ParsedTerm t = parser.read_clause();
    pos = parser.pos();
    return t;
  } catch (const SyntaxError&) {
    pos = parser.failure_index();
    throw;
  }
}

ParsedTerm read_term_from_string(std::string_view text, const OperatorTable& ops,
                                 bool allow_missing_stop) {
  std::vector<Token> tokens = tokenize(text);
  bool has_stop = false;
  for (const Token& t : tokens) {
    if (t.kind == TokenKind::kFullstop) has_stop = true;
  }
  if (!has_stop && allow_missing_stop) {
    Token stop;
    stop.kind = TokenKind::kFullstop;
    stop.text = ".";
    stop.value = ".";
    size_t end = tokens.empty() ? 0 : tokens.back().span.end;
    stop.span = {end, end};
    stop.line = tokens.empty() ? 1 : tokens.back().line;
    tokens.push_back(stop);
  }
  size_t pos = 0;
  ParsedTerm t = read_term(tokens, pos, ops);
  while (pos < tokens.size() && tokens[pos].is_comment()) ++pos;
  if (pos < tokens.size()) {
    throw SyntaxError(SyntaxError::Kind::kSyntax, tokens[pos].span.start,
                      tokens[pos].line, "end of input expected");
  }
  return t;
}

bool apply_op_directive(const Term& op_term, OperatorTable& ops) {
  if (!op_term.is_compound("op", 3)) return false;
  const Term& p = op_term.arg(0);
  const Term& type = op_term.arg(1);
  const Term& names = op_term.arg(2);
  if (!p.is_int() || p.int_value() < 1 || p.int_value() > 1200) return false;
  if (!type.is_atom()) return false;
  auto t = parse_op_type(type.name());
  if (!t) return false;
  std::vector<Term> list;
  if (names.is_atom() && !names.is_nil()) {
    list.push_back(names);
  } else if (auto items = names.list_items()) {
    list = std::move(*items);
  } else {
    return false;
  }
  for (const Term& n : list) {
    if (!n.is_atom()) return false;
  }
  OperatorTable copy = ops;
  for (const Term& n : list) {
    if (!copy.add(static_cast<int>(p.int_value()), *t, n.name())) return false;
  }
  ops = std::move(copy);
  return true;
}

ProgramParse parse_program(std::string_view text, const OperatorTable& ops) {
  ProgramParse out;
  out.ops = ops;
  out.tokens = tokenize(text);
  const auto& toks = out.tokens;
  size_t pos = 0;
  for (;;) {
    while (pos < toks.size() && toks[pos].is_comment()) ++pos;
    if (pos >= toks.size()) break;
    size_t start = pos;
    try {
      ParsedTerm t = read_term(toks, pos, out.ops);
      if (t.is_directive()) apply_op_directive(t.term.arg(0), out.ops);
      out.terms.push_back(std::move(t));
    } catch (const SyntaxError& e) {
      out.errors.push_back(e);
      if (e.kind() == SyntaxError::Kind::kUnterminated) {
        out.error_ranges.emplace_back(start, toks.size());
        break;
      }
      size_t p = std::max(pos, start);
      while (p < toks.size() && toks[p].kind != TokenKind::kFullstop) ++p;
      if (p >= toks.size()) {
        out.error_ranges.emplace_back(start, toks.size());
        break;
      }
      pos = p + 1;
      out.error_ranges.emplace_back(start, pos);
    }
  }
  return out;
}

std::vector<std::string> extract_examples(std::string_view text) {
  std::vector<std::string> out;
  for (const Token& block : tokenize(text)) {
    if (block.kind != TokenKind::kCommentBlock) continue;
    std::string_view body(block.text);
    body.remove_prefix(2);
    body.remove_suffix(2);
    while (!body.empty() && body.front() == '*') body.remove_prefix(1);
    while (!body.empty() && chars::is_layout(static_cast<unsigned char>(body.front()))) {
      body.remove_prefix(1);
    }
    constexpr std::string_view kMarker = "<examples>";
    if (body.substr(0, kMarker.size()) != kMarker) continue;
    body.remove_prefix(kMarker.size());
    SourceText src(body);
    std::vector<Token> toks = tokenize(body);
    for (size_t i = 0; i < toks.size(); ++i) {
      const Token& t = toks[i];
      if (!(t.is_name() && t.value == "?-")) continue;
      size_t j = i + 1;
      while (j < toks.size() && toks[j].kind != TokenKind::kFullstop) ++j;
      if (j >= toks.size()) break;
      std::string query = trim(src.slice(t.span.end, toks[j].span.start));
      if (!query.empty()) out.push_back(std::move(query));
      i = j;
    }
  }
  return out;
}

}  // namespace plweb
