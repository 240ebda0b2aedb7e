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

#include "plweb/highlight.hpp"

#include <algorithm>

#include "plweb/engine.hpp"
#include "plweb/reader.hpp"
#include "plweb/sandbox.hpp"

namespace plweb {

std::string_view token_class_name(TokenClass cls) {
  switch (cls) {
    case TokenClass::kGoalBuiltIn: return "goal_built_in";
    case TokenClass::kGoalImported: return "goal_imported";
    case TokenClass::kGoalLocal: return "goal_local";
    case TokenClass::kGoalDynamic: return "goal_dynamic";
    case TokenClass::kGoalUndefined: return "goal_undefined";
    case TokenClass::kHeadDefined: return "head_defined";
    case TokenClass::kSingleton: return "singleton";
    case TokenClass::kVarNormal: return "var_normal";
    case TokenClass::kDirective: return "directive";
    case TokenClass::kSyntaxError: return "syntax_error";
  }
  return "var_normal";
}

std::string_view HighlightError::code_name() const {
  switch (code_) {
    case Code::kStaleGeneration: return "stale_generation";
    case Code::kUnknownUuid: return "unknown_uuid";
    case Code::kBadChange: return "bad_change";
  }
  return "bad_change";
}

namespace {

bool is_library(const Indicator& pi) {
  const PredicateDoc* d = find_doc(pi.name, pi.arity);
  return d != nullptr && d->origin == Origin::kLibrary;
}

bool is_control(const Term& t) {
  return t.is_compound(",", 2) || t.is_compound(";", 2) || t.is_compound("->", 2) ||
         t.is_compound("\\+", 1);
}

bool is_known_directive(const Term& d) {
  if (!d.is_callable()) return false;
  static const std::vector<std::pair<std::string, size_t>> names = {
      {"dynamic", 1},       {"discontiguous", 1}, {"op", 3},
      {"include", 1},       {"use_rendering", 1}, {"use_rendering", 2},
      {"initialization", 1}, {"initialization", 2}};
  return std::any_of(names.begin(), names.end(), [&d](const auto& n) {
    return d.name() == n.first && d.arity() == n.second;
  });
}

const TermLayout* child(const TermLayout* lay, size_t i) {
  if (lay == nullptr || i >= lay->args.size()) return nullptr;
  return &lay->args[i];
}

/// Calls visit(indicator, functor token) for every goal in body, through
/// control constructs and the goal arguments of meta-predicates.
template <typename Visit>
void walk_goals(const Term& t, const TermLayout* lay, int extra, Visit& visit) {
  if (t.is_var() || !t.is_callable()) return;
  if (extra == 0 && is_control(t)) {
    for (size_t i = 0; i < t.arity(); ++i) walk_goals(t.arg(i), child(lay, i), 0, visit);
    return;
  }
  if (t.is_compound(":", 2)) return;
  Indicator pi{t.name(), t.arity() + static_cast<size_t>(extra)};
  visit(pi, lay != nullptr ? lay->functor_token : kNoToken);
  if (extra != 0) return;
  if (const WhitelistEntry* e = find_whitelisted(pi.name, pi.arity)) {
    for (size_t i = 0; i < e->meta.size() && i < t.arity(); ++i) {
      if (e->meta[i] >= 0) walk_goals(t.arg(i), child(lay, i), e->meta[i], visit);
    }
  }
}

void dynamic_specs(const Term& specs, std::set<Indicator>& out) {
  std::vector<Term> items;
  if (specs.is_list_cell()) {
    Term cur = specs;
    while (cur.is_list_cell()) {
      items.push_back(cur.arg(0));
      cur = cur.arg(1);
    }
  } else {
    items = conjuncts(specs);
  }
  for (const Term& s : items) {
    if (s.is_compound("/", 2) && s.arg(0).is_atom() && s.arg(1).is_int() &&
        s.arg(1).int_value() >= 0) {
      out.insert({s.arg(0).name(), static_cast<size_t>(s.arg(1).int_value())});
    }
  }
}

class XrefBuilder {
 public:
  explicit XrefBuilder(const IncludeResolver& include) : include_(include) {}

  void program(const ProgramParse& parsed, std::optional<size_t> line_override) {
    for (const ParsedTerm& pt : parsed.terms) term(pt, line_override);
  }

  XrefTable take() { return std::move(table_); }

 private:
  void term(const ParsedTerm& pt, std::optional<size_t> line_override) {
    size_t line = line_override.value_or(pt.line);
    auto called = [this](const Indicator& pi, size_t) { table_.called.insert(pi); };
    if (pt.is_directive()) {
      const Term& d = pt.term.arg(0);
      const TermLayout* lay = child(&pt.layout, 0);
      if (d.is_compound("dynamic", 1)) {
        dynamic_specs(d.arg(0), table_.dynamic_decls);
      } else if (d.is_compound("include", 1) && d.arg(0).is_atom()) {
        include(d.arg(0).name(), line);
      } else if (d.is_compound("initialization", 1) || d.is_compound("initialization", 2)) {
        walk_goals(d.arg(0), child(lay, 0), 0, called);
      } else if (!is_known_directive(d)) {
        walk_goals(d, lay, 0, called);
      }
      return;
    }
    const Term& t = pt.term;
    bool rule = t.is_compound(":-", 2);
    const Term& head = rule ? t.arg(0) : t;
    if (head.is_callable() && !head.is_compound(":", 2)) {
      table_.defined[{head.name(), head.arity()}].push_back(line);
    }
    if (rule) walk_goals(t.arg(1), child(&pt.layout, 1), 0, called);
  }

  void include(const std::string& name, size_t line) {
    if (!include_ || std::find(stack_.begin(), stack_.end(), name) != stack_.end()) return;
    std::optional<std::string> text = include_(name);
    if (!text) return;
    stack_.push_back(name);
    program(parse_program(*text, OperatorTable::Default()), line);
    stack_.pop_back();
  }

  const IncludeResolver& include_;
  std::vector<std::string> stack_;
  XrefTable table_;
};

struct GoalClass {
  TokenClass cls;
  std::optional<Origin> origin;
};

GoalClass classify_goal(const XrefTable& x, const Indicator& pi) {
  if (is_builtin(pi.name, pi.arity)) return {TokenClass::kGoalBuiltIn, Origin::kBuiltin};
  bool dynamic = x.dynamic_decls.count(pi) > 0;
  if (x.defined.count(pi) > 0) {
    return {dynamic ? TokenClass::kGoalDynamic : TokenClass::kGoalLocal, Origin::kLocal};
  }
  if (dynamic) return {TokenClass::kGoalDynamic, Origin::kLocal};
  if (is_library(pi)) return {TokenClass::kGoalImported, Origin::kLibrary};
  return {TokenClass::kGoalUndefined, std::nullopt};
}

/// Classes for every token of a program.
struct Analysis {
  ProgramParse parsed;
  XrefTable xref;
  std::vector<EnrichedToken> tokens;
  /// The predicate named by each goal or head token.
  std::vector<std::optional<Indicator>> predicate;
};

Analysis analyze(std::string_view text, const IncludeResolver& include) {
  Analysis a;
  a.parsed = parse_program(text, OperatorTable::Default());
  XrefBuilder builder(include);
  builder.program(a.parsed, std::nullopt);
  a.xref = builder.take();
  const std::vector<Token>& toks = a.parsed.tokens;
  a.tokens.reserve(toks.size());
  for (const Token& t : toks) a.tokens.push_back({t, std::nullopt, std::nullopt});
  a.predicate.resize(toks.size());

  auto mark = [&a](size_t tok, TokenClass cls, std::optional<Origin> origin,
                   const Indicator& pi) {
    if (tok == kNoToken || tok >= a.tokens.size() || !a.tokens[tok].base.is_name()) return;
    a.tokens[tok].cls = cls;
    a.tokens[tok].origin = origin;
    a.predicate[tok] = pi;
  };
  auto goal = [&](const Indicator& pi, size_t tok) {
    GoalClass g = classify_goal(a.xref, pi);
    mark(tok, g.cls, g.origin, pi);
  };

  for (const ParsedTerm& pt : a.parsed.terms) {
    for (size_t i = pt.first_token; i < pt.end_token && i < toks.size(); ++i) {
      if (toks[i].kind != TokenKind::kVar) continue;
      a.tokens[i].cls =
          pt.singletons.count(toks[i].value) ? TokenClass::kSingleton : TokenClass::kVarNormal;
    }
    if (pt.is_directive()) {
      const Term& d = pt.term.arg(0);
      const TermLayout* lay = child(&pt.layout, 0);
      if (is_known_directive(d)) {
        if (lay != nullptr && lay->functor_token < a.tokens.size()) {
          a.tokens[lay->functor_token].cls = TokenClass::kDirective;
          a.tokens[lay->functor_token].origin = Origin::kBuiltin;
        }
        if (d.name() == "initialization") walk_goals(d.arg(0), child(lay, 0), 0, goal);
      } else {
        walk_goals(d, lay, 0, goal);
      }
      continue;
    }
    const Term& t = pt.term;
    bool rule = t.is_compound(":-", 2);
    const Term& head = rule ? t.arg(0) : t;
    const TermLayout* head_lay = rule ? child(&pt.layout, 0) : &pt.layout;
    if (head.is_callable() && !head.is_compound(":", 2) && head_lay != nullptr) {
      mark(head_lay->functor_token, TokenClass::kHeadDefined, Origin::kLocal,
           {head.name(), head.arity()});
    }
    if (rule) walk_goals(t.arg(1), child(&pt.layout, 1), 0, goal);
  }
  for (const auto& [from, to] : a.parsed.error_ranges) {
    for (size_t i = from; i < to && i < a.tokens.size(); ++i) {
      if (!toks[i].is_comment()) a.tokens[i].cls = TokenClass::kSyntaxError;
    }
  }
  return a;
}

}  // namespace

std::set<Indicator> XrefTable::undefined() const {
  std::set<Indicator> out;
  for (const Indicator& pi : called) {
    if (defined.count(pi) || dynamic_decls.count(pi) || is_builtin(pi.name, pi.arity) ||
        is_library(pi)) {
      continue;
    }
    out.insert(pi);
  }
  return out;
}

XrefTable xref(std::string_view text, const IncludeResolver& include) {
  XrefBuilder builder(include);
  builder.program(parse_program(text, OperatorTable::Default()), std::nullopt);
  return builder.take();
}

std::vector<std::vector<EnrichedToken>> enrich(std::string_view text,
                                               const IncludeResolver& include) {
  Analysis a = analyze(text, include);
  std::vector<size_t> ends;
  for (const ParsedTerm& pt : a.parsed.terms) ends.push_back(pt.end_token);
  for (const auto& r : a.parsed.error_ranges) ends.push_back(r.second);
  std::sort(ends.begin(), ends.end());
  std::vector<std::vector<EnrichedToken>> groups;
  size_t start = 0;
  for (size_t end : ends) {
    end = std::min(end, a.tokens.size());
    if (end <= start) continue;
    groups.emplace_back(a.tokens.begin() + static_cast<std::ptrdiff_t>(start),
                        a.tokens.begin() + static_cast<std::ptrdiff_t>(end));
    start = end;
  }
  if (start < a.tokens.size()) {
    groups.emplace_back(a.tokens.begin() + static_cast<std::ptrdiff_t>(start), a.tokens.end());
  }
  return groups;
}

std::optional<HoverInfo> hover(std::string_view text, size_t offset,
                               const IncludeResolver& include) {
  Analysis a = analyze(text, include);
  for (size_t i = 0; i < a.tokens.size(); ++i) {
    const Span& s = a.tokens[i].base.span;
    if (offset < s.start || offset >= s.end) continue;
    if (!a.predicate[i] || !a.tokens[i].origin) return std::nullopt;
    const Indicator& pi = *a.predicate[i];
    HoverInfo info;
    info.origin = *a.tokens[i].origin;
    info.predicate = pi;
    if (info.origin == Origin::kLocal) {
      auto it = a.xref.defined.find(pi);
      if (it != a.xref.defined.end() && !it->second.empty()) {
        info.line = it->second.front();
        info.summary = "Local predicate " + pi.str() + ", defined at line " +
                       std::to_string(*info.line);
      } else {
        info.summary = "Dynamic predicate " + pi.str();
      }
      return info;
    }
    if (const PredicateDoc* d = find_doc(pi.name, pi.arity)) {
      info.templ = d->templ;
      info.summary = d->summary;
    }
    return info;
  }
  return std::nullopt;
}

std::shared_ptr<MirrorRegistry::Mirror> MirrorRegistry::find(const std::string& uuid) const {
  std::shared_lock lock(mu_);
  auto it = mirrors_.find(uuid);
  if (it == mirrors_.end()) {
    throw HighlightError(HighlightError::Code::kUnknownUuid, "unknown document " + uuid);
  }
  return it->second;
}

uint64_t MirrorRegistry::set_text(const std::string& uuid, std::string text) {
  std::shared_ptr<Mirror> m;
  {
    std::unique_lock lock(mu_);
    auto& slot = mirrors_[uuid];
    if (!slot) slot = std::make_shared<Mirror>();
    m = slot;
  }
  std::lock_guard doc(m->mu);
  m->text = std::move(text);
  return ++m->generation;
}

uint64_t MirrorRegistry::apply_changes(const std::string& uuid, uint64_t generation,
                                       const std::vector<TextChange>& changes) {
  std::shared_ptr<Mirror> m = find(uuid);
  std::lock_guard doc(m->mu);
  if (generation != m->generation) {
    throw HighlightError(HighlightError::Code::kStaleGeneration,
                         "document is at generation " + std::to_string(m->generation));
  }
  std::string text = m->text;
  for (const TextChange& c : changes) {
    SourceText src(text);
    if (c.from > c.to || c.to > src.size()) {
      throw HighlightError(HighlightError::Code::kBadChange, "change outside the document");
    }
    size_t from = src.byte_offset(c.from);
    size_t to = src.byte_offset(c.to);
    text = text.substr(0, from) + c.insert + text.substr(to);
  }
  m->text = std::move(text);
  return ++m->generation;
}

MirrorRegistry::Tokens MirrorRegistry::enriched_tokens(const std::string& uuid) const {
  std::shared_ptr<Mirror> m = find(uuid);
  std::lock_guard doc(m->mu);
  return {m->generation, enrich(m->text, include_)};
}

std::optional<HoverInfo> MirrorRegistry::hover_info(const std::string& uuid,
                                                    size_t offset) const {
  std::shared_ptr<Mirror> m = find(uuid);
  std::lock_guard doc(m->mu);
  return hover(m->text, offset, include_);
}

std::string MirrorRegistry::text(const std::string& uuid) const {
  std::shared_ptr<Mirror> m = find(uuid);
  std::lock_guard doc(m->mu);
  return m->text;
}

uint64_t MirrorRegistry::generation(const std::string& uuid) const {
  std::shared_ptr<Mirror> m = find(uuid);
  std::lock_guard doc(m->mu);
  return m->generation;
}

void MirrorRegistry::remove(const std::string& uuid) {
  std::unique_lock lock(mu_);
  mirrors_.erase(uuid);
}

size_t MirrorRegistry::size() const {
  std::shared_lock lock(mu_);
  return mirrors_.size();
}

}  // namespace plweb
