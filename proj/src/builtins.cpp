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
#include <cinttypes>
#include <cstdio>
#include <limits>

#include "machine.hpp"
#include "plweb/reader.hpp"
#include "plweb/tokenizer.hpp"
#include "plweb/writer.hpp"

namespace plweb::detail {

namespace {

constexpr int kData = -1;

uint64_t A(uint64_t fa, uint32_t i) { return fa + 1 + i; }

const Cell& val(Machine& m, uint64_t addr) { return m.cell(m.deref(addr)); }

int64_t want_int(Machine& m, uint64_t addr) {
  uint64_t a = m.deref(addr);
  const Cell& c = m.cell(a);
  if (c.tag == Tag::kRef) m.instantiation_error();
  if (c.tag != Tag::kInt) m.type_error("integer", a);
  return c.i;
}

bool is_atom(const Cell& c) { return c.tag == Tag::kAtom; }
bool is_number(const Cell& c) { return c.tag == Tag::kInt || c.tag == Tag::kFlt; }
bool is_atomic(const Cell& c) {
  return c.tag == Tag::kAtom || c.tag == Tag::kInt || c.tag == Tag::kFlt || c.tag == Tag::kStr;
}

uint64_t text_to_codes(Machine& m, const std::string& text, bool chars) {
  SourceText src(text);
  std::vector<uint64_t> items;
  items.reserve(src.size());
  for (size_t i = 0; i < src.size(); ++i) {
    if (chars) {
      std::string ch;
      append_utf8(ch, src.at(i));
      items.push_back(m.new_atom(m.intern(ch)));
    } else {
      items.push_back(m.new_int(src.at(i)));
    }
  }
  return m.new_list(items, m.new_atom(atom::kNil));
}

/// Text of a code or char list. A partial list raises an instantiation
/// error; a non-list returns false.
bool codes_to_text(Machine& m, uint64_t addr, std::string& out) {
  uint64_t cur = m.deref(addr);
  if (m.cell(cur).tag == Tag::kStr) {
    out += m.db().strings.text(static_cast<uint32_t>(m.cell(cur).u));
    return true;
  }
  for (;;) {
    const Cell& c = m.cell(cur);
    if (c.tag == Tag::kRef) m.instantiation_error();
    if (c.tag == Tag::kAtom && c.u == atom::kNil) return true;
    if (c.tag != Tag::kStruct || m.cell(c.u).u != atom::kDot || m.cell(c.u).arity != 2) {
      return false;
    }
    uint64_t e = m.deref(c.u + 1);
    const Cell& ec = m.cell(e);
    if (ec.tag == Tag::kRef) m.instantiation_error();
    if (ec.tag == Tag::kInt) {
      if (ec.i < 0 || ec.i > 0x10FFFF) m.representation_error("character_code");
      append_utf8(out, static_cast<char32_t>(ec.i));
    } else if (ec.tag == Tag::kAtom) {
      const std::string& name = m.atom_name(static_cast<uint32_t>(ec.u));
      if (utf8_length(name) != 1) m.type_error("character", e);
      out += name;
    } else {
      m.type_error("character_code", e);
    }
    cur = m.deref(c.u + 2);
  }
}

std::vector<uint64_t> want_list(Machine& m, uint64_t addr) {
  std::vector<uint64_t> items;
  uint64_t cur = m.deref(addr);
  for (;;) {
    const Cell& c = m.cell(cur);
    if (c.tag == Tag::kRef) m.instantiation_error();
    if (c.tag == Tag::kAtom && c.u == atom::kNil) return items;
    if (c.tag != Tag::kStruct || m.cell(c.u).u != atom::kDot || m.cell(c.u).arity != 2) {
      m.type_error("list", m.deref(addr));
    }
    items.push_back(c.u + 1);
    cur = m.deref(c.u + 2);
  }
}

// --- unification and comparison ---------------------------------------------

bool bi_unify(Machine& m, uint64_t fa) { return m.unify(A(fa, 0), A(fa, 1)); }

bool bi_not_unify(Machine& m, uint64_t fa) { return !m.would_unify(A(fa, 0), A(fa, 1)); }

bool bi_eq(Machine& m, uint64_t fa) { return m.compare(A(fa, 0), A(fa, 1)) == 0; }
bool bi_neq(Machine& m, uint64_t fa) { return m.compare(A(fa, 0), A(fa, 1)) != 0; }
bool bi_lt(Machine& m, uint64_t fa) { return m.compare(A(fa, 0), A(fa, 1)) < 0; }
bool bi_gt(Machine& m, uint64_t fa) { return m.compare(A(fa, 0), A(fa, 1)) > 0; }
bool bi_le(Machine& m, uint64_t fa) { return m.compare(A(fa, 0), A(fa, 1)) <= 0; }
bool bi_ge(Machine& m, uint64_t fa) { return m.compare(A(fa, 0), A(fa, 1)) >= 0; }

bool bi_compare(Machine& m, uint64_t fa) {
  uint64_t o = m.deref(A(fa, 0));
  const Cell& oc = m.cell(o);
  if (oc.tag != Tag::kRef) {
    if (oc.tag != Tag::kAtom) m.type_error("atom", o);
    const std::string& n = m.atom_name(static_cast<uint32_t>(oc.u));
    if (n != "<" && n != ">" && n != "=") m.domain_error("order", o);
  }
  int c = m.compare(A(fa, 1), A(fa, 2));
  return m.unify(o, m.new_atom(m.intern(c < 0 ? "<" : c > 0 ? ">" : "=")));
}

// --- type checks --------------------------------------------------------------

bool bi_var(Machine& m, uint64_t fa) { return val(m, A(fa, 0)).tag == Tag::kRef; }
bool bi_nonvar(Machine& m, uint64_t fa) { return val(m, A(fa, 0)).tag != Tag::kRef; }
bool bi_atom(Machine& m, uint64_t fa) { return is_atom(val(m, A(fa, 0))); }
bool bi_number(Machine& m, uint64_t fa) { return is_number(val(m, A(fa, 0))); }
bool bi_integer(Machine& m, uint64_t fa) { return val(m, A(fa, 0)).tag == Tag::kInt; }
bool bi_float(Machine& m, uint64_t fa) { return val(m, A(fa, 0)).tag == Tag::kFlt; }
bool bi_string(Machine& m, uint64_t fa) { return val(m, A(fa, 0)).tag == Tag::kStr; }
bool bi_atomic(Machine& m, uint64_t fa) { return is_atomic(val(m, A(fa, 0))); }
bool bi_compound(Machine& m, uint64_t fa) { return val(m, A(fa, 0)).tag == Tag::kStruct; }
bool bi_callable(Machine& m, uint64_t fa) {
  const Cell& c = val(m, A(fa, 0));
  return c.tag == Tag::kStruct || c.tag == Tag::kAtom;
}

bool bi_is_list(Machine& m, uint64_t fa) {
  std::vector<uint64_t> items;
  return m.list_elements(A(fa, 0), items);
}

// --- arithmetic -----------------------------------------------------------------

bool bi_is(Machine& m, uint64_t fa) {
  Number n = m.eval(A(fa, 1));
  return m.unify(A(fa, 0), m.number_cell(n));
}

int num_compare(Machine& m, uint64_t fa) {
  Number x = m.eval(A(fa, 0));
  Number y = m.eval(A(fa, 1));
  if (x.is_int && y.is_int) return x.i < y.i ? -1 : x.i > y.i ? 1 : 0;
  double a = x.as_double();
  double b = y.as_double();
  return a < b ? -1 : a > b ? 1 : 0;
}

bool bi_num_lt(Machine& m, uint64_t fa) { return num_compare(m, fa) < 0; }
bool bi_num_gt(Machine& m, uint64_t fa) { return num_compare(m, fa) > 0; }
bool bi_num_le(Machine& m, uint64_t fa) { return num_compare(m, fa) <= 0; }
bool bi_num_ge(Machine& m, uint64_t fa) { return num_compare(m, fa) >= 0; }
bool bi_num_eq(Machine& m, uint64_t fa) { return num_compare(m, fa) == 0; }
bool bi_num_ne(Machine& m, uint64_t fa) { return num_compare(m, fa) != 0; }

bool bi_succ(Machine& m, uint64_t fa) {
  uint64_t x = m.deref(A(fa, 0));
  uint64_t y = m.deref(A(fa, 1));
  if (m.cell(x).tag != Tag::kRef) {
    int64_t v = want_int(m, x);
    if (v < 0) m.type_error("not_less_than_zero", x);
    if (m.cell(y).tag != Tag::kRef) {
      int64_t w = want_int(m, y);
      if (w < 0) m.type_error("not_less_than_zero", y);
    }
    if (v == std::numeric_limits<int64_t>::max()) m.evaluation_error("int_overflow");
    return m.unify(y, m.new_int(v + 1));
  }
  if (m.cell(y).tag == Tag::kRef) m.instantiation_error();
  int64_t w = want_int(m, y);
  if (w < 0) m.type_error("not_less_than_zero", y);
  if (w == 0) return false;
  return m.unify(x, m.new_int(w - 1));
}

bool bi_plus(Machine& m, uint64_t fa) {
  uint64_t x = m.deref(A(fa, 0));
  uint64_t y = m.deref(A(fa, 1));
  uint64_t z = m.deref(A(fa, 2));
  bool bx = m.cell(x).tag != Tag::kRef;
  bool by = m.cell(y).tag != Tag::kRef;
  bool bz = m.cell(z).tag != Tag::kRef;
  int64_t r = 0;
  if (bx && by) {
    if (__builtin_add_overflow(want_int(m, x), want_int(m, y), &r)) {
      m.evaluation_error("int_overflow");
    }
    return m.unify(z, m.new_int(r));
  }
  if (bx && bz) {
    if (__builtin_sub_overflow(want_int(m, z), want_int(m, x), &r)) {
      m.evaluation_error("int_overflow");
    }
    return m.unify(y, m.new_int(r));
  }
  if (by && bz) {
    if (__builtin_sub_overflow(want_int(m, z), want_int(m, y), &r)) {
      m.evaluation_error("int_overflow");
    }
    return m.unify(x, m.new_int(r));
  }
  m.instantiation_error();
}

Redo bi_between(Machine& m, uint64_t fa, int64_t& state) {
  int64_t lo = want_int(m, A(fa, 0));
  uint64_t hi_addr = m.deref(A(fa, 1));
  int64_t hi;
  const Cell& hc = m.cell(hi_addr);
  if (hc.tag == Tag::kAtom && (m.atom_name(static_cast<uint32_t>(hc.u)) == "inf" ||
                               m.atom_name(static_cast<uint32_t>(hc.u)) == "infinite")) {
    hi = std::numeric_limits<int64_t>::max();
  } else {
    hi = want_int(m, hi_addr);
  }
  uint64_t x = m.deref(A(fa, 2));
  if (m.cell(x).tag != Tag::kRef) {
    int64_t v = want_int(m, x);
    return v >= lo && v <= hi ? Redo::kLast : Redo::kFail;
  }
  if (state > hi - lo || lo > hi) return Redo::kFail;
  int64_t v = lo + state;
  if (!m.unify(x, m.new_int(v))) return Redo::kFail;
  if (v == hi) return Redo::kLast;
  ++state;
  return Redo::kMore;
}

// --- term construction --------------------------------------------------------

bool bi_functor(Machine& m, uint64_t fa) {
  uint64_t t = m.deref(A(fa, 0));
  const Cell& c = m.cell(t);
  if (c.tag != Tag::kRef) {
    if (c.tag == Tag::kStruct) {
      const Cell& f = m.cell(c.u);
      return m.unify(A(fa, 1), m.new_atom(static_cast<uint32_t>(f.u))) &&
             m.unify(A(fa, 2), m.new_int(f.arity));
    }
    return m.unify(A(fa, 1), t) && m.unify(A(fa, 2), m.new_int(0));
  }
  uint64_t n = m.deref(A(fa, 1));
  uint64_t a = m.deref(A(fa, 2));
  if (m.cell(n).tag == Tag::kRef || m.cell(a).tag == Tag::kRef) m.instantiation_error();
  int64_t arity = want_int(m, a);
  if (arity < 0) m.domain_error("not_less_than_zero", a);
  if (arity > 1024 * 1024) m.resource_error("memory");
  const Cell& nc = m.cell(n);
  if (!is_atomic(nc)) m.type_error("atomic", n);
  if (arity == 0) return m.unify(t, n);
  if (nc.tag != Tag::kAtom) m.type_error("atom", n);
  return m.unify(t, m.new_struct(static_cast<uint32_t>(nc.u), static_cast<uint32_t>(arity)));
}

Redo bi_arg(Machine& m, uint64_t fa, int64_t& state) {
  uint64_t t = m.deref(A(fa, 1));
  const Cell& c = m.cell(t);
  if (c.tag == Tag::kRef) m.instantiation_error();
  if (c.tag != Tag::kStruct) m.type_error("compound", t);
  uint32_t arity = m.cell(c.u).arity;
  uint64_t n = m.deref(A(fa, 0));
  if (m.cell(n).tag != Tag::kRef) {
    int64_t i = want_int(m, n);
    if (i < 1 || i > arity) return Redo::kFail;
    return m.unify(A(fa, 2), c.u + i) ? Redo::kLast : Redo::kFail;
  }
  while (state < arity) {
    int64_t i = ++state;
    if (!m.would_unify(A(fa, 2), c.u + i)) continue;
    if (!m.unify(A(fa, 2), c.u + i) || !m.unify(n, m.new_int(i))) return Redo::kFail;
    return state == arity ? Redo::kLast : Redo::kMore;
  }
  return Redo::kFail;
}

bool bi_univ(Machine& m, uint64_t fa) {
  uint64_t t = m.deref(A(fa, 0));
  const Cell& c = m.cell(t);
  if (c.tag != Tag::kRef) {
    if (c.tag != Tag::kStruct) {
      return m.unify(A(fa, 1), m.new_list({t}, m.new_atom(atom::kNil)));
    }
    const Cell& f = m.cell(c.u);
    std::vector<uint64_t> items{m.new_atom(static_cast<uint32_t>(f.u))};
    for (uint32_t i = 0; i < f.arity; ++i) items.push_back(c.u + 1 + i);
    return m.unify(A(fa, 1), m.new_list(items, m.new_atom(atom::kNil)));
  }
  std::vector<uint64_t> items = want_list(m, A(fa, 1));
  if (items.empty()) m.domain_error("non_empty_list", m.deref(A(fa, 1)));
  uint64_t head = m.deref(items[0]);
  const Cell& hc = m.cell(head);
  if (hc.tag == Tag::kRef) m.instantiation_error();
  if (items.size() == 1) {
    if (!is_atomic(hc)) m.type_error("atomic", head);
    return m.unify(t, head);
  }
  if (hc.tag != Tag::kAtom) m.type_error("atom", head);
  uint64_t args = 0;
  uint64_t s = m.new_struct_cell(static_cast<uint32_t>(hc.u),
                                 static_cast<uint32_t>(items.size() - 1), &args);
  for (size_t i = 1; i < items.size(); ++i) m.heap()[args + i - 1] = Cell::Ref(items[i]);
  return m.unify(t, s);
}

bool bi_copy_term(Machine& m, uint64_t fa) {
  Template t = m.copy_out({A(fa, 0)});
  return m.unify(A(fa, 1), m.copy_in(t));
}

/// Walks a list; returns the count of cells and the address of the tail.
size_t list_prefix(Machine& m, uint64_t addr, uint64_t& tail) {
  size_t n = 0;
  uint64_t cur = m.deref(addr);
  for (;;) {
    const Cell& c = m.cell(cur);
    if (c.tag != Tag::kStruct || m.cell(c.u).u != atom::kDot || m.cell(c.u).arity != 2) break;
    ++n;
    cur = m.deref(c.u + 2);
  }
  tail = cur;
  return n;
}

uint64_t fresh_list(Machine& m, int64_t n) {
  std::vector<uint64_t> items;
  for (int64_t i = 0; i < n; ++i) items.push_back(m.new_var());
  return m.new_list(items, m.new_atom(atom::kNil));
}

Redo bi_length(Machine& m, uint64_t fa, int64_t& state) {
  uint64_t tail = 0;
  size_t n = list_prefix(m, A(fa, 0), tail);
  uint64_t len = m.deref(A(fa, 1));
  const Cell& lc = m.cell(len);
  if (lc.tag != Tag::kRef && lc.tag != Tag::kInt) m.type_error("integer", len);
  if (lc.tag == Tag::kInt && lc.i < 0) m.domain_error("not_less_than_zero", len);
  const Cell& tc = m.cell(tail);
  if (tc.tag == Tag::kAtom && tc.u == atom::kNil) {
    return m.unify(len, m.new_int(static_cast<int64_t>(n))) ? Redo::kLast : Redo::kFail;
  }
  if (tc.tag != Tag::kRef) m.type_error("list", m.deref(A(fa, 0)));
  if (lc.tag == Tag::kInt) {
    if (lc.i < static_cast<int64_t>(n)) return Redo::kFail;
    if (lc.i - static_cast<int64_t>(n) > 16'000'000) m.resource_error("memory");
    return m.unify(tail, fresh_list(m, lc.i - static_cast<int64_t>(n))) ? Redo::kLast
                                                                         : Redo::kFail;
  }
  int64_t extra = state++;
  if (!m.unify(tail, fresh_list(m, extra))) return Redo::kFail;
  if (!m.unify(len, m.new_int(static_cast<int64_t>(n) + extra))) return Redo::kFail;
  return Redo::kMore;
}

// --- atoms and text -------------------------------------------------------------

bool bi_atom_length(Machine& m, uint64_t fa) {
  uint64_t a = m.deref(A(fa, 0));
  const Cell& c = m.cell(a);
  if (c.tag == Tag::kRef) m.instantiation_error();
  if (c.tag == Tag::kStruct) m.type_error("atom", a);
  uint64_t l = m.deref(A(fa, 1));
  const Cell& lc = m.cell(l);
  if (lc.tag != Tag::kRef) {
    if (lc.tag != Tag::kInt) m.type_error("integer", l);
    if (lc.i < 0) m.domain_error("not_less_than_zero", l);
  }
  std::string text;
  m.text_of(a, text);
  return m.unify(l, m.new_int(static_cast<int64_t>(utf8_length(text))));
}

bool atom_text_convert(Machine& m, uint64_t fa, bool chars) {
  uint64_t a = m.deref(A(fa, 0));
  const Cell& c = m.cell(a);
  if (c.tag != Tag::kRef) {
    if (c.tag == Tag::kStruct) m.type_error("atom", a);
    std::string text;
    m.text_of(a, text);
    return m.unify(A(fa, 1), text_to_codes(m, text, chars));
  }
  std::string text;
  if (!codes_to_text(m, A(fa, 1), text)) m.type_error("list", m.deref(A(fa, 1)));
  return m.unify(a, m.new_atom(m.intern(text)));
}

bool bi_atom_codes(Machine& m, uint64_t fa) { return atom_text_convert(m, fa, false); }
bool bi_atom_chars(Machine& m, uint64_t fa) { return atom_text_convert(m, fa, true); }

bool bi_number_codes(Machine& m, uint64_t fa) {
  uint64_t n = m.deref(A(fa, 0));
  const Cell& c = m.cell(n);
  if (c.tag != Tag::kRef) {
    if (!is_number(c)) m.type_error("number", n);
    std::string text;
    m.text_of(n, text);
    return m.unify(A(fa, 1), text_to_codes(m, text, false));
  }
  std::string text;
  if (!codes_to_text(m, A(fa, 1), text)) m.type_error("list", m.deref(A(fa, 1)));
  Term t;
  try {
    t = read_term_from_string(text, m.db().ops, true).term;
  } catch (const SyntaxError&) {
    m.throw_error(Term::Compound("syntax_error", {Term::Atom("illegal_number")}));
  }
  if (!t.is_number()) m.throw_error(Term::Compound("syntax_error", {Term::Atom("illegal_number")}));
  return m.unify(n, m.import_term(t));
}

// --- sorting ----------------------------------------------------------------------

bool sort_list(Machine& m, uint64_t fa, bool dedupe) {
  std::vector<uint64_t> items = want_list(m, A(fa, 0));
  std::stable_sort(items.begin(), items.end(),
                   [&m](uint64_t a, uint64_t b) { return m.compare(a, b) < 0; });
  if (dedupe) {
    items.erase(std::unique(items.begin(), items.end(),
                            [&m](uint64_t a, uint64_t b) { return m.compare(a, b) == 0; }),
                items.end());
  }
  return m.unify(A(fa, 1), m.new_list(items, m.new_atom(atom::kNil)));
}

bool bi_sort(Machine& m, uint64_t fa) { return sort_list(m, fa, true); }
bool bi_msort(Machine& m, uint64_t fa) { return sort_list(m, fa, false); }

bool bi_keysort(Machine& m, uint64_t fa) {
  std::vector<uint64_t> items = want_list(m, A(fa, 0));
  std::vector<std::pair<uint64_t, uint64_t>> pairs;
  for (uint64_t it : items) {
    uint64_t e = m.deref(it);
    const Cell& c = m.cell(e);
    if (c.tag == Tag::kRef) m.instantiation_error();
    if (c.tag != Tag::kStruct || m.cell(c.u).u != atom::kMinus || m.cell(c.u).arity != 2) {
      m.type_error("pair", e);
    }
    pairs.emplace_back(c.u + 1, e);
  }
  std::stable_sort(pairs.begin(), pairs.end(), [&m](const auto& a, const auto& b) {
    return m.compare(a.first, b.first) < 0;
  });
  items.clear();
  for (const auto& p : pairs) items.push_back(p.second);
  return m.unify(A(fa, 1), m.new_list(items, m.new_atom(atom::kNil)));
}

// --- database ---------------------------------------------------------------------

bool bi_assertz(Machine& m, uint64_t fa) {
  m.assert_clause(A(fa, 0), true);
  return true;
}

bool bi_asserta(Machine& m, uint64_t fa) {
  m.assert_clause(A(fa, 0), false);
  return true;
}

bool bi_retract(Machine& m, uint64_t fa) { return m.retract_clause(A(fa, 0)); }

// --- output -----------------------------------------------------------------------

bool bi_write(Machine& m, uint64_t fa) {
  m.write_output(m.format_term(A(fa, 0), false));
  return true;
}

bool bi_writeln(Machine& m, uint64_t fa) {
  m.write_output(m.format_term(A(fa, 0), false) + "\n");
  return true;
}

bool bi_writeq(Machine& m, uint64_t fa) {
  m.write_output(m.format_term(A(fa, 0), true));
  return true;
}

bool bi_nl(Machine& m, uint64_t) {
  m.write_output("\n");
  return true;
}

[[noreturn]] void format_error(Machine& m, const std::string& message) {
  m.throw_error(Term::Compound("format", {Term::String(message)}));
}

size_t column_of(const std::string& out) {
  size_t nl = out.rfind('\n');
  return utf8_length(std::string_view(out).substr(nl == std::string::npos ? 0 : nl + 1));
}

std::string group_digits(const std::string& digits, char sep) {
  std::string out;
  size_t n = digits.size();
  for (size_t i = 0; i < n; ++i) {
    out += digits[i];
    size_t left = n - i - 1;
    if (left > 0 && left % 3 == 0) out += sep;
  }
  return out;
}

std::string to_radix(int64_t v, int64_t radix, bool upper) {
  if (v == 0) return "0";
  bool neg = v < 0;
  uint64_t u = neg ? 0 - static_cast<uint64_t>(v) : static_cast<uint64_t>(v);
  std::string out;
  const char* digits = upper ? "0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ"
                             : "0123456789abcdefghijklmnopqrstuvwxyz";
  while (u > 0) {
    out += digits[u % static_cast<uint64_t>(radix)];
    u /= static_cast<uint64_t>(radix);
  }
  if (neg) out += '-';
  std::reverse(out.begin(), out.end());
  return out;
}

std::string format_text(Machine& m, const std::string& fmt, const std::vector<uint64_t>& args) {
  SourceText f(fmt);
  std::string out;
  size_t next_arg = 0;
  size_t seg_start = 0;
  size_t last_stop = 0;
  std::vector<std::pair<size_t, char32_t>> fills;

  auto take = [&]() -> uint64_t {
    if (next_arg >= args.size()) format_error(m, "not enough arguments");
    return args[next_arg++];
  };
  auto column_stop = [&](size_t target) {
    size_t cur = column_of(out);
    if (target > cur) {
      size_t pad = target - cur;
      if (fills.empty()) fills.emplace_back(out.size(), U' ');
      size_t each = pad / fills.size();
      size_t extra = pad % fills.size();
      for (size_t i = fills.size(); i-- > 0;) {
        size_t n = each + (i == fills.size() - 1 ? extra : 0);
        std::string fill;
        for (size_t k = 0; k < n; ++k) append_utf8(fill, fills[i].second);
        out.insert(fills[i].first, fill);
      }
    }
    fills.clear();
    seg_start = out.size();
    last_stop = column_of(out);
  };

  for (size_t i = 0; i < f.size(); ++i) {
    char32_t ch = f.at(i);
    if (ch != U'~') {
      append_utf8(out, ch);
      continue;
    }
    if (++i >= f.size()) format_error(m, "truncated format specification");
    std::optional<int64_t> num;
    char32_t fill_char = U' ';
    if (f.at(i) == U'*') {
      num = want_int(m, take());
      ++i;
    } else if (f.at(i) == U'`') {
      fill_char = f.at(i + 1);
      num = static_cast<int64_t>(fill_char);
      i += 2;
    } else {
      int64_t v = 0;
      bool any = false;
      while (i < f.size() && f.at(i) >= U'0' && f.at(i) <= U'9') {
        v = v * 10 + (f.at(i) - U'0');
        any = true;
        ++i;
      }
      if (any) num = v;
    }
    if (i >= f.size()) format_error(m, "truncated format specification");
    char32_t d = f.at(i);
    switch (d) {
      case U'w': out += m.format_term(take(), false); break;
      case U'p':
      case U'q': out += m.format_term(take(), true); break;
      case U'a': {
        uint64_t a = m.deref(take());
        std::string text;
        if (m.cell(a).tag == Tag::kRef) m.instantiation_error();
        if (!m.text_of(a, text)) m.type_error("atomic", a);
        out += text;
        break;
      }
      case U'd':
      case U'D': {
        uint64_t a = m.deref(take());
        const Cell& c = m.cell(a);
        if (c.tag == Tag::kRef) m.instantiation_error();
        if (c.tag != Tag::kInt) format_error(m, "~d expects an integer argument");
        bool neg = c.i < 0;
        std::string digits =
            std::to_string(neg ? 0 - static_cast<uint64_t>(c.i) : static_cast<uint64_t>(c.i));
        std::string frac;
        int64_t group = num.value_or(0);
        if (group > 0) {
          while (static_cast<int64_t>(digits.size()) <= group) digits.insert(0, "0");
          frac = digits.substr(digits.size() - static_cast<size_t>(group));
          digits.resize(digits.size() - static_cast<size_t>(group));
        }
        if (d == U'D') digits = group_digits(digits, ',');
        if (neg) out += '-';
        out += digits;
        if (!frac.empty()) out += "." + frac;
        break;
      }
      case U'f':
      case U'e':
      case U'g': {
        Number n = m.eval(take());
        char spec[8] = {'%', '.', '*', static_cast<char>(d), '\0'};
        int prec = static_cast<int>(num.value_or(6));
        char buf[512];
        std::snprintf(buf, sizeof buf, spec, prec, n.as_double());
        out += buf;
        break;
      }
      case U's': {
        uint64_t a = m.deref(take());
        std::string text;
        if (m.cell(a).tag == Tag::kStr) {
          m.text_of(a, text);
        } else if (!codes_to_text(m, a, text)) {
          format_error(m, "~s expects a string or a list of codes");
        }
        out += text;
        break;
      }
      case U'n':
        for (int64_t k = 0; k < num.value_or(1); ++k) out += '\n';
        break;
      case U'c': {
        int64_t code = want_int(m, take());
        if (code < 0 || code > 0x10FFFF) m.representation_error("character_code");
        for (int64_t k = 0; k < num.value_or(1); ++k) append_utf8(out, static_cast<char32_t>(code));
        break;
      }
      case U'r':
      case U'R': {
        int64_t v = want_int(m, take());
        if (!num || *num < 2 || *num > 36) format_error(m, "~r requires a radix in 2..36");
        out += to_radix(v, *num, d == U'R');
        break;
      }
      case U'~': out += '~'; break;
      case U'i': take(); break;
      case U't': fills.emplace_back(out.size(), num ? static_cast<char32_t>(*num) : fill_char); break;
      case U'|': column_stop(num ? static_cast<size_t>(*num) : column_of(out)); break;
      case U'+': column_stop(last_stop + static_cast<size_t>(num.value_or(8))); break;
      default: {
        std::string name;
        append_utf8(name, d);
        format_error(m, "unknown directive ~" + name);
      }
    }
  }
  (void)seg_start;
  if (next_arg < args.size()) format_error(m, "too many arguments");
  return out;
}

std::string format_string_arg(Machine& m, uint64_t addr) {
  uint64_t a = m.deref(addr);
  const Cell& c = m.cell(a);
  if (c.tag == Tag::kRef) m.instantiation_error();
  std::string text;
  if (c.tag == Tag::kAtom || c.tag == Tag::kStr) {
    m.text_of(a, text);
    return text;
  }
  if (!codes_to_text(m, a, text)) m.type_error("text", a);
  return text;
}

bool bi_format2(Machine& m, uint64_t fa) {
  std::string fmt = format_string_arg(m, A(fa, 0));
  std::vector<uint64_t> args;
  if (!m.list_elements(A(fa, 1), args)) args = {A(fa, 1)};
  m.write_output(format_text(m, fmt, args));
  return true;
}

bool bi_format1(Machine& m, uint64_t fa) {
  m.write_output(format_text(m, format_string_arg(m, A(fa, 0)), {}));
  return true;
}

bool bi_read(Machine& m, uint64_t fa) {
  for (;;) {
    std::optional<std::string> line = m.read_input();
    if (!line) return m.unify(A(fa, 0), m.new_atom(atom::kEof));
    try {
      ParsedTerm pt = read_term_from_string(*line, m.db().ops);
      return m.unify(A(fa, 0), m.import_term(pt.term));
    } catch (const SyntaxError& e) {
      m.report_input_error(e.what());
    }
  }
}

// --- internal -----------------------------------------------------------------------

Redo bi_solution_member(Machine& m, uint64_t fa, int64_t& state) {
  uint64_t cur = state == 0 ? m.deref(A(fa, 1)) : static_cast<uint64_t>(state);
  const Cell& c = m.cell(cur);
  if (c.tag != Tag::kStruct) return Redo::kFail;
  uint64_t next = m.deref(c.u + 2);
  if (!m.unify(A(fa, 0), c.u + 1)) return Redo::kFail;
  const Cell& nc = m.cell(next);
  if (nc.tag != Tag::kStruct) return Redo::kLast;
  state = static_cast<int64_t>(next);
  return Redo::kMore;
}

struct Registration {
  const char* name;
  uint32_t arity;
  DetBuiltin det;
  NondetBuiltin nondet;
  std::vector<int> meta;
  bool control;
  bool internal;
};

const std::vector<Registration>& registrations() {
  static const std::vector<Registration> regs = [] {
    std::vector<Registration> r;
    auto det = [&r](const char* n, uint32_t a, DetBuiltin f) {
      r.push_back({n, a, f, nullptr, std::vector<int>(a, kData), false, false});
    };
    auto nondet = [&r](const char* n, uint32_t a, NondetBuiltin f) {
      r.push_back({n, a, nullptr, f, std::vector<int>(a, kData), false, false});
    };
    auto control = [&r](const char* n, uint32_t a) {
      r.push_back({n, a, nullptr, nullptr, std::vector<int>(a, 0), true, false});
    };
    auto meta = [&r](const char* n, std::vector<int> spec) {
      auto a = static_cast<uint32_t>(spec.size());
      r.push_back({n, a, nullptr, nullptr, std::move(spec), false, false});
    };
    control("true", 0);
    control("fail", 0);
    control("false", 0);
    control("!", 0);
    control(",", 2);
    control(";", 2);
    control("->", 2);
    control("\\+", 1);
    for (int n = 1; n <= 8; ++n) {
      std::vector<int> spec(static_cast<size_t>(n), kData);
      spec[0] = n - 1;
      meta("call", spec);
    }
    meta("findall", {kData, 0, kData});
    meta("forall", {0, 0});
    meta("aggregate_all", {kData, 0, kData});
    meta("limit", {kData, 0});
    meta("distinct", {0});
    meta("distinct", {kData, 0});
    meta("order_by", {kData, 0});
    meta("time", {0});

    det("=", 2, bi_unify);
    det("\\=", 2, bi_not_unify);
    det("==", 2, bi_eq);
    det("\\==", 2, bi_neq);
    det("@<", 2, bi_lt);
    det("@>", 2, bi_gt);
    det("@=<", 2, bi_le);
    det("@>=", 2, bi_ge);
    det("compare", 3, bi_compare);
    det("var", 1, bi_var);
    det("nonvar", 1, bi_nonvar);
    det("atom", 1, bi_atom);
    det("number", 1, bi_number);
    det("integer", 1, bi_integer);
    det("float", 1, bi_float);
    det("string", 1, bi_string);
    det("atomic", 1, bi_atomic);
    det("compound", 1, bi_compound);
    det("callable", 1, bi_callable);
    det("is_list", 1, bi_is_list);
    det("is", 2, bi_is);
    det("<", 2, bi_num_lt);
    det(">", 2, bi_num_gt);
    det("=<", 2, bi_num_le);
    det(">=", 2, bi_num_ge);
    det("=:=", 2, bi_num_eq);
    det("=\\=", 2, bi_num_ne);
    det("functor", 3, bi_functor);
    nondet("arg", 3, bi_arg);
    det("=..", 2, bi_univ);
    det("copy_term", 2, bi_copy_term);
    nondet("between", 3, bi_between);
    nondet("length", 2, bi_length);
    det("succ", 2, bi_succ);
    det("plus", 3, bi_plus);
    det("atom_length", 2, bi_atom_length);
    det("atom_codes", 2, bi_atom_codes);
    det("atom_chars", 2, bi_atom_chars);
    det("number_codes", 2, bi_number_codes);
    det("sort", 2, bi_sort);
    det("msort", 2, bi_msort);
    det("keysort", 2, bi_keysort);
    det("assert", 1, bi_assertz);
    det("asserta", 1, bi_asserta);
    det("assertz", 1, bi_assertz);
    det("retract", 1, bi_retract);
    det("write", 1, bi_write);
    det("writeln", 1, bi_writeln);
    det("print", 1, bi_writeq);
    det("writeq", 1, bi_writeq);
    det("nl", 0, bi_nl);
    det("format", 1, bi_format1);
    det("format", 2, bi_format2);
    det("read", 1, bi_read);

    r.push_back({"$solution_member", 2, nullptr, bi_solution_member, {kData, kData}, false, true});
    return r;
  }();
  return regs;
}

}  // namespace

std::vector<std::string> arithmetic_function_names();

const std::vector<std::string>& reserved_atoms() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const Registration& r : registrations()) out.emplace_back(r.name);
    for (std::string& n : arithmetic_function_names()) out.push_back(std::move(n));
    for (const char* n : {"<", ">", "v", "user", "inf", "infinite"}) out.emplace_back(n);
    return out;
  }();
  return names;
}

const BuiltinEntry* lookup_builtin(uint64_t key) {
  static const auto* table = [] {
    auto* t = new std::unordered_map<uint64_t, BuiltinEntry>;
    AtomTable atoms;
    for (const std::string& n : reserved_atoms()) atoms.intern(n);
    for (const Registration& r : registrations()) {
      if (r.det == nullptr && r.nondet == nullptr) continue;
      auto id = atoms.find(r.name);
      t->emplace(functor_key(*id, r.arity), BuiltinEntry{r.det, r.nondet, !r.internal});
    }
    return t;
  }();
  auto it = table->find(key);
  return it == table->end() ? nullptr : &it->second;
}

}  // namespace plweb::detail

namespace plweb {

const std::vector<BuiltinInfo>& builtin_table() {
  static const std::vector<BuiltinInfo> table = [] {
    std::vector<BuiltinInfo> out;
    for (const auto& r : detail::registrations()) {
      if (r.internal) continue;
      out.push_back({r.name, r.arity, r.meta, r.control});
    }
    std::sort(out.begin(), out.end(), [](const BuiltinInfo& a, const BuiltinInfo& b) {
      return a.name != b.name ? a.name < b.name : a.arity < b.arity;
    });
    return out;
  }();
  return table;
}

const BuiltinInfo* find_builtin(std::string_view name, size_t arity) {
  const auto& table = builtin_table();
  auto it = std::lower_bound(table.begin(), table.end(), std::make_pair(name, arity),
                             [](const BuiltinInfo& b, const std::pair<std::string_view, size_t>& k) {
                               return b.name != k.first ? b.name < k.first : b.arity < k.second;
                             });
  if (it == table.end() || it->name != name || it->arity != arity) return nullptr;
  return &*it;
}

bool is_builtin(std::string_view name, size_t arity) { return find_builtin(name, arity) != nullptr; }

}  // namespace plweb
