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

#include "plweb/writer.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "char_class.hpp"
#include "plweb/tokenizer.hpp"

namespace plweb {

namespace {

bool is_alnum_byte(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '_' || (static_cast<unsigned char>(c) >= 0x80);
}

bool is_symbol_byte(char c) { return chars::is_symbol(static_cast<unsigned char>(c)); }

class Writer {
 public:
  Writer(const WriteOptions& options)
      : opts_(options),
        ops_(options.ops != nullptr ? *options.ops : OperatorTable::Default()) {}

  std::string run(const Term& t) {
    write(t, opts_.priority, 0, false);
    return std::move(out_);
  }

 private:
  // Appends a piece, separating it from the previous output with a space
  // when the two would otherwise read as a single token.
  void emit(std::string_view piece) {
    if (piece.empty()) return;
    if (!out_.empty()) {
      char a = out_.back();
      char b = piece.front();
      if ((is_alnum_byte(a) && is_alnum_byte(b)) ||
          (is_symbol_byte(a) && is_symbol_byte(b))) {
        out_ += ' ';
      }
    }
    out_ += piece;
  }

  std::string atom_text(const std::string& name) const {
    if (opts_.quoted && atom_needs_quotes(name)) return quote_atom(name);
    return name;
  }

  int atom_priority(const std::string& name) const {
    int p = 0;
    for (auto d : {ops_.prefix(name), ops_.infix(name), ops_.postfix(name)}) {
      if (d) p = std::max(p, d->priority);
    }
    return p;
  }

  void write_atom(const std::string& name, int max, bool operand) {
    int p = name == "[]" ? 0 : atom_priority(name);
    if (p > 0 && (operand || p > max)) {
      emit("(");
      out_ += atom_text(name);
      out_ += ')';
      return;
    }
    emit(atom_text(name));
  }

  void write_string(const std::string& s) {
    if (!opts_.quoted) {
      out_ += s;
      return;
    }
    std::string q = "\"";
    for (char c : s) {
      switch (c) {
        case '"': q += "\\\""; break;
        case '\\': q += "\\\\"; break;
        case '\n': q += "\\n"; break;
        case '\t': q += "\\t"; break;
        default:
          if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
            char buf[8];
            std::snprintf(buf, sizeof buf, "\\x%x\\", static_cast<unsigned>(c));
            q += buf;
          } else {
            q += c;
          }
      }
    }
    q += '"';
    emit(q);
  }

  void write_var(const Term& t) {
    const std::string& n = t.name();
    if (!n.empty() && n != "_") {
      emit(n);
    } else if (t.var_id() < 0) {
      emit("_");
    } else {
      emit("_G" + std::to_string(t.var_id()));
    }
  }

  void write(const Term& t, int max, size_t depth, bool operand) {
    if (depth > opts_.max_depth) {
      emit("...");
      return;
    }
    switch (t.kind()) {
      case Term::Kind::kVar: write_var(t); return;
      case Term::Kind::kInt: emit(std::to_string(t.int_value())); return;
      case Term::Kind::kFloat: emit(format_float(t.float_value())); return;
      case Term::Kind::kString: write_string(t.name()); return;
      case Term::Kind::kAtom: write_atom(t.name(), max, operand); return;
      case Term::Kind::kCompound: break;
    }
    if (t.is_list_cell()) {
      write_list(t, depth);
      return;
    }
    if (!opts_.ignore_ops && write_operator(t, max, depth)) return;
    write_canonical(t, depth);
  }

  void write_canonical(const Term& t, size_t depth) {
    emit(t.name() == "[]" && opts_.quoted ? quote_atom("[]") : atom_text(t.name()));
    out_ += '(';
    for (size_t i = 0; i < t.arity(); ++i) {
      if (i > 0) out_ += ',';
      write(t.arg(i), 999, depth + 1, false);
    }
    out_ += ')';
  }

  void write_list(const Term& t, size_t depth) {
    emit("[");
    const Term* cur = &t;
    size_t count = 0;
    for (;;) {
      if (count > 0) out_ += ',';
      write(cur->arg(0), 999, depth + 1, false);
      ++count;
      const Term& tail = cur->arg(1);
      if (tail.is_list_cell()) {
        if (count >= opts_.max_depth * 100) {
          out_ += "|...";
          break;
        }
        cur = &tail;
        continue;
      }
      if (!tail.is_nil()) {
        out_ += '|';
        write(tail, 999, depth + 1, false);
      }
      break;
    }
    out_ += ']';
  }

  void open(bool paren) {
    if (paren) emit("(");
  }
  void close(bool paren) {
    if (paren) out_ += ')';
  }

  bool write_operator(const Term& t, int max, size_t depth) {
    const std::string& name = t.name();
    if (t.arity() == 2) {
      std::optional<OpDef> def =
          name == "," ? std::optional<OpDef>(OpDef{1000, OpType::kXfy}) : ops_.infix(name);
      if (!def) return false;
      bool paren = def->priority > max;
      open(paren);
      write(t.arg(0), def->left_max(), depth + 1, true);
      if (name == ",") {
        out_ += ',';
      } else if (is_alnum_byte(name.front()) && !atom_needs_quotes(name)) {
        out_ += ' ';
        out_ += name;
        out_ += ' ';
      } else {
        emit(atom_text(name));
      }
      write(t.arg(1), def->right_max(), depth + 1, true);
      close(paren);
      return true;
    }
    if (t.arity() != 1) return false;
    bool sign = name == "-" || name == "+";
    // -(1) stays canonical so it does not read back as the integer -1.
    if (auto def = ops_.prefix(name); def && !(sign && t.arg(0).is_number())) {
      bool paren = def->priority > max;
      open(paren);
      emit(atom_text(name));
      size_t mark = out_.size();
      write(t.arg(0), def->right_max(), depth + 1, true);
      // A following "(" would turn the operator into a functor, and a digit
      // right after a sign would read as a negative number.
      if (mark < out_.size()) {
        char first = out_[mark];
        if (first == '(' || (sign && chars::is_digit(static_cast<unsigned char>(first)))) {
          out_.insert(mark, " ");
        }
      }
      close(paren);
      return true;
    }
    if (auto def = ops_.postfix(name)) {
      bool paren = def->priority > max;
      open(paren);
      write(t.arg(0), def->left_max(), depth + 1, true);
      emit(atom_text(name));
      close(paren);
      return true;
    }
    return false;
  }

  const WriteOptions& opts_;
  const OperatorTable& ops_;
  std::string out_;
};

}  // namespace

bool atom_needs_quotes(std::string_view name) {
  if (name.empty()) return true;
  if (name == "[]" || name == "!" || name == ";") return false;
  SourceText src(name);
  char32_t first = src.at(0);
  if (chars::is_lower(first)) {
    for (size_t i = 1; i < src.size(); ++i) {
      if (!chars::is_alnum(src.at(i))) return true;
    }
    return false;
  }
  if (chars::is_symbol(first)) {
    for (size_t i = 0; i < src.size(); ++i) {
      if (!chars::is_symbol(src.at(i))) return true;
    }
    if (name == "." || name.find("/*") != std::string_view::npos) return true;
    return false;
  }
  return true;
}

std::string quote_atom(std::string_view name) {
  std::string q = "'";
  for (char c : name) {
    switch (c) {
      case '\'': q += "\\'"; break;
      case '\\': q += "\\\\"; break;
      case '\n': q += "\\n"; break;
      case '\t': q += "\\t"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f) {
          char buf[8];
          std::snprintf(buf, sizeof buf, "\\x%x\\", static_cast<unsigned>(c));
          q += buf;
        } else {
          q += c;
        }
    }
  }
  q += '\'';
  return q;
}

std::string format_float(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  std::string s(buf, end);
  size_t e = s.find('e');
  std::string mantissa = e == std::string::npos ? s : s.substr(0, e);
  std::string exponent = e == std::string::npos ? "" : s.substr(e + 1);
  if (mantissa.find('.') == std::string::npos) mantissa += ".0";
  if (exponent.empty()) return mantissa;
  if (exponent[0] == '+') exponent.erase(0, 1);
  return mantissa + "e" + exponent;
}

std::string format_term(const Term& t, const WriteOptions& options) {
  return Writer(options).run(t);
}

std::string write_answer(const Term& t, const OperatorTable& ops) {
  WriteOptions o;
  o.quoted = true;
  o.ops = &ops;
  o.priority = 699;
  return format_term(t, o);
}

std::string writeq(const Term& t, const OperatorTable& ops) {
  WriteOptions o;
  o.quoted = true;
  o.ops = &ops;
  return format_term(t, o);
}

std::string write_plain(const Term& t, const OperatorTable& ops) {
  WriteOptions o;
  o.ops = &ops;
  return format_term(t, o);
}

}  // namespace plweb
