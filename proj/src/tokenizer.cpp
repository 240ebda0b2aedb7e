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

#include "plweb/tokenizer.hpp"

#include <algorithm>

#include "char_class.hpp"

namespace plweb {

std::string_view token_kind_name(TokenKind kind) {
  switch (kind) {
    case TokenKind::kAtom: return "atom";
    case TokenKind::kQuotedAtom: return "quoted_atom";
    case TokenKind::kVar: return "var";
    case TokenKind::kAnonVar: return "anon_var";
    case TokenKind::kInteger: return "integer";
    case TokenKind::kFloat: return "float";
    case TokenKind::kString: return "string";
    case TokenKind::kPunct: return "punct";
    case TokenKind::kFunctor: return "functor";
    case TokenKind::kOperator: return "operator";
    case TokenKind::kCommentLine: return "comment_line";
    case TokenKind::kCommentBlock: return "comment_block";
    case TokenKind::kFullstop: return "fullstop";
    case TokenKind::kError: return "error";
  }
  return "error";
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

size_t utf8_length(std::string_view text) {
  size_t n = 0;
  for (unsigned char c : text) {
    if ((c & 0xC0) != 0x80) ++n;
  }
  return n;
}

SourceText::SourceText(std::string_view utf8) : utf8_(utf8) {
  cps_.reserve(utf8.size());
  bytes_.reserve(utf8.size() + 1);
  line_starts_.push_back(0);
  size_t i = 0;
  while (i < utf8.size()) {
    auto c = static_cast<unsigned char>(utf8[i]);
    size_t len = 1;
    char32_t cp = c;
    if (c >= 0xF0 && c < 0xF8) {
      len = 4;
      cp = c & 0x07;
    } else if (c >= 0xE0) {
      len = c < 0xF0 ? 3 : 1;
      cp = c & 0x0F;
    } else if (c >= 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if (c >= 0x80) {
      len = 1;
      cp = 0xFFFD;
    }
    if (len > 1) {
      bool ok = i + len <= utf8.size();
      for (size_t k = 1; ok && k < len; ++k) {
        auto cc = static_cast<unsigned char>(utf8[i + k]);
        if ((cc & 0xC0) != 0x80) ok = false;
        else cp = (cp << 6) | (cc & 0x3F);
      }
      if (!ok) {
        len = 1;
        cp = 0xFFFD;
      }
    } else if (c >= 0xF8) {
      cp = 0xFFFD;
    }
    bytes_.push_back(i);
    cps_.push_back(cp);
    if (cp == U'\n') line_starts_.push_back(cps_.size());
    i += len;
  }
  bytes_.push_back(utf8.size());
}

std::string SourceText::slice(size_t start, size_t end) const {
  start = std::min(start, cps_.size());
  end = std::min(std::max(end, start), cps_.size());
  return std::string(utf8_.substr(bytes_[start], bytes_[end] - bytes_[start]));
}

size_t SourceText::line_of(size_t cp) const {
  auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), cp);
  return static_cast<size_t>(it - line_starts_.begin());
}

namespace {

class Lexer {
 public:
  explicit Lexer(std::string_view text) : src_(text) {}

  std::vector<Token> run() {
    while (skip_layout()) scan_one();
    return std::move(tokens_);
  }

 private:
  char32_t peek(size_t ahead = 0) const { return src_.at(pos_ + ahead); }
  bool at_end(size_t ahead = 0) const { return pos_ + ahead >= src_.size(); }

  bool skip_layout() {
    while (!at_end() && chars::is_layout(peek())) ++pos_;
    return !at_end();
  }

  void emit(TokenKind kind, size_t start, std::string value) {
    Token t;
    t.kind = kind;
    t.span = {start, pos_};
    t.text = src_.slice(start, pos_);
    t.value = std::move(value);
    t.line = src_.line_of(start);
    tokens_.push_back(std::move(t));
  }

  void emit_plain(TokenKind kind, size_t start) {
    emit(kind, start, src_.slice(start, pos_));
  }

  // Name-like tokens become functors when an opening parenthesis follows
  // immediately.
  void emit_name(TokenKind kind, size_t start, std::string value) {
    if (!at_end() && peek() == U'(') kind = TokenKind::kFunctor;
    emit(kind, start, std::move(value));
  }

  void scan_one() {
    size_t start = pos_;
    char32_t c = peek();
    if (c == U'%') {
      while (!at_end() && peek() != U'\n') ++pos_;
      emit_plain(TokenKind::kCommentLine, start);
      return;
    }
    if (c == U'/' && peek(1) == U'*') {
      pos_ += 2;
      while (!at_end() && !(peek() == U'*' && peek(1) == U'/')) ++pos_;
      if (at_end()) {
        emit_plain(TokenKind::kError, start);
        return;
      }
      pos_ += 2;
      emit_plain(TokenKind::kCommentBlock, start);
      return;
    }
    if (chars::is_digit(c)) {
      scan_number(start);
      return;
    }
    if (chars::is_upper(c)) {
      while (!at_end() && chars::is_alnum(peek())) ++pos_;
      std::string name = src_.slice(start, pos_);
      emit(name == "_" ? TokenKind::kAnonVar : TokenKind::kVar, start, name);
      return;
    }
    if (chars::is_lower(c)) {
      while (!at_end() && chars::is_alnum(peek())) ++pos_;
      emit_name(TokenKind::kAtom, start, src_.slice(start, pos_));
      return;
    }
    if (c == U'\'' || c == U'"') {
      scan_quoted(start, c);
      return;
    }
    if (c == U'(' || c == U')' || c == U'[' || c == U']' || c == U'{' ||
        c == U'}' || c == U',' || c == U'|') {
      ++pos_;
      emit_plain(TokenKind::kPunct, start);
      return;
    }
    if (c == U'!') {
      ++pos_;
      emit_name(TokenKind::kAtom, start, "!");
      return;
    }
    if (c == U';') {
      ++pos_;
      emit_name(TokenKind::kOperator, start, ";");
      return;
    }
    if (chars::is_symbol(c)) {
      if (c == U'.' && (at_end(1) || chars::is_layout(peek(1)) || peek(1) == U'%')) {
        ++pos_;
        emit_plain(TokenKind::kFullstop, start);
        return;
      }
      while (!at_end() && chars::is_symbol(peek()) &&
             !(peek() == U'/' && peek(1) == U'*' && pos_ > start)) {
        ++pos_;
      }
      emit_name(TokenKind::kOperator, start, src_.slice(start, pos_));
      return;
    }
    ++pos_;
    emit_plain(TokenKind::kError, start);
  }

  void scan_number(size_t start) {
    if (peek() == U'0' && peek(1) == U'\'') {
      size_t save = pos_;
      pos_ += 2;
      std::string decoded;
      bool ok = false;
      if (peek() == U'\'' && peek(1) == U'\'') {
        pos_ += 2;
        decoded = "39";
        ok = true;
      } else if (peek() == U'\\') {
        std::string out;
        if (read_escape(out)) {
          SourceText one(out);
          decoded = std::to_string(static_cast<uint32_t>(one.at(0)));
          ok = !out.empty();
        }
      } else if (!at_end()) {
        decoded = std::to_string(static_cast<uint32_t>(peek()));
        ++pos_;
        ok = true;
      }
      if (ok) {
        emit(TokenKind::kInteger, start, decoded);
        return;
      }
      pos_ = save;
    }
    while (!at_end() && chars::is_digit(peek())) ++pos_;
    bool is_float = false;
    if (peek() == U'.' && chars::is_digit(peek(1))) {
      is_float = true;
      ++pos_;
      while (!at_end() && chars::is_digit(peek())) ++pos_;
      if (peek() == U'e' || peek() == U'E') {
        size_t k = 1;
        if (peek(1) == U'+' || peek(1) == U'-') k = 2;
        if (chars::is_digit(peek(k))) {
          pos_ += k;
          while (!at_end() && chars::is_digit(peek())) ++pos_;
        }
      }
    }
    emit_plain(is_float ? TokenKind::kFloat : TokenKind::kInteger, start);
  }

  // Reads one escape sequence starting at a backslash. Appends the decoded
  // character (nothing for a line continuation).
  bool read_escape(std::string& out) {
    ++pos_;  // backslash
    if (at_end()) return false;
    char32_t c = peek();
    ++pos_;
    switch (c) {
      case U'n': out += '\n'; return true;
      case U't': out += '\t'; return true;
      case U'r': out += '\r'; return true;
      case U'a': out += '\a'; return true;
      case U'b': out += '\b'; return true;
      case U'f': out += '\f'; return true;
      case U'v': out += '\v'; return true;
      case U'e': out += '\x1b'; return true;
      case U's': out += ' '; return true;
      case U'z': return false;
      case U'\\': out += '\\'; return true;
      case U'\'': out += '\''; return true;
      case U'"': out += '"'; return true;
      case U'`': out += '`'; return true;
      case U'\n': return true;
      case U'x': {
        char32_t v = 0;
        size_t digits = 0;
        while (!at_end() && chars::is_hex(peek())) {
          v = v * 16 + chars::hex_value(peek());
          ++pos_;
          ++digits;
        }
        if (digits == 0 || v > 0x10FFFF) return false;
        if (peek() == U'\\') ++pos_;
        append_utf8(out, v);
        return true;
      }
      default:
        if (c >= U'0' && c <= U'7') {
          char32_t v = c - U'0';
          while (!at_end() && peek() >= U'0' && peek() <= U'7') {
            v = v * 8 + (peek() - U'0');
            ++pos_;
          }
          if (v > 0x10FFFF) return false;
          if (peek() == U'\\') ++pos_;
          append_utf8(out, v);
          return true;
        }
        return false;
    }
  }

  void scan_quoted(size_t start, char32_t quote) {
    ++pos_;
    std::string value;
    bool bad = false;
    for (;;) {
      if (at_end()) {
        emit_plain(TokenKind::kError, start);
        return;
      }
      char32_t c = peek();
      if (c == quote) {
        if (peek(1) == quote) {
          append_utf8(value, quote);
          pos_ += 2;
          continue;
        }
        ++pos_;
        break;
      }
      if (c == U'\\') {
        if (!read_escape(value)) bad = true;
        continue;
      }
      append_utf8(value, c);
      ++pos_;
    }
    if (bad) {
      emit_plain(TokenKind::kError, start);
    } else if (quote == U'"') {
      emit(TokenKind::kString, start, std::move(value));
    } else {
      emit_name(TokenKind::kQuotedAtom, start, std::move(value));
    }
  }

  SourceText src_;
  size_t pos_ = 0;
  std::vector<Token> tokens_;
};

}  // namespace

std::vector<Token> tokenize(std::string_view text) { return Lexer(text).run(); }

}  // namespace plweb
