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

#ifndef PLWEB_TOKENIZER_HPP
#define PLWEB_TOKENIZER_HPP

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace plweb {

enum class TokenKind {
  kAtom,
  kQuotedAtom,
  kVar,
  kAnonVar,
  kInteger,
  kFloat,
  kString,
  kPunct,
  kFunctor,
  kOperator,
  kCommentLine,
  kCommentBlock,
  kFullstop,
  kError,
};

std::string_view token_kind_name(TokenKind kind);

/// Half-open range of code point offsets.
struct Span {
  size_t start = 0;
  size_t end = 0;
  friend bool operator==(const Span&, const Span&) = default;
};

struct Token {
  TokenKind kind = TokenKind::kError;
  /// Exact source slice.
  std::string text;
  /// Logical value: the atom name with quotes and escapes resolved, the
  /// variable name, the string contents. Equal to text for other kinds.
  std::string value;
  Span span;
  /// 1-based line of the first character.
  size_t line = 1;

  [[nodiscard]] bool is_comment() const {
    return kind == TokenKind::kCommentLine || kind == TokenKind::kCommentBlock;
  }
  /// Tokens that name an atom: plain, quoted, symbolic or functor position.
  [[nodiscard]] bool is_name() const {
    return kind == TokenKind::kAtom || kind == TokenKind::kQuotedAtom ||
           kind == TokenKind::kOperator || kind == TokenKind::kFunctor;
  }
  [[nodiscard]] bool is_punct(std::string_view p) const {
    return kind == TokenKind::kPunct && text == p;
  }
};

/// Splits source text into tokens. Never fails: characters that do not
/// start any token become single error tokens, unterminated quotes and block
/// comments become one error token reaching the end of the input.
std::vector<Token> tokenize(std::string_view text);

/// Source text decoded to code points, with byte offsets for slicing.
class SourceText {
 public:
  explicit SourceText(std::string_view utf8);

  [[nodiscard]] size_t size() const { return cps_.size(); }
  [[nodiscard]] char32_t at(size_t i) const {
    return i < cps_.size() ? cps_[i] : U'\0';
  }
  [[nodiscard]] std::string slice(size_t start, size_t end) const;
  [[nodiscard]] size_t byte_offset(size_t cp) const { return bytes_[cp]; }
  /// 1-based line number of a code point offset.
  [[nodiscard]] size_t line_of(size_t cp) const;

 private:
  std::string_view utf8_;
  std::u32string cps_;
  std::vector<size_t> bytes_;
  std::vector<size_t> line_starts_;
};

/// Encodes one code point as UTF-8.
void append_utf8(std::string& out, char32_t cp);
/// Number of code points in a UTF-8 string.
size_t utf8_length(std::string_view text);

}  // namespace plweb

#endif  // PLWEB_TOKENIZER_HPP
