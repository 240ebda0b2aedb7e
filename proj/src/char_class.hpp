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

#ifndef PLWEB_CHAR_CLASS_HPP
#define PLWEB_CHAR_CLASS_HPP

// Character classes shared by the tokenizer and the writer. Code points
// above ASCII count as lowercase letters.
namespace plweb::chars {

inline bool is_layout(char32_t c) {
  return c == U' ' || c == U'\t' || c == U'\n' || c == U'\r' || c == U'\v' ||
         c == U'\f';
}
inline bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }
inline bool is_hex(char32_t c) {
  return is_digit(c) || (c >= U'a' && c <= U'f') || (c >= U'A' && c <= U'F');
}
inline unsigned hex_value(char32_t c) {
  if (is_digit(c)) return c - U'0';
  if (c >= U'a' && c <= U'f') return c - U'a' + 10;
  return c - U'A' + 10;
}
inline bool is_upper(char32_t c) { return (c >= U'A' && c <= U'Z') || c == U'_'; }
inline bool is_lower(char32_t c) {
  return (c >= U'a' && c <= U'z') || (c >= 0x80 && c != 0xFFFD);
}
inline bool is_alnum(char32_t c) { return is_lower(c) || is_upper(c) || is_digit(c); }
inline bool is_symbol(char32_t c) {
  switch (c) {
    case U'+': case U'-': case U'*': case U'/': case U'\\': case U'^':
    case U'<': case U'>': case U'=': case U'~': case U':': case U'.':
    case U'?': case U'@': case U'#': case U'&': case U'$':
      return true;
    default:
      return false;
  }
}

}  // namespace plweb::chars

#endif  // PLWEB_CHAR_CLASS_HPP
