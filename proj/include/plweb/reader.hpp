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

#ifndef PLWEB_READER_HPP
#define PLWEB_READER_HPP

#include <cstddef>
#include <limits>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "plweb/operators.hpp"
#include "plweb/term.hpp"
#include "plweb/tokenizer.hpp"

namespace plweb {

inline constexpr size_t kNoToken = std::numeric_limits<size_t>::max();

/// Source layout of one (sub)term, mirroring the term's argument structure.
/// List elements are laid out as nested '.'/2 cells.
struct TermLayout {
  Span span;
  /// Index of the token naming the principal functor, or kNoToken for
  /// variables, numbers, strings and list cells.
  size_t functor_token = kNoToken;
  std::vector<TermLayout> args;
  /// 1-based line where the subterm starts.
  size_t line = 0;
};

struct ParsedTerm {
  Term term;
  /// Named variables in order of first occurrence.
  std::vector<std::pair<std::string, Term>> var_names;
  std::set<std::string> singletons;
  /// Source span including the full stop.
  Span span;
  /// Token range [first_token, end_token) including the full stop; comment
  /// tokens inside the term are part of the range.
  size_t first_token = 0;
  size_t end_token = 0;
  TermLayout layout;
  size_t line = 1;

  [[nodiscard]] bool is_directive() const { return term.is_compound(":-", 1); }
};

class SyntaxError : public std::runtime_error {
 public:
  enum class Kind { kSyntax, kUnterminated };
  SyntaxError(Kind kind, size_t position, size_t line, const std::string& message)
      : std::runtime_error(message), kind_(kind), position_(position), line_(line) {}

  [[nodiscard]] Kind kind() const { return kind_; }
  /// Code point offset of the offending token.
  [[nodiscard]] size_t position() const { return position_; }
  [[nodiscard]] size_t line() const { return line_; }

 private:
  Kind kind_;
  size_t position_;
  size_t line_;
};

/// Reads one term ending in a full stop, starting at tokens[pos]. Leading
/// comments are skipped. On success pos is advanced past the full stop.
/// Throws SyntaxError; pos is then unspecified.
ParsedTerm read_term(std::span<const Token> tokens, size_t& pos,
                     const OperatorTable& ops);

/// Tokenizes and reads text holding exactly one term. The full stop is
/// optional when allow_missing_stop is set.
ParsedTerm read_term_from_string(std::string_view text, const OperatorTable& ops,
                                 bool allow_missing_stop = false);

struct ProgramParse {
  std::vector<Token> tokens;
  std::vector<ParsedTerm> terms;
  std::vector<SyntaxError> errors;
  /// Token range [first, end) skipped for each error, in the same order.
  std::vector<std::pair<size_t, size_t>> error_ranges;
  /// The operator table after applying the op/3 directives in the text.
  OperatorTable ops;
};

/// Parses a whole program term by term. A syntax error is recorded and
/// reading resumes after the next full stop. Well-formed op/3 directives
/// take effect for the terms that follow them.
ProgramParse parse_program(std::string_view text, const OperatorTable& ops);

/// Queries from "/** <examples> ... */" comments, in source order, without
/// the leading "?-" and the closing full stop.
std::vector<std::string> extract_examples(std::string_view text);

/// Applies a well-formed op(P, T, Names) term to ops. Returns false when the
/// term is not an acceptable operator definition.
bool apply_op_directive(const Term& op_term, OperatorTable& ops);

}  // namespace plweb

#endif  // PLWEB_READER_HPP
