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

#ifndef PLWEB_WRITER_HPP
#define PLWEB_WRITER_HPP

#include <cstddef>
#include <string>
#include <string_view>

#include "plweb/operators.hpp"
#include "plweb/term.hpp"

namespace plweb {

inline constexpr size_t kDefaultWriteDepth = 10000;

struct WriteOptions {
  /// Quote atoms and strings so the output reads back as the same term.
  bool quoted = false;
  /// Write operators in canonical functional notation.
  bool ignore_ops = false;
  /// Nesting beyond this depth is written as "...".
  size_t max_depth = kDefaultWriteDepth;
  const OperatorTable* ops = nullptr;
  /// Context priority; operators above it are bracketed.
  int priority = 1200;
};

std::string format_term(const Term& t, const WriteOptions& options);

/// Quoted output honoring ops.
std::string writeq(const Term& t, const OperatorTable& ops = OperatorTable::Default());
/// Unquoted output honoring ops, as write/1 prints.
std::string write_plain(const Term& t,
                        const OperatorTable& ops = OperatorTable::Default());

/// Quoted output as the right-hand side of "Var = Value" in an answer.
std::string write_answer(const Term& t, const OperatorTable& ops = OperatorTable::Default());

/// True when the atom must be quoted to read back as itself.
bool atom_needs_quotes(std::string_view name);
/// The atom in single quotes with escapes.
std::string quote_atom(std::string_view name);
/// Shortest text that reads back as the same float; always holds a "." or
/// an exponent after a fractional part.
std::string format_float(double v);

}  // namespace plweb

#endif  // PLWEB_WRITER_HPP
