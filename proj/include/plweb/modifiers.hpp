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

#ifndef PLWEB_MODIFIERS_HPP
#define PLWEB_MODIFIERS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "plweb/term.hpp"

namespace plweb {

/// A query-menu wrapper around the user's query.
struct Modifier {
  enum class Kind { kCountAll, kOrderBy, kDistinct, kLimit, kTime, kDebug };
  Kind kind = Kind::kCountAll;
  /// order_by: the variable name and direction.
  std::string var;
  bool descending = false;
  /// limit: the maximum number of answers.
  int64_t count = 0;
};

/// Parses "count_all", "order_by(X,desc)", "distinct", "limit(10)", "time"
/// or "debug".
std::optional<Modifier> parse_modifier(std::string_view text);

struct ModifiedQuery {
  Term goal;
  std::vector<std::pair<std::string, Term>> var_names;
  /// The query should start in creep mode.
  bool debug = false;
};

/// Wraps a query in the meta-goal of the modifier. Throws PrologError with
/// domain_error(query_variable, Name) when order_by names a variable the
/// query lacks.
ModifiedQuery apply_modifier(const Term& query,
                             const std::vector<std::pair<std::string, Term>>& var_names,
                             const Modifier& modifier);

}  // namespace plweb

#endif  // PLWEB_MODIFIERS_HPP
