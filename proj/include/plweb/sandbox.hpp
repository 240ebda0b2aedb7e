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

#ifndef PLWEB_SANDBOX_HPP
#define PLWEB_SANDBOX_HPP

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plweb/term.hpp"
#include "plweb/workspace.hpp"

namespace plweb {

enum class ViolationKind { kInstantiation, kPermission, kCrossModule };
std::string_view violation_kind_name(ViolationKind kind);

struct Violation {
  ViolationKind kind = ViolationKind::kPermission;
  Term culprit;
  /// Goals from the analyzed root down to the culprit.
  std::vector<Term> trace;
  std::string message;
};

struct SafetyVerdict {
  bool safe = true;
  std::optional<Violation> violation;
};

struct WhitelistEntry {
  std::string name;
  size_t arity = 0;
  /// Per argument: -1 for data, otherwise a goal extended by that many
  /// arguments.
  std::vector<int> meta;
};

/// The builtins plus the library meta-predicates, sorted by name then
/// arity.
const std::vector<WhitelistEntry>& whitelist();
const WhitelistEntry* find_whitelisted(std::string_view name, size_t arity);

/// Unfolds every goal reachable from goal against the whitelist and the
/// clauses in ws.
SafetyVerdict safe_goal(const Term& goal, const Workspace& ws);

/// Approves one directive (the argument of :-/1).
SafetyVerdict safe_directive(const Term& directive);

/// Adapter for ConsultOptions::check_directive.
std::optional<LoadError> check_directive(const Term& directive);

}  // namespace plweb

#endif  // PLWEB_SANDBOX_HPP
