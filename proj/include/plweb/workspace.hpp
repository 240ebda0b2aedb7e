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

#ifndef PLWEB_WORKSPACE_HPP
#define PLWEB_WORKSPACE_HPP

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "plweb/operators.hpp"
#include "plweb/reader.hpp"
#include "plweb/term.hpp"

namespace plweb {

enum class Origin { kBuiltin, kLibrary, kLocal };
std::string_view origin_name(Origin origin);

namespace detail {
struct Database;
}

/// The private predicate database and operator table of one engine.
class Workspace {
 public:
  /// Standard operators, an empty dynamic database and the library
  /// predicates.
  Workspace();
  Workspace(const Workspace& other);
  Workspace& operator=(const Workspace& other);
  Workspace(Workspace&&) noexcept;
  Workspace& operator=(Workspace&&) noexcept;
  ~Workspace();

  [[nodiscard]] const OperatorTable& ops() const;
  OperatorTable& ops();
  /// Renderers enabled by use_rendering/1, in directive order.
  [[nodiscard]] const std::vector<std::string>& renderers() const;
  void add_renderer(const std::string& name);

  /// Origin of a predicate, nullopt when it is unknown.
  [[nodiscard]] std::optional<Origin> origin(const std::string& name, size_t arity) const;
  [[nodiscard]] bool is_dynamic(const std::string& name, size_t arity) const;
  /// Defined (non-builtin) predicates, library ones included.
  [[nodiscard]] std::vector<Indicator> predicates() const;
  /// Clauses as (Head :- Body) terms; facts have body true.
  [[nodiscard]] std::vector<Term> clauses(const std::string& name, size_t arity) const;
  /// Source line of each clause, 0 when not loaded from text.
  [[nodiscard]] std::vector<size_t> clause_lines(const std::string& name, size_t arity) const;

  detail::Database& db() { return *db_; }
  [[nodiscard]] const detail::Database& db() const { return *db_; }

 private:
  std::unique_ptr<detail::Database> db_;
};

struct LoadError {
  /// permission, syntax, include_cycle, include, type, existence,
  /// directive.
  std::string kind;
  std::string message;
  size_t line = 0;
  Term culprit;
};

struct ConsultOptions {
  /// Returns the text of an included file, nullopt when unknown.
  std::function<std::optional<std::string>(const std::string& spec)> include;
  /// Approves a directive before it runs; returns an error to refuse it.
  std::function<std::optional<LoadError>(const Term& directive)> check_directive;
  /// Directives outside the built-in set run as goals. Used when the
  /// sandbox is disabled.
  bool run_other_directives = false;
};

/// Loads clauses and executes directives. Errors are collected.
std::vector<LoadError> consult(Workspace& ws, std::span<const ParsedTerm> program,
                               const ConsultOptions& options = {});

/// Parses and consults text; syntax errors become load errors.
std::vector<LoadError> consult_text(Workspace& ws, std::string_view text,
                                    const ConsultOptions& options = {});

}  // namespace plweb

#endif  // PLWEB_WORKSPACE_HPP
