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

#ifndef PLWEB_HIGHLIGHT_HPP
#define PLWEB_HIGHLIGHT_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plweb/term.hpp"
#include "plweb/tokenizer.hpp"
#include "plweb/workspace.hpp"

namespace plweb {

/// Template and one-line summary of a builtin or library predicate.
struct PredicateDoc {
  std::string name;
  size_t arity = 0;
  std::string templ;
  std::string summary;
  Origin origin = Origin::kBuiltin;
};

/// Sorted by name then arity.
const std::vector<PredicateDoc>& doc_table();
const PredicateDoc* find_doc(std::string_view name, size_t arity);

/// Templates of all documented predicates whose name starts with prefix.
std::vector<std::string> templates(std::string_view prefix);

struct XrefTable {
  /// Defining clause lines, in source order.
  std::map<Indicator, std::vector<size_t>> defined;
  std::set<Indicator> called;
  std::set<Indicator> dynamic_decls;

  [[nodiscard]] std::set<Indicator> undefined() const;
};

/// Resolves include/1 to file text for cross-referencing.
using IncludeResolver = std::function<std::optional<std::string>(const std::string&)>;

/// Cross-references a program; syntax errors are tolerated.
XrefTable xref(std::string_view text, const IncludeResolver& include = {});

enum class TokenClass {
  kGoalBuiltIn,
  kGoalImported,
  kGoalLocal,
  kGoalDynamic,
  kGoalUndefined,
  kHeadDefined,
  kSingleton,
  kVarNormal,
  kDirective,
  kSyntaxError,
};
std::string_view token_class_name(TokenClass cls);

struct EnrichedToken {
  Token base;
  std::optional<TokenClass> cls;
  std::optional<Origin> origin;
};

/// One group per clause or directive. Comments and whitespace-only gaps
/// attach to the following term; tokens after the last term form a final
/// group, and so does the token range of each syntax error.
std::vector<std::vector<EnrichedToken>> enrich(std::string_view text,
                                               const IncludeResolver& include = {});

struct HoverInfo {
  Origin origin = Origin::kBuiltin;
  Indicator predicate;
  /// Argument template, empty for local predicates.
  std::string templ;
  std::string summary;
  /// Defining line for local predicates.
  std::optional<size_t> line;
};

/// Hover information for the goal token covering offset, if any.
std::optional<HoverInfo> hover(std::string_view text, size_t offset,
                               const IncludeResolver& include = {});

class HighlightError : public std::runtime_error {
 public:
  enum class Code { kStaleGeneration, kUnknownUuid, kBadChange };
  HighlightError(Code code, const std::string& message)
      : std::runtime_error(message), code_(code) {}
  [[nodiscard]] Code code() const { return code_; }
  /// stale_generation, unknown_uuid or bad_change.
  [[nodiscard]] std::string_view code_name() const;

 private:
  Code code_;
};

/// Replaces the code points [from, to) with insert.
struct TextChange {
  size_t from = 0;
  size_t to = 0;
  std::string insert;
};

/// Server-side copies of the editor documents.
class MirrorRegistry {
 public:
  explicit MirrorRegistry(IncludeResolver include = {}) : include_(std::move(include)) {}

  /// Replaces or creates the document. Returns the new generation.
  uint64_t set_text(const std::string& uuid, std::string text);
  /// Applies changes made on top of generation. Throws HighlightError.
  uint64_t apply_changes(const std::string& uuid, uint64_t generation,
                         const std::vector<TextChange>& changes);

  struct Tokens {
    uint64_t generation = 0;
    std::vector<std::vector<EnrichedToken>> groups;
  };
  Tokens enriched_tokens(const std::string& uuid) const;
  std::optional<HoverInfo> hover_info(const std::string& uuid, size_t offset) const;
  std::string text(const std::string& uuid) const;
  uint64_t generation(const std::string& uuid) const;
  void remove(const std::string& uuid);
  [[nodiscard]] size_t size() const;

 private:
  struct Mirror {
    mutable std::mutex mu;
    std::string text;
    uint64_t generation = 0;
  };
  std::shared_ptr<Mirror> find(const std::string& uuid) const;

  IncludeResolver include_;
  mutable std::shared_mutex mu_;
  std::map<std::string, std::shared_ptr<Mirror>, std::less<>> mirrors_;
};

}  // namespace plweb

#endif  // PLWEB_HIGHLIGHT_HPP
