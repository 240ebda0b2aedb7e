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


#ifndef PLWEB_RENDER_HPP
#define PLWEB_RENDER_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "plweb/engine.hpp"
#include "plweb/term.hpp"
#include "plweb/workspace.hpp"

namespace plweb {

/// Renderer-neutral markup: an element with attributes and children, or a
/// text node when tag is empty.
struct Markup {
  std::string tag;
  std::map<std::string, std::string> attrs;
  std::vector<Markup> children;
  std::string text;

  static Markup Text(std::string text);
  static Markup Element(std::string tag, std::map<std::string, std::string> attrs = {},
                        std::vector<Markup> children = {});
  /// {"tag","attrs","children"} for elements, {"text"} for text nodes.
  [[nodiscard]] nlohmann::json to_json() const;
};

struct Rendering {
  /// prolog, table, chess, sudoku or parse_tree.
  std::string renderer;
  /// Markup, or plain text for the prolog renderer.
  std::variant<Markup, std::string> payload;
  bool is_default = false;

  [[nodiscard]] nlohmann::json to_json() const;
};

/// Renderer names understood by use_rendering/1.
const std::vector<std::string>& known_renderers();

/// Renderings offered by the workspace's enabled renderers, in directive
/// order, followed by the prolog text. The first one is the default.
std::vector<Rendering> render_term(const Term& t, const Workspace& ws);

/// Quoted text honoring the workspace operators.
std::string render_prolog(const Term& t, const Workspace& ws);
/// A board for a list of N integers in 1..N, queen in column i at row t[i].
std::optional<Markup> render_chess(const Term& t);
/// A 9x9 grid for a list of nine lists of nine integers in 1..9.
std::optional<Markup> render_sudoku(const Term& t);
/// A nested tree for a compound of depth at least 2 with atomic leaves.
std::optional<Markup> render_parse_tree(const Term& t, const Workspace& ws);

/// One column per variable, one row per solution; cells hold the default
/// rendering of each value.
Markup render_table(const std::vector<std::string>& columns,
                    const std::vector<Solution>& solutions, const Workspace& ws);

}  // namespace plweb

#endif  // PLWEB_RENDER_HPP
