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


#include "plweb/render.hpp"

#include "plweb/writer.hpp"

namespace plweb {

Markup Markup::Text(std::string text) {
  Markup m;
  m.text = std::move(text);
  return m;
}

Markup Markup::Element(std::string tag, std::map<std::string, std::string> attrs,
                       std::vector<Markup> children) {
  Markup m;
  m.tag = std::move(tag);
  m.attrs = std::move(attrs);
  m.children = std::move(children);
  return m;
}

nlohmann::json Markup::to_json() const {
  if (tag.empty()) return {{"text", text}};
  nlohmann::json kids = nlohmann::json::array();
  for (const Markup& c : children) kids.push_back(c.to_json());
  return {{"tag", tag}, {"attrs", attrs}, {"children", kids}};
}

nlohmann::json Rendering::to_json() const {
  nlohmann::json j = {{"renderer", renderer}, {"default", is_default}};
  if (const auto* m = std::get_if<Markup>(&payload)) {
    j["payload"] = m->to_json();
  } else {
    j["payload"] = std::get<std::string>(payload);
  }
  return j;
}

const std::vector<std::string>& known_renderers() {
  static const std::vector<std::string> names = {"chess", "sudoku", "parse_tree", "table"};
  return names;
}

std::string render_prolog(const Term& t, const Workspace& ws) { return write_answer(t, ws.ops()); }

namespace {

std::optional<std::vector<Term>> items(const Term& t) {
  if (!t.is_list_cell()) return std::nullopt;
  return t.list_items();
}

}  // namespace

std::optional<Markup> render_chess(const Term& t) {
  auto list = items(t);
  if (!list) return std::nullopt;
  auto n = static_cast<int64_t>(list->size());
  for (const Term& q : *list) {
    if (!q.is_int() || q.int_value() < 1 || q.int_value() > n) return std::nullopt;
  }
  std::vector<Markup> rows;
  for (int64_t row = 1; row <= n; ++row) {
    std::vector<Markup> cells;
    for (int64_t col = 1; col <= n; ++col) {
      std::string shade = (row + col) % 2 == 0 ? "light" : "dark";
      std::vector<Markup> glyph;
      bool queen = (*list)[static_cast<size_t>(col - 1)].int_value() == row;
      if (queen) glyph.push_back(Markup::Text("♛"));
      cells.push_back(Markup::Element("td", {{"class", queen ? shade + " queen" : shade}},
                                      std::move(glyph)));
    }
    rows.push_back(Markup::Element("tr", {}, std::move(cells)));
  }
  return Markup::Element("table", {{"class", "chess-board"}, {"data-size", std::to_string(n)}},
                         std::move(rows));
}

std::optional<Markup> render_sudoku(const Term& t) {
  auto rows = items(t);
  if (!rows || rows->size() != 9) return std::nullopt;
  std::vector<Markup> out_rows;
  for (const Term& r : *rows) {
    auto cells = items(r);
    if (!cells || cells->size() != 9) return std::nullopt;
    std::vector<Markup> out_cells;
    for (const Term& c : *cells) {
      if (!c.is_int() || c.int_value() < 1 || c.int_value() > 9) return std::nullopt;
      out_cells.push_back(
          Markup::Element("td", {}, {Markup::Text(std::to_string(c.int_value()))}));
    }
    out_rows.push_back(Markup::Element("tr", {}, std::move(out_cells)));
  }
  return Markup::Element("table", {{"class", "sudoku"}}, std::move(out_rows));
}

namespace {

/// Depth of a term with only atomic leaves, or nullopt.
std::optional<size_t> tree_depth(const Term& t) {
  if (t.is_var()) return std::nullopt;
  if (!t.is_compound()) return 0;
  size_t deepest = 0;
  for (const Term& a : t.args()) {
    auto d = tree_depth(a);
    if (!d) return std::nullopt;
    deepest = std::max(deepest, *d);
  }
  return deepest + 1;
}

Markup tree_node(const Term& t, const Workspace& ws) {
  if (!t.is_compound()) {
    return Markup::Element("span", {{"class", "leaf"}}, {Markup::Text(render_prolog(t, ws))});
  }
  std::vector<Markup> kids;
  for (const Term& a : t.args()) kids.push_back(Markup::Element("li", {}, {tree_node(a, ws)}));
  return Markup::Element(
      "div", {{"class", "node"}},
      {Markup::Element("span", {{"class", "label"}}, {Markup::Text(writeq(Term::Atom(t.name())))}),
       Markup::Element("ul", {}, std::move(kids))});
}

}  // namespace

std::optional<Markup> render_parse_tree(const Term& t, const Workspace& ws) {
  auto d = tree_depth(t);
  if (!d || *d < 2) return std::nullopt;
  return Markup::Element("div", {{"class", "parse-tree"}}, {tree_node(t, ws)});
}

std::vector<Rendering> render_term(const Term& t, const Workspace& ws) {
  std::vector<Rendering> out;
  for (const std::string& name : ws.renderers()) {
    std::optional<Markup> m;
    if (name == "chess") m = render_chess(t);
    else if (name == "sudoku") m = render_sudoku(t);
    else if (name == "parse_tree") m = render_parse_tree(t, ws);
    if (m) out.push_back({name, std::move(*m), false});
  }
  out.push_back({"prolog", render_prolog(t, ws), false});
  out.front().is_default = true;
  return out;
}

Markup render_table(const std::vector<std::string>& columns,
                    const std::vector<Solution>& solutions, const Workspace& ws) {
  std::vector<Markup> head;
  for (const std::string& c : columns) head.push_back(Markup::Element("th", {}, {Markup::Text(c)}));
  std::vector<Markup> rows;
  for (const Solution& s : solutions) {
    std::vector<Markup> cells;
    for (const std::string& c : columns) {
      Markup cell = Markup::Element("td");
      for (const auto& [name, value] : s.bindings) {
        if (name != c) continue;
        Rendering r = render_term(value, ws).front();
        if (auto* m = std::get_if<Markup>(&r.payload)) {
          cell.children.push_back(std::move(*m));
        } else {
          cell.children.push_back(Markup::Text(std::get<std::string>(r.payload)));
        }
      }
      cells.push_back(std::move(cell));
    }
    rows.push_back(Markup::Element("tr", {}, std::move(cells)));
  }
  return Markup::Element("table", {{"class", "answers"}},
                         {Markup::Element("thead", {}, {Markup::Element("tr", {}, std::move(head))}),
                          Markup::Element("tbody", {}, std::move(rows))});
}

}  // namespace plweb
