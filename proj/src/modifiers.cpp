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

#include "plweb/modifiers.hpp"

#include <algorithm>

#include "plweb/engine.hpp"
#include "plweb/reader.hpp"

namespace plweb {

namespace {

int64_t fresh_var_id(const Term& query, const std::vector<std::pair<std::string, Term>>& names) {
  int64_t id = 0;
  for (const Term& v : term_variables(query)) id = std::max(id, v.var_id());
  for (const auto& [name, v] : names) {
    if (v.is_var()) id = std::max(id, v.var_id());
  }
  return id + 1;
}

bool name_taken(const std::vector<std::pair<std::string, Term>>& names, const std::string& n) {
  return std::any_of(names.begin(), names.end(), [&n](const auto& p) { return p.first == n; });
}

}  // namespace

std::optional<Modifier> parse_modifier(std::string_view text) {
  Term t;
  try {
    t = read_term_from_string(text, OperatorTable::Default(), true).term;
  } catch (const SyntaxError&) {
    return std::nullopt;
  }
  Modifier m;
  if (t.is_atom("count_all")) {
    m.kind = Modifier::Kind::kCountAll;
  } else if (t.is_atom("distinct")) {
    m.kind = Modifier::Kind::kDistinct;
  } else if (t.is_atom("time")) {
    m.kind = Modifier::Kind::kTime;
  } else if (t.is_atom("debug")) {
    m.kind = Modifier::Kind::kDebug;
  } else if (t.is_compound("limit", 1) && t.arg(0).is_int() && t.arg(0).int_value() > 0) {
    m.kind = Modifier::Kind::kLimit;
    m.count = t.arg(0).int_value();
  } else if (t.is_compound("order_by", 2) && t.arg(0).is_var() &&
             (t.arg(1).is_atom("asc") || t.arg(1).is_atom("desc"))) {
    m.kind = Modifier::Kind::kOrderBy;
    m.var = t.arg(0).name();
    m.descending = t.arg(1).is_atom("desc");
  } else if (t.is_compound("order_by", 1) && t.arg(0).is_var()) {
    m.kind = Modifier::Kind::kOrderBy;
    m.var = t.arg(0).name();
  } else {
    return std::nullopt;
  }
  return m;
}

ModifiedQuery apply_modifier(const Term& query,
                             const std::vector<std::pair<std::string, Term>>& var_names,
                             const Modifier& modifier) {
  ModifiedQuery out{query, var_names, false};
  switch (modifier.kind) {
    case Modifier::Kind::kCountAll: {
      std::string name = "Count";
      for (int i = 1; name_taken(var_names, name); ++i) name = "Count" + std::to_string(i);
      Term count = Term::Var(fresh_var_id(query, var_names), name);
      out.goal = Term::Compound("aggregate_all", {Term::Atom("count"), query, count});
      out.var_names.emplace_back(name, count);
      break;
    }
    case Modifier::Kind::kOrderBy: {
      auto it = std::find_if(var_names.begin(), var_names.end(),
                             [&](const auto& p) { return p.first == modifier.var; });
      if (it == var_names.end()) {
        throw PrologError(Term::Compound(
            "error", {Term::Compound("domain_error", {Term::Atom("query_variable"),
                                                      Term::Atom(modifier.var)}),
                      Term::Var(-1, "_")}));
      }
      Term spec = Term::Compound(modifier.descending ? "desc" : "asc", {it->second});
      out.goal = Term::Compound("order_by", {Term::List({spec}), query});
      break;
    }
    case Modifier::Kind::kDistinct: {
      std::vector<Term> vars;
      for (const auto& [name, v] : var_names) {
        if (!name.empty() && name[0] != '_') vars.push_back(v);
      }
      Term witness = vars.empty() ? Term::Atom("v") : Term::Compound("v", vars);
      out.goal = Term::Compound("distinct", {witness, query});
      break;
    }
    case Modifier::Kind::kLimit:
      out.goal = Term::Compound("limit", {Term::Int(modifier.count), query});
      break;
    case Modifier::Kind::kTime: out.goal = Term::Compound("time", {query}); break;
    case Modifier::Kind::kDebug: out.debug = true; break;
  }
  return out;
}

}  // namespace plweb
