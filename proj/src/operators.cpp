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

#include "plweb/operators.hpp"

#include <initializer_list>

namespace plweb {

int OpDef::left_max() const {
  switch (type) {
    case OpType::kXfx:
    case OpType::kXfy:
    case OpType::kXf: return priority - 1;
    case OpType::kYfx:
    case OpType::kYf: return priority;
    default: return 0;
  }
}

int OpDef::right_max() const {
  switch (type) {
    case OpType::kXfx:
    case OpType::kYfx:
    case OpType::kFx: return priority - 1;
    case OpType::kXfy:
    case OpType::kFy: return priority;
    default: return 0;
  }
}

OpClass op_class(OpType type) {
  switch (type) {
    case OpType::kFy:
    case OpType::kFx: return OpClass::kPrefix;
    case OpType::kXf:
    case OpType::kYf: return OpClass::kPostfix;
    default: return OpClass::kInfix;
  }
}

std::optional<OpType> parse_op_type(std::string_view text) {
  if (text == "xfx") return OpType::kXfx;
  if (text == "xfy") return OpType::kXfy;
  if (text == "yfx") return OpType::kYfx;
  if (text == "fy") return OpType::kFy;
  if (text == "fx") return OpType::kFx;
  if (text == "xf") return OpType::kXf;
  if (text == "yf") return OpType::kYf;
  return std::nullopt;
}

std::string_view op_type_name(OpType type) {
  switch (type) {
    case OpType::kXfx: return "xfx";
    case OpType::kXfy: return "xfy";
    case OpType::kYfx: return "yfx";
    case OpType::kFy: return "fy";
    case OpType::kFx: return "fx";
    case OpType::kXf: return "xf";
    case OpType::kYf: return "yf";
  }
  return "xfx";
}

const OperatorTable& OperatorTable::Default() {
  static const OperatorTable table = [] {
    OperatorTable t;
    auto def = [&t](int p, OpType type, std::initializer_list<const char*> names) {
      for (const char* n : names) {
        t.entries_[{n, op_class(type)}] = OpDef{p, type};
      }
    };
    def(1200, OpType::kXfx, {":-", "-->"});
    def(1200, OpType::kFx, {":-", "?-"});
    def(1150, OpType::kFx, {"dynamic", "discontiguous", "initialization"});
    def(1100, OpType::kXfy, {";"});
    def(1050, OpType::kXfy, {"->", "*->"});
    def(1000, OpType::kXfy, {","});
    def(900, OpType::kFy, {"\\+"});
    def(700, OpType::kXfx,
        {"=", "\\=", "==", "\\==", "@<", "@>", "@=<", "@>=", "=..", "is",
         "=:=", "=\\=", "<", ">", "=<", ">="});
    def(500, OpType::kYfx, {"+", "-", "/\\", "\\/", "xor"});
    def(400, OpType::kYfx, {"*", "/", "//", "mod", "rem", "<<", ">>", "div"});
    def(200, OpType::kXfx, {"**"});
    def(200, OpType::kXfy, {"^", ":"});
    def(200, OpType::kFy, {"-", "+", "\\"});
    return t;
  }();
  return table;
}

std::optional<OpDef> OperatorTable::find(std::string_view name,
                                         OpClass cls) const {
  auto it = entries_.find(std::pair<std::string, OpClass>{std::string(name), cls});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::optional<OpDef> OperatorTable::prefix(std::string_view name) const {
  return find(name, OpClass::kPrefix);
}

std::optional<OpDef> OperatorTable::infix(std::string_view name) const {
  return find(name, OpClass::kInfix);
}

std::optional<OpDef> OperatorTable::postfix(std::string_view name) const {
  return find(name, OpClass::kPostfix);
}

bool OperatorTable::is_op(std::string_view name) const {
  return prefix(name) || infix(name) || postfix(name);
}

bool OperatorTable::add(int priority, OpType type, const std::string& name) {
  if (priority < 1 || priority > 1200) return false;
  if (name == "," || name == "|" || name == "[]" || name.empty()) return false;
  OpClass cls = op_class(type);
  // An atom cannot be both infix and postfix.
  if (cls == OpClass::kInfix && postfix(name)) return false;
  if (cls == OpClass::kPostfix && infix(name)) return false;
  entries_[{name, cls}] = OpDef{priority, type};
  return true;
}

}  // namespace plweb
