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

#ifndef PLWEB_OPERATORS_HPP
#define PLWEB_OPERATORS_HPP

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

namespace plweb {

enum class OpType { kXfx, kXfy, kYfx, kFy, kFx, kXf, kYf };
enum class OpClass { kPrefix, kInfix, kPostfix };

struct OpDef {
  int priority = 0;
  OpType type = OpType::kXfx;

  /// Maximum priority of the left and right operand.
  [[nodiscard]] int left_max() const;
  [[nodiscard]] int right_max() const;
};

OpClass op_class(OpType type);
std::optional<OpType> parse_op_type(std::string_view text);
std::string_view op_type_name(OpType type);

class OperatorTable {
 public:
  /// The operators every fresh workspace starts with.
  static const OperatorTable& Default();

  [[nodiscard]] std::optional<OpDef> prefix(std::string_view name) const;
  [[nodiscard]] std::optional<OpDef> infix(std::string_view name) const;
  [[nodiscard]] std::optional<OpDef> postfix(std::string_view name) const;
  [[nodiscard]] bool is_op(std::string_view name) const;

  /// Defines or redefines an operator. Priorities outside 1..1200 and the
  /// comma are refused.
  bool add(int priority, OpType type, const std::string& name);

 private:
  [[nodiscard]] std::optional<OpDef> find(std::string_view name,
                                          OpClass cls) const;
  std::map<std::pair<std::string, OpClass>, OpDef, std::less<>> entries_;
};

}  // namespace plweb

#endif  // PLWEB_OPERATORS_HPP
