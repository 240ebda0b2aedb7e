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

#include <cmath>
#include <limits>
#include <numeric>

#include "machine.hpp"

namespace plweb::detail {

namespace {

enum class Op {
  kAdd, kSub, kMul, kDiv, kIntDiv, kDivFloor, kMod, kRem, kMin, kMax, kNeg, kPos, kAbs, kSign,
  kGcd, kPow, kCaret, kSqrt, kSin, kCos, kTan, kAsin, kAcos, kAtan, kAtan2, kExp, kLog, kLog2,
  kLogBase, kFloat, kInteger, kIntPart, kFracPart, kTruncate, kRound, kCeiling, kFloor, kShr,
  kShl, kAnd, kOr, kXor, kNot, kMsb, kPi, kE, kInf, kNan, kEpsilon, kMaxTagged, kCodeList,
};

struct OpSpec {
  const char* name;
  uint32_t arity;
  Op op;
};

constexpr OpSpec kOps[] = {
    {"+", 2, Op::kAdd},           {"-", 2, Op::kSub},
    {"*", 2, Op::kMul},           {"/", 2, Op::kDiv},
    {"//", 2, Op::kIntDiv},       {"div", 2, Op::kDivFloor},
    {"mod", 2, Op::kMod},         {"rem", 2, Op::kRem},
    {"min", 2, Op::kMin},         {"max", 2, Op::kMax},
    {"-", 1, Op::kNeg},           {"+", 1, Op::kPos},
    {"abs", 1, Op::kAbs},         {"sign", 1, Op::kSign},
    {"gcd", 2, Op::kGcd},         {"**", 2, Op::kPow},
    {"^", 2, Op::kCaret},         {"sqrt", 1, Op::kSqrt},
    {"sin", 1, Op::kSin},         {"cos", 1, Op::kCos},
    {"tan", 1, Op::kTan},         {"asin", 1, Op::kAsin},
    {"acos", 1, Op::kAcos},       {"atan", 1, Op::kAtan},
    {"atan", 2, Op::kAtan2},      {"atan2", 2, Op::kAtan2},
    {"exp", 1, Op::kExp},         {"log", 1, Op::kLog},
    {"log2", 1, Op::kLog2},       {"log", 2, Op::kLogBase},
    {"float", 1, Op::kFloat},     {"integer", 1, Op::kInteger},
    {"float_integer_part", 1, Op::kIntPart},
    {"float_fractional_part", 1, Op::kFracPart},
    {"truncate", 1, Op::kTruncate}, {"round", 1, Op::kRound},
    {"ceiling", 1, Op::kCeiling}, {"floor", 1, Op::kFloor},
    {">>", 2, Op::kShr},          {"<<", 2, Op::kShl},
    {"/\\", 2, Op::kAnd},         {"\\/", 2, Op::kOr},
    {"xor", 2, Op::kXor},         {"\\", 1, Op::kNot},
    {"msb", 1, Op::kMsb},         {"pi", 0, Op::kPi},
    {"e", 0, Op::kE},             {"inf", 0, Op::kInf},
    {"infinite", 0, Op::kInf},    {"nan", 0, Op::kNan},
    {"epsilon", 0, Op::kEpsilon}, {"max_tagged_integer", 0, Op::kMaxTagged},
    {".", 2, Op::kCodeList},
};

const std::unordered_map<uint64_t, Op>& op_table() {
  static const auto* table = [] {
    auto* t = new std::unordered_map<uint64_t, Op>;
    AtomTable atoms;
    for (const std::string& n : reserved_atoms()) atoms.intern(n);
    for (const OpSpec& s : kOps) {
      auto id = atoms.find(s.name);
      t->emplace(functor_key(*id, s.arity), s.op);
    }
    return t;
  }();
  return *table;
}

Number make_int(int64_t v) { return {true, v, 0}; }
Number make_float(double v) { return {false, 0, v}; }

class Evaluator {
 public:
  explicit Evaluator(Machine& m) : m_(m) {}

  Number apply(Op op, const Number* a) {
    switch (op) {
      case Op::kAdd: {
        if (a[0].is_int && a[1].is_int) {
          int64_t r;
          if (__builtin_add_overflow(a[0].i, a[1].i, &r)) overflow();
          return make_int(r);
        }
        return flt(a[0].as_double() + a[1].as_double());
      }
      case Op::kSub: {
        if (a[0].is_int && a[1].is_int) {
          int64_t r;
          if (__builtin_sub_overflow(a[0].i, a[1].i, &r)) overflow();
          return make_int(r);
        }
        return flt(a[0].as_double() - a[1].as_double());
      }
      case Op::kMul: {
        if (a[0].is_int && a[1].is_int) {
          int64_t r;
          if (__builtin_mul_overflow(a[0].i, a[1].i, &r)) overflow();
          return make_int(r);
        }
        return flt(a[0].as_double() * a[1].as_double());
      }
      case Op::kDiv: {
        if (a[0].is_int && a[1].is_int) {
          if (a[1].i == 0) m_.evaluation_error("zero_divisor");
          if (a[1].i == -1) return apply(Op::kNeg, a);
          if (a[0].i % a[1].i == 0) return make_int(a[0].i / a[1].i);
          return flt(static_cast<double>(a[0].i) / static_cast<double>(a[1].i));
        }
        if (a[1].as_double() == 0.0) m_.evaluation_error("zero_divisor");
        return flt(a[0].as_double() / a[1].as_double());
      }
      case Op::kIntDiv:
      case Op::kDivFloor:
      case Op::kMod:
      case Op::kRem: {
        int64_t x = want_int(a[0]);
        int64_t y = want_int(a[1]);
        if (y == 0) m_.evaluation_error("zero_divisor");
        if (y == -1) {
          if (op == Op::kMod || op == Op::kRem) return make_int(0);
          if (x == std::numeric_limits<int64_t>::min()) overflow();
          return make_int(-x);
        }
        int64_t q = x / y;
        int64_t r = x % y;
        if (op == Op::kIntDiv) return make_int(q);
        if (op == Op::kRem) return make_int(r);
        bool adjust = r != 0 && ((r < 0) != (y < 0));
        if (op == Op::kMod) return make_int(adjust ? r + y : r);
        return make_int(adjust ? q - 1 : q);
      }
      case Op::kMin:
      case Op::kMax: {
        bool less;
        if (a[0].is_int && a[1].is_int) {
          less = a[0].i < a[1].i;
        } else {
          less = a[0].as_double() < a[1].as_double();
        }
        if (op == Op::kMin) return less ? a[0] : a[1];
        return less ? a[1] : a[0];
      }
      case Op::kNeg:
        if (a[0].is_int) {
          if (a[0].i == std::numeric_limits<int64_t>::min()) overflow();
          return make_int(-a[0].i);
        }
        return make_float(-a[0].f);
      case Op::kPos: return a[0];
      case Op::kAbs:
        if (a[0].is_int) {
          if (a[0].i == std::numeric_limits<int64_t>::min()) overflow();
          return make_int(a[0].i < 0 ? -a[0].i : a[0].i);
        }
        return make_float(std::fabs(a[0].f));
      case Op::kSign:
        if (a[0].is_int) return make_int((a[0].i > 0) - (a[0].i < 0));
        return make_float(a[0].f > 0 ? 1.0 : a[0].f < 0 ? -1.0 : 0.0);
      case Op::kGcd: return make_int(std::gcd(want_int(a[0]), want_int(a[1])));
      case Op::kPow:
      case Op::kCaret: {
        if (a[0].is_int && a[1].is_int) return int_pow(a[0].i, a[1].i, op == Op::kCaret);
        return flt(std::pow(a[0].as_double(), a[1].as_double()));
      }
      case Op::kSqrt:
        if (a[0].as_double() < 0) m_.evaluation_error("undefined");
        return flt(std::sqrt(a[0].as_double()));
      case Op::kSin: return flt(std::sin(a[0].as_double()));
      case Op::kCos: return flt(std::cos(a[0].as_double()));
      case Op::kTan: return flt(std::tan(a[0].as_double()));
      case Op::kAsin:
        if (std::fabs(a[0].as_double()) > 1) m_.evaluation_error("undefined");
        return flt(std::asin(a[0].as_double()));
      case Op::kAcos:
        if (std::fabs(a[0].as_double()) > 1) m_.evaluation_error("undefined");
        return flt(std::acos(a[0].as_double()));
      case Op::kAtan: return flt(std::atan(a[0].as_double()));
      case Op::kAtan2: return flt(std::atan2(a[0].as_double(), a[1].as_double()));
      case Op::kExp: return flt(std::exp(a[0].as_double()));
      case Op::kLog:
        if (a[0].as_double() <= 0) m_.evaluation_error("undefined");
        return flt(std::log(a[0].as_double()));
      case Op::kLog2:
        if (a[0].as_double() <= 0) m_.evaluation_error("undefined");
        return flt(std::log2(a[0].as_double()));
      case Op::kLogBase:
        if (a[0].as_double() <= 0 || a[1].as_double() <= 0) m_.evaluation_error("undefined");
        return flt(std::log(a[1].as_double()) / std::log(a[0].as_double()));
      case Op::kFloat: return make_float(a[0].as_double());
      case Op::kInteger:
        if (a[0].is_int) return a[0];
        return to_int(std::round(a[0].f));
      case Op::kIntPart: return make_float(std::trunc(a[0].as_double()));
      case Op::kFracPart: {
        double x = a[0].as_double();
        return make_float(x - std::trunc(x));
      }
      case Op::kTruncate: return a[0].is_int ? a[0] : to_int(std::trunc(a[0].f));
      case Op::kRound: return a[0].is_int ? a[0] : to_int(std::round(a[0].f));
      case Op::kCeiling: return a[0].is_int ? a[0] : to_int(std::ceil(a[0].f));
      case Op::kFloor: return a[0].is_int ? a[0] : to_int(std::floor(a[0].f));
      case Op::kShr: {
        int64_t s = want_int(a[1]);
        if (s < 0) return apply_shift(want_int(a[0]), -s);
        return make_int(s >= 64 ? (want_int(a[0]) < 0 ? -1 : 0) : want_int(a[0]) >> s);
      }
      case Op::kShl: {
        int64_t s = want_int(a[1]);
        if (s < 0) return make_int(want_int(a[0]) >> std::min<int64_t>(-s, 63));
        return apply_shift(want_int(a[0]), s);
      }
      case Op::kAnd: return make_int(want_int(a[0]) & want_int(a[1]));
      case Op::kOr: return make_int(want_int(a[0]) | want_int(a[1]));
      case Op::kXor: return make_int(want_int(a[0]) ^ want_int(a[1]));
      case Op::kNot: return make_int(~want_int(a[0]));
      case Op::kMsb: {
        int64_t x = want_int(a[0]);
        if (x <= 0) m_.type_error("not_less_than_one", m_.new_int(x));
        return make_int(63 - __builtin_clzll(static_cast<uint64_t>(x)));
      }
      case Op::kPi: return make_float(M_PI);
      case Op::kE: return make_float(M_E);
      case Op::kInf: return make_float(std::numeric_limits<double>::infinity());
      case Op::kNan: return make_float(std::numeric_limits<double>::quiet_NaN());
      case Op::kEpsilon: return make_float(std::numeric_limits<double>::epsilon());
      case Op::kMaxTagged: return make_int((int64_t{1} << 60) - 1);
      case Op::kCodeList: return a[0];
    }
    return make_int(0);
  }

  Number run(uint64_t root) {
    struct Task {
      uint64_t addr;
      Op op;
      uint32_t arity;
      bool expanded;
    };
    std::vector<Task> tasks{{root, Op::kPos, 0, false}};
    std::vector<Number> values;
    while (!tasks.empty()) {
      Task t = tasks.back();
      if (t.expanded) {
        tasks.pop_back();
        Number args[2];
        for (uint32_t i = t.arity; i-- > 0;) {
          args[i] = values.back();
          values.pop_back();
        }
        values.push_back(apply(t.op, args));
        continue;
      }
      tasks.pop_back();
      uint64_t a = m_.deref(t.addr);
      const Cell& c = m_.cell(a);
      switch (c.tag) {
        case Tag::kInt: values.push_back(make_int(c.i)); continue;
        case Tag::kFlt: values.push_back(make_float(c.f)); continue;
        case Tag::kRef: m_.instantiation_error();
        case Tag::kAtom: {
          auto it = op_table().find(functor_key(static_cast<uint32_t>(c.u), 0));
          if (it == op_table().end()) not_evaluable(static_cast<uint32_t>(c.u), 0);
          values.push_back(apply(it->second, nullptr));
          continue;
        }
        case Tag::kStruct: break;
        default: m_.type_error("evaluable", a);
      }
      const Cell& f = m_.cell(c.u);
      auto name = static_cast<uint32_t>(f.u);
      auto it = op_table().find(functor_key(name, f.arity));
      if (it == op_table().end()) not_evaluable(name, f.arity);
      if (it->second == Op::kCodeList) {
        // "a" style single-code lists evaluate to the code.
        const Cell& tail = m_.cell(m_.deref(c.u + 2));
        if (tail.tag != Tag::kAtom || tail.u != atom::kNil) m_.type_error("evaluable", a);
        tasks.push_back({a, Op::kPos, 1, true});
        tasks.push_back({c.u + 1, Op::kPos, 0, false});
        continue;
      }
      tasks.push_back({a, it->second, f.arity, true});
      for (uint32_t i = f.arity; i-- > 0;) tasks.push_back({c.u + 1 + i, Op::kPos, 0, false});
    }
    return values.back();
  }

 private:
  [[noreturn]] void overflow() { m_.evaluation_error("int_overflow"); }

  [[noreturn]] void not_evaluable(uint32_t name, uint32_t arity) {
    m_.throw_error(Term::Compound(
        "type_error",
        {Term::Atom("evaluable"),
         Term::Compound("/", {Term::Atom(m_.atom_name(name)), Term::Int(arity)})}));
  }

  int64_t want_int(const Number& n) {
    if (!n.is_int) m_.type_error("integer", m_.number_cell(n));
    return n.i;
  }

  Number flt(double v) {
    if (std::isnan(v)) m_.evaluation_error("undefined");
    if (std::isinf(v)) m_.evaluation_error("float_overflow");
    return make_float(v);
  }

  Number to_int(double v) {
    if (std::isnan(v) || std::isinf(v)) m_.evaluation_error("undefined");
    if (v >= 9.2233720368547758e18 || v < -9.2233720368547758e18) overflow();
    return make_int(static_cast<int64_t>(v));
  }

  Number apply_shift(int64_t x, int64_t s) {
    if (x == 0) return make_int(0);
    if (s >= 63) overflow();
    int64_t r = static_cast<int64_t>(static_cast<uint64_t>(x) << s);
    if ((r >> s) != x) overflow();
    return make_int(r);
  }

  Number int_pow(int64_t base, int64_t exp, bool strict) {
    if (exp < 0) {
      if (base == 1) return make_int(1);
      if (base == -1) return make_int(exp % 2 == 0 ? 1 : -1);
      if (strict) {
        if (base == 0) m_.evaluation_error("zero_divisor");
        m_.type_error("float", m_.new_int(base));
      }
      return flt(std::pow(static_cast<double>(base), static_cast<double>(exp)));
    }
    int64_t result = 1;
    int64_t b = base;
    while (exp > 0) {
      if (exp & 1) {
        if (__builtin_mul_overflow(result, b, &result)) overflow();
      }
      exp >>= 1;
      if (exp > 0 && __builtin_mul_overflow(b, b, &b)) overflow();
    }
    return make_int(result);
  }

  Machine& m_;
};

}  // namespace

Number Machine::eval(uint64_t addr) { return Evaluator(*this).run(addr); }

std::vector<std::string> arithmetic_function_names() {
  std::vector<std::string> out;
  for (const OpSpec& s : kOps) out.emplace_back(s.name);
  return out;
}

}  // namespace plweb::detail
