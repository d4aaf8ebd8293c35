#include "netsem/eval.hpp"

#include <cmath>
#include <string>

#include "netsem/error.hpp"

namespace netsem {

Value FriendLookup(std::span<const double> column, const NetworkMatrix& net,
                   std::span<const std::int32_t> positions, bool fill_zero) {
  const std::int32_t n = net.n();
  if (static_cast<std::int32_t>(column.size()) != n) {
    throw EvalError("column length does not match the network size");
  }
  const auto width = static_cast<std::int32_t>(positions.size());
  for (std::int32_t pos : positions) {
    if (pos < 0) throw EvalError("negative friend index");
    if (pos > net.kmax()) {
      throw EvalError("friend index " + std::to_string(pos) + " exceeds Kmax = " +
                      std::to_string(net.kmax()));
    }
  }
  const double fill = fill_zero ? 0.0 : kMissing;
  Value out(n, width);
  for (std::int32_t i = 0; i < n; ++i) {
    auto row = net.Row(i);
    const std::int32_t have = net.NumFriends(i);
    for (std::int32_t k = 0; k < width; ++k) {
      const std::int32_t pos = positions[k];
      double v;
      if (pos == 0) {
        v = column[i];
      } else if (pos <= have) {
        v = column[row[pos - 1]];
      } else {
        v = fill;
      }
      if (fill_zero && IsMissing(v)) v = 0.0;
      out(i, k) = v;
    }
  }
  return out;
}

namespace {

[[noreturn]] void NeedNetwork(const std::string& what) {
  throw EvalError("'" + what + "' needs a network, but no network is attached");
}

std::int32_t Broadcast(std::int32_t a, std::int32_t b, const char* what) {
  if (a == b || b == 1) return a;
  if (a == 1) return b;
  throw EvalError(std::string("incompatible ") + what);
}

double ApplyBinary(BinaryOp op, double a, double b) {
  const bool missing = IsMissing(a) || IsMissing(b);
  switch (op) {
    case BinaryOp::kAdd: return a + b;
    case BinaryOp::kSub: return a - b;
    case BinaryOp::kMul: return a * b;
    case BinaryOp::kDiv: return a / b;
    case BinaryOp::kPow: return std::pow(a, b);
    default: break;
  }
  if (missing) return kMissing;
  switch (op) {
    case BinaryOp::kLt: return a < b ? 1.0 : 0.0;
    case BinaryOp::kLe: return a <= b ? 1.0 : 0.0;
    case BinaryOp::kGt: return a > b ? 1.0 : 0.0;
    case BinaryOp::kGe: return a >= b ? 1.0 : 0.0;
    case BinaryOp::kEq: return a == b ? 1.0 : 0.0;
    case BinaryOp::kNe: return a != b ? 1.0 : 0.0;
    case BinaryOp::kAnd: return (a != 0.0 && b != 0.0) ? 1.0 : 0.0;
    case BinaryOp::kOr: return (a != 0.0 || b != 0.0) ? 1.0 : 0.0;
    default: return kMissing;
  }
}

class Evaluator {
 public:
  explicit Evaluator(const EvalContext& ctx) : ctx_(ctx) {}

  Value operator()(const NumberLit& n) const { return Value::Scalar(n.value); }

  Value operator()(const VarRef& v) const {
    if (v.name == kReservedFriendCount) {
      if (ctx_.network == nullptr) NeedNetwork(v.name);
      std::vector<double> counts(ctx_.network->n_friends().begin(),
                                 ctx_.network->n_friends().end());
      return Value::Column(std::move(counts));
    }
    if (v.name == kReservedKmax) {
      if (ctx_.network == nullptr) NeedNetwork(v.name);
      return Value::Scalar(ctx_.network->kmax());
    }
    if (ctx_.scalars != nullptr) {
      if (auto it = ctx_.scalars->find(v.name); it != ctx_.scalars->end()) {
        return Value::Scalar(it->second);
      }
    }
    const Column* col = ctx_.data != nullptr ? ctx_.data->Find(v.name) : nullptr;
    if (col == nullptr) throw EvalError("undefined variable '" + v.name + "'");
    return Value::Column(col->values);
  }

  Value operator()(const FriendRef& f) const {
    if (ctx_.scalars != nullptr && ctx_.scalars->contains(f.name)) {
      throw EvalError("type mismatch: '" + f.name + "' is a scalar parameter, not a column");
    }
    const Column* col = ctx_.data != nullptr ? ctx_.data->Find(f.name) : nullptr;
    if (col == nullptr) throw EvalError("undefined variable '" + f.name + "'");
    if (ctx_.network == nullptr) NeedNetwork(f.name + "[[...]]");
    const NetworkMatrix& net = *ctx_.network;
    const std::int32_t hi = f.range.hi_is_kmax ? net.kmax() : f.range.hi;
    if (hi < f.range.lo) {
      throw EvalError("friend range " + std::to_string(f.range.lo) + ":Kmax of '" + f.name +
                      "' is empty because Kmax = " + std::to_string(net.kmax()));
    }
    // Positions past Kmax exist for nobody: they are missing (or 0) for every unit.
    std::vector<std::int32_t> inside;
    for (std::int32_t p = f.range.lo; p <= std::min(hi, net.kmax()); ++p) inside.push_back(p);
    Value within = FriendLookup(col->values, net, inside, ctx_.replace_na_with_zero);
    const std::int32_t width = hi - f.range.lo + 1;
    if (width == within.cols()) return within;
    Value out(net.n(), width, ctx_.replace_na_with_zero ? 0.0 : kMissing);
    for (std::int32_t i = 0; i < net.n(); ++i) {
      for (std::int32_t k = 0; k < within.cols(); ++k) out(i, k) = within(i, k);
    }
    return out;
  }

  Value operator()(const Call& c) const {
    const FunctionDef* def = ctx_.registry->Find(c.function);
    if (def == nullptr) throw EvalError("unknown function '" + c.function + "'");
    std::vector<Value> args;
    args.reserve(c.args.size());
    for (const auto& a : c.args) args.push_back(Eval(a));
    return def->impl(args, c.na_rm);
  }

  Value operator()(const Unary& u) const {
    Value x = Eval(u.operand);
    for (double& v : x.data()) {
      if (u.op == UnaryOp::kNegate) {
        v = -v;
      } else if (u.op == UnaryOp::kNot && !IsMissing(v)) {
        v = v == 0.0 ? 1.0 : 0.0;
      }
    }
    return x;
  }

  Value operator()(const Binary& b) const {
    const Value x = Eval(b.lhs);
    const Value y = Eval(b.rhs);
    const std::int32_t rows = Broadcast(x.rows(), y.rows(), "row counts");
    const std::int32_t cols = Broadcast(x.cols(), y.cols(), "column counts");
    Value out(rows, cols);
    for (std::int32_t r = 0; r < rows; ++r) {
      for (std::int32_t c = 0; c < cols; ++c) out(r, c) = ApplyBinary(b.op, x.At(r, c), y.At(r, c));
    }
    return out;
  }

  Value Eval(const Expression& e) const {
    return std::visit(*this, e.node().base());
  }

 private:
  const EvalContext& ctx_;
};

}  // namespace

Value Evaluate(const Expression& expr, const EvalContext& ctx) {
  return Evaluator(ctx).Eval(expr);
}

}  // namespace netsem
