#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "netsem/value.hpp"

namespace netsem {

// Friend positions lo..hi (inclusive). Position 0 is the unit itself; hi may
// be the reserved symbol Kmax, resolved against the attached network.
struct FriendRange {
  std::int32_t lo = 0;
  std::int32_t hi = 0;
  bool hi_is_kmax = false;

  friend bool operator==(const FriendRange&, const FriendRange&) = default;
};

enum class UnaryOp { kNegate, kPlus, kNot };
enum class BinaryOp { kAdd, kSub, kMul, kDiv, kPow, kLt, kLe, kGt, kGe, kEq, kNe, kAnd, kOr };

struct ExprNode;

// Immutable formula AST with shared structure.
class Expression {
 public:
  Expression();
  explicit Expression(ExprNode node);

  const ExprNode& node() const { return *node_; }

  friend bool operator==(const Expression& a, const Expression& b);

 private:
  std::shared_ptr<const ExprNode> node_;
};

struct NumberLit {
  double value = 0.0;
  friend bool operator==(const NumberLit&, const NumberLit&) = default;
};
struct VarRef {
  std::string name;
  friend bool operator==(const VarRef&, const VarRef&) = default;
};
struct FriendRef {
  std::string name;
  FriendRange range;
  friend bool operator==(const FriendRef&, const FriendRef&) = default;
};
struct Call {
  std::string function;
  std::vector<Expression> args;
  bool na_rm = false;
  friend bool operator==(const Call&, const Call&) = default;
};
struct Unary {
  UnaryOp op;
  Expression operand;
  friend bool operator==(const Unary&, const Unary&) = default;
};
struct Binary {
  BinaryOp op;
  Expression lhs;
  Expression rhs;
  friend bool operator==(const Binary&, const Binary&) = default;
};

struct ExprNode : std::variant<NumberLit, VarRef, FriendRef, Call, Unary, Binary> {
  using variant::variant;
  const variant& base() const { return *this; }
};

inline Expression::Expression() : node_(std::make_shared<const ExprNode>(NumberLit{})) {}
inline Expression::Expression(ExprNode node)
    : node_(std::make_shared<const ExprNode>(std::move(node))) {}

inline bool operator==(const Expression& a, const Expression& b) {
  if (a.node_ == b.node_) return true;
  return a.node_->base() == b.node_->base();
}

// Vectorised function: receives evaluated arguments and the na.rm flag.
using FunctionImpl = std::function<Value(const std::vector<Value>& args, bool na_rm)>;

struct FunctionDef {
  std::int32_t min_args = 1;
  std::int32_t max_args = 1;  // -1: unbounded
  bool accepts_na_rm = false;
  FunctionImpl impl;
};

// Whitelisted functions. The default registry has sum, mean, plogis, log,
// exp, sqrt, abs, min, max, ifelse and c.
class FunctionRegistry {
 public:
  static const FunctionRegistry& Default();

  void Register(std::string name, FunctionDef def);
  const FunctionDef* Find(std::string_view name) const;

 private:
  std::map<std::string, FunctionDef, std::less<>> functions_;
};

inline constexpr std::string_view kReservedFriendCount = "nF";
inline constexpr std::string_view kReservedKmax = "Kmax";
bool IsReservedName(std::string_view name);

Expression Parse(std::string_view text,
                 const FunctionRegistry& registry = FunctionRegistry::Default());

// Fully parenthesised text that parses back to the same tree.
std::string ToString(const Expression& expr);

// Node names the expression reads, directly or through friend references.
// Reserved names and the given scalar parameters are excluded.
std::set<std::string> Dependencies(const Expression& expr,
                                   const std::set<std::string>& parameters = {});

// True when the expression reads friends: a [[...]] reference, nF or Kmax.
bool UsesNetwork(const Expression& expr);

// True for a bare reference to `name`.
bool IsPlainReference(const Expression& expr, std::string_view name);

}  // namespace netsem
