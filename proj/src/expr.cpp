#include "netsem/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <string>

#include "netsem/error.hpp"

namespace netsem {

bool IsReservedName(std::string_view name) {
  return name == kReservedFriendCount || name == kReservedKmax;
}

namespace {

enum class Tok {
  kNumber,
  kIdent,
  kLParen,
  kRParen,
  kComma,
  kOpenFriend,   // [[
  kCloseFriend,  // ]]
  kColon,
  kAssign,
  kPlus,
  kMinus,
  kStar,
  kSlash,
  kCaret,
  kLt,
  kLe,
  kGt,
  kGe,
  kEq,
  kNe,
  kNot,
  kAnd,
  kOr,
  kEnd,
};

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;
};

bool IsIdentStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }
bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '.' || c == '_';
}

std::vector<Token> Lex(std::string_view s) {
  std::vector<Token> out;
  std::size_t i = 0;
  auto push = [&](Tok k, std::size_t width) {
    out.push_back(Token{k, std::string(s.substr(i, width)), 0.0, i});
    i += width;
  };
  while (i < s.size()) {
    const char c = s[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const char next = i + 1 < s.size() ? s[i + 1] : '\0';
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && std::isdigit(static_cast<unsigned char>(next)))) {
      std::size_t j = i;
      while (j < s.size() && (std::isdigit(static_cast<unsigned char>(s[j])) || s[j] == '.')) ++j;
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          j = k;
          while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
        }
      }
      double value = 0.0;
      auto res = std::from_chars(s.data() + i, s.data() + j, value);
      if (res.ec != std::errc() || res.ptr != s.data() + j) {
        throw ParseError("malformed number '" + std::string(s.substr(i, j - i)) + "'", i);
      }
      out.push_back(Token{Tok::kNumber, std::string(s.substr(i, j - i)), value, i});
      i = j;
      continue;
    }
    if (IsIdentStart(c)) {
      std::size_t j = i;
      while (j < s.size() && IsIdentChar(s[j])) ++j;
      push(Tok::kIdent, j - i);
      continue;
    }
    switch (c) {
      case '(': push(Tok::kLParen, 1); break;
      case ')': push(Tok::kRParen, 1); break;
      case ',': push(Tok::kComma, 1); break;
      case ':': push(Tok::kColon, 1); break;
      case '+': push(Tok::kPlus, 1); break;
      case '-': push(Tok::kMinus, 1); break;
      case '*': push(Tok::kStar, 1); break;
      case '/': push(Tok::kSlash, 1); break;
      case '^': push(Tok::kCaret, 1); break;
      case '[':
        if (next != '[') throw ParseError("single '[' is not supported; use [[...]]", i);
        push(Tok::kOpenFriend, 2);
        break;
      case ']':
        if (next != ']') throw ParseError("expected ']]'", i);
        push(Tok::kCloseFriend, 2);
        break;
      case '<':
        if (next == '=') push(Tok::kLe, 2); else push(Tok::kLt, 1);
        break;
      case '>':
        if (next == '=') push(Tok::kGe, 2); else push(Tok::kGt, 1);
        break;
      case '=':
        if (next == '=') push(Tok::kEq, 2); else push(Tok::kAssign, 1);
        break;
      case '!':
        if (next == '=') push(Tok::kNe, 2); else push(Tok::kNot, 1);
        break;
      case '&':
        push(Tok::kAnd, next == '&' ? 2 : 1);
        break;
      case '|':
        push(Tok::kOr, next == '|' ? 2 : 1);
        break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
  }
  out.push_back(Token{Tok::kEnd, "", 0.0, s.size()});
  return out;
}

class Parser {
 public:
  Parser(std::string_view text, const FunctionRegistry& registry)
      : tokens_(Lex(text)), registry_(registry) {}

  Expression ParseAll() {
    Expression e = ParseOr();
    if (Peek().kind != Tok::kEnd) Fail("unexpected '" + Peek().text + "'");
    return e;
  }

 private:
  const Token& Peek(std::size_t ahead = 0) const {
    return tokens_[std::min(pos_ + ahead, tokens_.size() - 1)];
  }
  const Token& Take() { return tokens_[pos_++]; }
  bool Accept(Tok k) {
    if (Peek().kind != k) return false;
    ++pos_;
    return true;
  }
  void Expect(Tok k, const char* what) {
    if (!Accept(k)) Fail(std::string("expected ") + what);
  }
  [[noreturn]] void Fail(const std::string& msg) const { throw ParseError(msg, Peek().pos); }

  static Expression MakeBinary(BinaryOp op, Expression a, Expression b) {
    return Expression(Binary{op, std::move(a), std::move(b)});
  }

  Expression ParseOr() {
    Expression e = ParseAnd();
    while (Accept(Tok::kOr)) e = MakeBinary(BinaryOp::kOr, e, ParseAnd());
    return e;
  }
  Expression ParseAnd() {
    Expression e = ParseNot();
    while (Accept(Tok::kAnd)) e = MakeBinary(BinaryOp::kAnd, e, ParseNot());
    return e;
  }
  Expression ParseNot() {
    if (Accept(Tok::kNot)) return Expression(Unary{UnaryOp::kNot, ParseNot()});
    return ParseComparison();
  }
  Expression ParseComparison() {
    Expression e = ParseAdditive();
    while (true) {
      BinaryOp op;
      switch (Peek().kind) {
        case Tok::kLt: op = BinaryOp::kLt; break;
        case Tok::kLe: op = BinaryOp::kLe; break;
        case Tok::kGt: op = BinaryOp::kGt; break;
        case Tok::kGe: op = BinaryOp::kGe; break;
        case Tok::kEq: op = BinaryOp::kEq; break;
        case Tok::kNe: op = BinaryOp::kNe; break;
        default: return e;
      }
      Take();
      e = MakeBinary(op, e, ParseAdditive());
    }
  }
  Expression ParseAdditive() {
    Expression e = ParseMultiplicative();
    while (true) {
      if (Accept(Tok::kPlus)) {
        e = MakeBinary(BinaryOp::kAdd, e, ParseMultiplicative());
      } else if (Accept(Tok::kMinus)) {
        e = MakeBinary(BinaryOp::kSub, e, ParseMultiplicative());
      } else {
        return e;
      }
    }
  }
  Expression ParseMultiplicative() {
    Expression e = ParseUnary();
    while (true) {
      if (Accept(Tok::kStar)) {
        e = MakeBinary(BinaryOp::kMul, e, ParseUnary());
      } else if (Accept(Tok::kSlash)) {
        e = MakeBinary(BinaryOp::kDiv, e, ParseUnary());
      } else {
        return e;
      }
    }
  }
  Expression ParseUnary() {
    if (Accept(Tok::kMinus)) return Expression(Unary{UnaryOp::kNegate, ParseUnary()});
    if (Accept(Tok::kPlus)) return Expression(Unary{UnaryOp::kPlus, ParseUnary()});
    return ParsePower();
  }
  Expression ParsePower() {
    Expression base = ParsePrimary();
    if (Accept(Tok::kCaret)) return MakeBinary(BinaryOp::kPow, base, ParseUnary());
    return base;
  }

  std::int32_t ParseFriendPosition() {
    if (Peek().kind == Tok::kMinus) Fail("negative friend index");
    if (Peek().kind != Tok::kNumber) Fail("friend index must be a non-negative integer");
    const Token& t = Take();
    if (t.number != std::floor(t.number) || t.number > 1e6) {
      throw ParseError("malformed friend index '" + t.text + "'", t.pos);
    }
    return static_cast<std::int32_t>(t.number);
  }

  Expression ParseFriendRef(std::string name) {
    FriendRange range;
    if (Peek().kind == Tok::kIdent && Peek().text == kReservedKmax) {
      Fail("Kmax may only close a range, as in [[1:Kmax]]");
    }
    range.lo = ParseFriendPosition();
    range.hi = range.lo;
    if (Accept(Tok::kColon)) {
      if (Peek().kind == Tok::kIdent && Peek().text == kReservedKmax) {
        Take();
        range.hi_is_kmax = true;
        range.hi = 0;
      } else {
        const std::size_t at = Peek().pos;
        range.hi = ParseFriendPosition();
        if (range.hi < range.lo) throw ParseError("friend index range is decreasing", at);
      }
    }
    Expect(Tok::kCloseFriend, "']]'");
    return Expression(FriendRef{std::move(name), range});
  }

  Expression ParseCall(const Token& name_tok) {
    const FunctionDef* def = registry_.Find(name_tok.text);
    if (def == nullptr) throw ParseError("unknown function '" + name_tok.text + "'", name_tok.pos);
    Call call;
    call.function = name_tok.text;
    if (!Accept(Tok::kRParen)) {
      do {
        if (Peek().kind == Tok::kIdent && Peek(1).kind == Tok::kAssign) {
          const Token& arg_name = Take();
          Take();
          if (arg_name.text != "na.rm") {
            throw ParseError("unknown named argument '" + arg_name.text + "'", arg_name.pos);
          }
          if (!def->accepts_na_rm) {
            throw ParseError("function '" + call.function + "' does not take na.rm",
                             arg_name.pos);
          }
          const Token& flag = Take();
          if (flag.kind != Tok::kIdent || (flag.text != "TRUE" && flag.text != "FALSE")) {
            throw ParseError("na.rm must be TRUE or FALSE", flag.pos);
          }
          call.na_rm = flag.text == "TRUE";
        } else {
          call.args.push_back(ParseOr());
        }
      } while (Accept(Tok::kComma));
      Expect(Tok::kRParen, "')'");
    }
    const auto argc = static_cast<std::int32_t>(call.args.size());
    if (argc < def->min_args || (def->max_args >= 0 && argc > def->max_args)) {
      throw ParseError("wrong number of arguments to '" + call.function + "'", name_tok.pos);
    }
    return Expression(std::move(call));
  }

  Expression ParsePrimary() {
    const Token& t = Peek();
    switch (t.kind) {
      case Tok::kNumber:
        Take();
        return Expression(NumberLit{t.number});
      case Tok::kLParen: {
        Take();
        Expression e = ParseOr();
        Expect(Tok::kRParen, "')'");
        return e;
      }
      case Tok::kIdent: {
        const Token& name = Take();
        if (name.text == "TRUE") return Expression(NumberLit{1.0});
        if (name.text == "FALSE") return Expression(NumberLit{0.0});
        if (Accept(Tok::kLParen)) return ParseCall(name);
        if (Accept(Tok::kOpenFriend)) {
          if (IsReservedName(name.text)) {
            throw ParseError("cannot index reserved name '" + name.text + "'", name.pos);
          }
          return ParseFriendRef(name.text);
        }
        return Expression(VarRef{name.text});
      }
      case Tok::kEnd:
        Fail("unexpected end of formula");
      default:
        Fail("unexpected '" + t.text + "'");
    }
  }

  std::vector<Token> tokens_;
  std::size_t pos_ = 0;
  const FunctionRegistry& registry_;
};

std::string_view OpText(BinaryOp op) {
  switch (op) {
    case BinaryOp::kAdd: return "+";
    case BinaryOp::kSub: return "-";
    case BinaryOp::kMul: return "*";
    case BinaryOp::kDiv: return "/";
    case BinaryOp::kPow: return "^";
    case BinaryOp::kLt: return "<";
    case BinaryOp::kLe: return "<=";
    case BinaryOp::kGt: return ">";
    case BinaryOp::kGe: return ">=";
    case BinaryOp::kEq: return "==";
    case BinaryOp::kNe: return "!=";
    case BinaryOp::kAnd: return "&";
    case BinaryOp::kOr: return "|";
  }
  return "?";
}

std::string NumberText(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void Print(const Expression& e, std::string& out) {
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLit>) {
          out += NumberText(n.value);
        } else if constexpr (std::is_same_v<T, VarRef>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, FriendRef>) {
          out += n.name + "[[" + std::to_string(n.range.lo);
          if (n.range.hi_is_kmax) {
            out += ":Kmax";
          } else if (n.range.hi != n.range.lo) {
            out += ":" + std::to_string(n.range.hi);
          }
          out += "]]";
        } else if constexpr (std::is_same_v<T, Call>) {
          out += n.function + "(";
          for (std::size_t i = 0; i < n.args.size(); ++i) {
            if (i > 0) out += ", ";
            Print(n.args[i], out);
          }
          if (n.na_rm) out += n.args.empty() ? "na.rm=TRUE" : ", na.rm=TRUE";
          out += ")";
        } else if constexpr (std::is_same_v<T, Unary>) {
          out += n.op == UnaryOp::kNegate ? "(-" : (n.op == UnaryOp::kPlus ? "(+" : "(!");
          Print(n.operand, out);
          out += ")";
        } else {
          out += "(";
          Print(n.lhs, out);
          out += " ";
          out += OpText(n.op);
          out += " ";
          Print(n.rhs, out);
          out += ")";
        }
      },
      e.node().base());
}

template <typename F>
void Walk(const Expression& e, F&& visit) {
  visit(e.node());
  std::visit(
      [&](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Call>) {
          for (const auto& a : n.args) Walk(a, visit);
        } else if constexpr (std::is_same_v<T, Unary>) {
          Walk(n.operand, visit);
        } else if constexpr (std::is_same_v<T, Binary>) {
          Walk(n.lhs, visit);
          Walk(n.rhs, visit);
        }
      },
      e.node().base());
}

}  // namespace

Expression Parse(std::string_view text, const FunctionRegistry& registry) {
  return Parser(text, registry).ParseAll();
}

std::string ToString(const Expression& expr) {
  std::string out;
  Print(expr, out);
  return out;
}

std::set<std::string> Dependencies(const Expression& expr,
                                   const std::set<std::string>& parameters) {
  std::set<std::string> deps;
  Walk(expr, [&](const ExprNode& node) {
    const std::string* name = nullptr;
    if (const auto* v = std::get_if<VarRef>(&node.base())) name = &v->name;
    if (const auto* f = std::get_if<FriendRef>(&node.base())) name = &f->name;
    if (name != nullptr && !IsReservedName(*name) && !parameters.contains(*name)) {
      deps.insert(*name);
    }
  });
  return deps;
}

bool UsesNetwork(const Expression& expr) {
  bool uses = false;
  Walk(expr, [&](const ExprNode& node) {
    if (std::holds_alternative<FriendRef>(node.base())) uses = true;
    if (const auto* v = std::get_if<VarRef>(&node.base()); v != nullptr && IsReservedName(v->name)) {
      uses = true;
    }
  });
  return uses;
}

bool IsPlainReference(const Expression& expr, std::string_view name) {
  const auto* v = std::get_if<VarRef>(&expr.node().base());
  return v != nullptr && v->name == name;
}

}  // namespace netsem
