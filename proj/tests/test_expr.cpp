#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "doctest.h"
#include "netsem/error.hpp"
#include "netsem/eval.hpp"
#include "netsem/expr.hpp"
#include "netsem/rng.hpp"

using namespace netsem;

namespace {

using Scalars = std::map<std::string, double, std::less<>>;

// Units 1..3 with friend sets {2}, {1,3}, {2}.
std::shared_ptr<const NetworkMatrix> PathNet() {
  return std::make_shared<const NetworkMatrix>(FromEdgeList(3, {{0, 1}, {1, 2}}));
}

Dataset WithColumn(const std::string& name, std::vector<double> values,
                   std::shared_ptr<const NetworkMatrix> net) {
  Dataset d(static_cast<std::int32_t>(values.size()));
  d.Add(Column{name, ColumnType::kContinuous, std::move(values)});
  d.AttachNetwork(std::move(net));
  return d;
}

Value Eval(const std::string& text, const Dataset& data, bool replace_na = false,
           const Scalars* scalars = nullptr) {
  EvalContext ctx;
  ctx.data = &data;
  ctx.network = data.network().get();
  ctx.scalars = scalars;
  ctx.replace_na_with_zero = replace_na;
  return Evaluate(Parse(text), ctx);
}

bool SameBits(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

NetworkMatrix RandomNet(Stream& rng, std::int32_t n) {
  const double p = rng.Uniform() * 0.4;
  std::vector<std::pair<std::int32_t, std::int32_t>> edges;
  for (std::int32_t i = 0; i < n; ++i)
    for (std::int32_t j = i + 1; j < n; ++j)
      if (rng.Uniform() < p) edges.emplace_back(i, j);
  return FromEdgeList(n, edges);
}

// Random tree whose printed form must parse back to itself.
Expression RandomExpr(Stream& rng, int depth) {
  static const char* kVars[] = {"W1", "A", "Y.obs", "x_2"};
  const auto pick = rng.Below(depth <= 0 ? 3 : 7);
  switch (pick) {
    case 0: return Expression(NumberLit{static_cast<double>(rng.Below(1000)) / 8.0});
    case 1: return Expression(VarRef{kVars[rng.Below(4)]});
    case 2: {
      const auto lo = static_cast<std::int32_t>(rng.Below(3));
      const bool kmax = rng.Below(2) == 0 && lo > 0;
      const auto hi = kmax ? 0 : lo + static_cast<std::int32_t>(rng.Below(3));
      return Expression(FriendRef{kVars[rng.Below(4)], FriendRange{lo, hi, kmax}});
    }
    case 3: {
      static const char* kFns[] = {"sum", "mean", "plogis", "exp"};
      const auto f = rng.Below(4);
      Call c{kFns[f], {RandomExpr(rng, depth - 1)}, f < 2 && rng.Below(2) == 0};
      return Expression(c);
    }
    case 4: {
      Call c{"ifelse", {RandomExpr(rng, depth - 1), RandomExpr(rng, depth - 1),
                        RandomExpr(rng, depth - 1)}, false};
      return Expression(c);
    }
    case 5: {
      const auto op = static_cast<UnaryOp>(rng.Below(3));
      return Expression(Unary{op, RandomExpr(rng, depth - 1)});
    }
    default: {
      const auto op = static_cast<BinaryOp>(rng.Below(13));
      return Expression(Binary{op, RandomExpr(rng, depth - 1), RandomExpr(rng, depth - 1)});
    }
  }
}

}  // namespace

TEST_CASE("parse: friend sum over Kmax") {
  const auto e = Parse("sum(A[[1:Kmax]])");
  const auto* call = std::get_if<Call>(&e.node().base());
  REQUIRE(call != nullptr);
  CHECK(call->function == "sum");
  CHECK_FALSE(call->na_rm);
  REQUIRE(call->args.size() == 1);
  const auto* ref = std::get_if<FriendRef>(&call->args[0].node().base());
  REQUIRE(ref != nullptr);
  CHECK(ref->name == "A");
  CHECK(ref->range == FriendRange{1, 0, true});
}

TEST_CASE("parse: self index and plogis") {
  const auto self = Parse("Var[[0]]");
  const auto* ref = std::get_if<FriendRef>(&self.node().base());
  REQUIRE(ref != nullptr);
  CHECK(ref->range == FriendRange{0, 0, false});

  const auto e = Parse("plogis(-0.2 + W1/3)");
  const auto* call = std::get_if<Call>(&e.node().base());
  REQUIRE(call != nullptr);
  CHECK(call->function == "plogis");
  const auto* sum = std::get_if<Binary>(&call->args[0].node().base());
  REQUIRE(sum != nullptr);
  CHECK(sum->op == BinaryOp::kAdd);
  CHECK(std::holds_alternative<Unary>(sum->lhs.node().base()));
  const auto* div = std::get_if<Binary>(&sum->rhs.node().base());
  REQUIRE(div != nullptr);
  CHECK(div->op == BinaryOp::kDiv);
}

TEST_CASE("parse: precedence") {
  CHECK(Parse("1 + 2 * 3") == Parse("1 + (2 * 3)"));
  CHECK(Parse("-2^2") == Parse("-(2^2)"));
  CHECK(Parse("2^3^2") == Parse("2^(3^2)"));
  CHECK(Parse("a < b & c | d") == Parse("((a < b) & c) | d"));
  CHECK(Parse("!a == b") == Parse("!(a == b)"));
  CHECK(Parse("1 - 2 - 3") == Parse("(1 - 2) - 3"));
  CHECK(Parse("TRUE") == Parse("1"));
  CHECK(Parse("mean(x, na.rm = TRUE)") == Parse("mean(x,na.rm=TRUE)"));
  CHECK_FALSE(Parse("mean(x, na.rm = TRUE)") == Parse("mean(x)"));
  CHECK(Parse("1.5e-3") == Parse("0.0015"));
}

TEST_CASE("parse: errors") {
  CHECK_THROWS_AS(Parse("1 +"), ParseError);
  CHECK_THROWS_AS(Parse("foo(1)"), ParseError);
  CHECK_THROWS_AS(Parse("A[[-1]]"), ParseError);
  CHECK_THROWS_AS(Parse("A[[1.5]]"), ParseError);
  CHECK_THROWS_AS(Parse("A[[3:1]]"), ParseError);
  CHECK_THROWS_AS(Parse("A[[Kmax:3]]"), ParseError);
  CHECK_THROWS_AS(Parse("A[1]"), ParseError);
  CHECK_THROWS_AS(Parse("A[[1]"), ParseError);
  CHECK_THROWS_AS(Parse("plogis(x, na.rm=TRUE)"), ParseError);
  CHECK_THROWS_AS(Parse("ifelse(1, 2)"), ParseError);
  CHECK_THROWS_AS(Parse("(1 + 2"), ParseError);
  CHECK_THROWS_AS(Parse(""), ParseError);
  CHECK_THROWS_AS(Parse("1 $ 2"), ParseError);

  try {
    Parse("W1 + * 3");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 5);
  }
}

TEST_CASE("dependencies") {
  CHECK(Dependencies(Parse("sum(W2[[1:Kmax]])")) == std::set<std::string>{"W2"});
  CHECK(Dependencies(Parse("ifelse(nF > 0, sum(W1[[1:Kmax]])/nF, 0)")) ==
        std::set<std::string>{"W1"});
  CHECK(Dependencies(Parse("3.5")).empty());
  CHECK(Dependencies(Parse("A.obs + shift * W2"), {"shift"}) ==
        std::set<std::string>{"A.obs", "W2"});
}

TEST_CASE("uses network") {
  CHECK(UsesNetwork(Parse("sum(A[[1:Kmax]])")));
  CHECK(UsesNetwork(Parse("nF + 1")));
  CHECK(UsesNetwork(Parse("Var[[0]]")));
  CHECK_FALSE(UsesNetwork(Parse("plogis(W1)")));
  CHECK(IsPlainReference(Parse("A.obs"), "A.obs"));
  CHECK_FALSE(IsPlainReference(Parse("A.obs + 0"), "A.obs"));
}

TEST_CASE("friend lookup on the path network") {
  const auto net = PathNet();
  const std::vector<double> col{5, 7, 9};

  const std::int32_t zero[] = {0};
  const auto self = FriendLookup(col, *net, zero);
  CHECK(self.data() == col);

  const std::int32_t first[] = {1};
  const auto f1 = FriendLookup(col, *net, first);
  CHECK(f1.data() == std::vector<double>{7, 5, 7});

  const std::int32_t second[] = {2};
  const auto f2 = FriendLookup(col, *net, second);
  CHECK(IsMissing(f2(0, 0)));
  CHECK(f2(1, 0) == 9);
  CHECK(IsMissing(f2(2, 0)));

  const auto f2z = FriendLookup(col, *net, second, true);
  CHECK(f2z.data() == std::vector<double>{0, 9, 0});

  const std::int32_t beyond[] = {3};
  CHECK_THROWS_AS(FriendLookup(col, *net, beyond), EvalError);
}

TEST_CASE("evaluate: examples") {
  const auto data = WithColumn("Var", {5, 7, 9}, PathNet());
  CHECK(Eval("mean(Var[[1:4]], na.rm=TRUE)", data).data() == std::vector<double>{7, 7, 7});
  CHECK(Eval("nF", data).data() == std::vector<double>{1, 2, 1});
  CHECK(Eval("Kmax", data).At(0, 0) == 2);
  CHECK(Eval("sum(Var[[1:Kmax]])", data, true).data() == std::vector<double>{7, 14, 7});
  CHECK(Eval("ifelse(nF > 0, sum(Var[[1:Kmax]])/nF, 0)", data, true).data() ==
        std::vector<double>{7, 7, 7});

  const auto block = Eval("Var[[0:2]]", data);
  CHECK(block.rows() == 3);
  CHECK(block.cols() == 3);
  CHECK(block(1, 0) == 7);
  CHECK(block(1, 2) == 9);
}

TEST_CASE("evaluate: missing propagation") {
  const auto data = WithColumn("Var", {5, 7, 9}, PathNet());
  const auto strict = Eval("Var[[2]] + 1", data);
  CHECK(IsMissing(strict(0, 0)));
  CHECK(strict(1, 0) == 10);
  CHECK(Eval("Var[[2]] + 1", data, true).data() == std::vector<double>{1, 10, 1});
  CHECK(IsMissing(Eval("sum(Var[[1:2]])", data)(0, 0)));
  CHECK(Eval("sum(Var[[1:2]], na.rm=TRUE)", data).data() == std::vector<double>{7, 14, 7});
  CHECK(IsMissing(Eval("ifelse(Var[[2]] > 0, 1, 0)", data)(0, 0)));
  CHECK(IsMissing(Eval("Var[[2]] > 0 | 1", data)(0, 0)));
  CHECK(IsMissing(Eval("mean(Var[[2]], na.rm=TRUE)", data)(0, 0)));

  // Literal positions past Kmax read as absent friends.
  const auto far = Eval("Var[[5]]", data);
  for (std::int32_t i = 0; i < 3; ++i) CHECK(IsMissing(far(i, 0)));
  CHECK(Eval("Var[[5]]", data, true).data() == std::vector<double>{0, 0, 0});
}

TEST_CASE("evaluate: functions") {
  auto data = WithColumn("x", {-1, 0, 2}, PathNet());
  const auto p = Eval("plogis(x)", data);
  CHECK(p(1, 0) == doctest::Approx(0.5));
  CHECK(p(2, 0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
  CHECK(Eval("plogis(800)", data).At(0, 0) == 1.0);
  CHECK(Eval("plogis(-800)", data).At(0, 0) == 0.0);
  CHECK(Eval("abs(x)", data).data() == std::vector<double>{1, 0, 2});
  CHECK(Eval("max(x, 0)", data).data() == std::vector<double>{0, 0, 2});
  CHECK(Eval("min(x, 0)", data).data() == std::vector<double>{-1, 0, 0});
  CHECK(Eval("exp(log(3))", data).At(0, 0) == doctest::Approx(3.0));
  CHECK(Eval("sqrt(4)", data).At(0, 0) == 2.0);
  CHECK(Eval("ifelse(x > 0, x, 10)", data).data() == std::vector<double>{10, 10, 2});
  CHECK(Eval("2^3", data).At(0, 0) == 8.0);
  CHECK(Eval("!(x > 0)", data).data() == std::vector<double>{1, 1, 0});
  const auto combined = Eval("c(x, 2 * x)", data);
  CHECK(combined.cols() == 2);
  CHECK(combined(2, 1) == 4);
}

TEST_CASE("evaluate: scalars and errors") {
  const auto data = WithColumn("Var", {5, 7, 9}, PathNet());
  const Scalars scalars{{"shift", 0.5}};
  CHECK(Eval("Var + shift", data, false, &scalars).data() == std::vector<double>{5.5, 7.5, 9.5});
  CHECK_THROWS_AS(Eval("shift[[1]]", data, false, &scalars), EvalError);
  CHECK_THROWS_AS(Eval("Nope + 1", data), EvalError);

  Dataset lonely(3);
  lonely.Add(Column{"Var", ColumnType::kContinuous, {1, 2, 3}});
  CHECK_THROWS_AS(Eval("nF", lonely), EvalError);
  CHECK_THROWS_AS(Eval("Var[[1]]", lonely), EvalError);

  auto empty = std::make_shared<const NetworkMatrix>(FromEdgeList(3, {}));
  const auto isolated = WithColumn("Var", {1, 2, 3}, empty);
  CHECK_THROWS_AS(Eval("sum(Var[[1:Kmax]])", isolated, true), EvalError);
  CHECK(Eval("nF", isolated).data() == std::vector<double>{0, 0, 0});
  CHECK(Eval("Var[[0:Kmax]]", isolated).data() == std::vector<double>{1, 2, 3});
}

TEST_CASE("property: self index is identity") {
  Stream rng{RngKey(11)};
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 1 + static_cast<std::int32_t>(rng.Below(40));
    auto net = std::make_shared<const NetworkMatrix>(RandomNet(rng, n));
    std::vector<double> v(n);
    for (auto& x : v) x = rng.Normal();
    if (n > 1) v[rng.Below(n)] = kMissing;
    const auto data = WithColumn("Var", v, net);
    const auto a = Eval("Var[[0]]", data);
    const auto b = Eval("Var", data);
    REQUIRE(a.data().size() == b.data().size());
    for (std::size_t i = 0; i < a.data().size(); ++i) CHECK(SameBits(a.data()[i], b.data()[i]));
  }
}

TEST_CASE("property: missing iff fewer friends than the index") {
  Stream rng{RngKey(12)};
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 2 + static_cast<std::int32_t>(rng.Below(40));
    auto net = std::make_shared<const NetworkMatrix>(RandomNet(rng, n));
    std::vector<double> v(n);
    for (auto& x : v) x = rng.Normal();
    const auto data = WithColumn("Var", v, net);
    for (std::int32_t k = 1; k <= net->kmax() + 1; ++k) {
      const auto out = Eval("Var[[" + std::to_string(k) + "]]", data);
      for (std::int32_t i = 0; i < n; ++i)
        CHECK(IsMissing(out(i, 0)) == (net->NumFriends(i) < k));
    }
  }
}

TEST_CASE("property: friend sum equals adjacency times column") {
  Stream rng{RngKey(13)};
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = 2 + static_cast<std::int32_t>(rng.Below(49));
    auto net = std::make_shared<const NetworkMatrix>(RandomNet(rng, n));
    if (net->kmax() == 0) continue;
    std::vector<double> v(n);
    for (auto& x : v) x = rng.Normal() * 10.0;
    const auto adj = ToAdjacency(*net);
    const auto data = WithColumn("V", v, net);
    const auto out = Eval("sum(V[[1:Kmax]])", data, true);
    for (std::int32_t i = 0; i < n; ++i) {
      double expect = 0.0;
      for (std::int32_t j = 0; j < n; ++j)
        if (adj(i, j) != 0) expect += v[j];
      CHECK(out(i, 0) == expect);
    }
  }
}

TEST_CASE("property: friend sum equals row sum over lookup") {
  Stream rng{RngKey(14)};
  for (int trial = 0; trial < 100; ++trial) {
    const auto n = 2 + static_cast<std::int32_t>(rng.Below(40));
    auto net = std::make_shared<const NetworkMatrix>(RandomNet(rng, n));
    if (net->kmax() == 0) continue;
    std::vector<double> v(n);
    for (auto& x : v) x = rng.Uniform();
    std::vector<std::int32_t> positions;
    for (std::int32_t k = 1; k <= net->kmax(); ++k) positions.push_back(k);
    const auto block = FriendLookup(v, *net, positions, true);
    const auto data = WithColumn("A", v, net);
    const auto out = Eval("sum(A[[1:Kmax]])", data, true);
    for (std::int32_t i = 0; i < n; ++i) {
      double row = 0.0;
      for (std::int32_t k = 0; k < block.cols(); ++k) row += block(i, k);
      CHECK(out(i, 0) == row);
    }
  }
}

TEST_CASE("property: print then parse is the identity") {
  for (const char* text :
       {"sum(A[[1:Kmax]])", "Var[[0]]", "plogis(-0.2 + W1/3)",
        "ifelse(nF > 0, sum(W1[[1:Kmax]])/nF, 0)",
        "ifelse(A.obs - (0.58*W2 + 0.33*W3) > (log(trunc)/shift + shift/2), A.obs, A.obs + shift)",
        "mean(V[[2:5]], na.rm = TRUE) ^ -1", "!(a >= 1) | b != 2 & c <= 3",
        "5 + -0.5*W1 - 0.58*W2 + 1e-300"}) {
    const auto once = Parse(text);
    CHECK(Parse(ToString(once)) == once);
    CHECK(Parse(text) == once);
  }
  Stream rng{RngKey(15)};
  for (int trial = 0; trial < 2000; ++trial) {
    const auto e = RandomExpr(rng, 4);
    const auto printed = ToString(e);
    INFO(printed);
    CHECK(Parse(printed) == e);
    CHECK(ToString(Parse(printed)) == printed);
  }
}
