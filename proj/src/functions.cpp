#include <algorithm>
#include <cmath>
#include <string>

#include "netsem/error.hpp"
#include "netsem/expr.hpp"

namespace netsem {
namespace {

std::int32_t BroadcastDim(std::int32_t a, std::int32_t b, const char* what) {
  if (a == b || b == 1) return a;
  if (a == 1) return b;
  throw EvalError(std::string("incompatible ") + what + " (" + std::to_string(a) + " vs " +
                  std::to_string(b) + ")");
}

template <typename F>
Value Map1(const Value& x, F f) {
  Value out(x.rows(), x.cols());
  for (std::size_t k = 0; k < x.data().size(); ++k) out.data()[k] = f(x.data()[k]);
  return out;
}

Value RowReduce(const Value& x, bool na_rm, bool mean) {
  Value out(x.rows(), 1);
  for (std::int32_t r = 0; r < x.rows(); ++r) {
    double total = 0.0;
    std::int32_t count = 0;
    for (std::int32_t c = 0; c < x.cols(); ++c) {
      const double v = x(r, c);
      if (IsMissing(v) && na_rm) continue;
      total += v;
      ++count;
    }
    out(r, 0) = mean ? (count > 0 ? total / count : kMissing) : total;
  }
  return out;
}

Value ElementwiseExtreme(const std::vector<Value>& args, bool take_max) {
  std::int32_t rows = 1;
  std::int32_t cols = 1;
  for (const auto& a : args) {
    rows = BroadcastDim(rows, a.rows(), "row counts");
    cols = BroadcastDim(cols, a.cols(), "column counts");
  }
  Value out(rows, cols);
  for (std::int32_t r = 0; r < rows; ++r) {
    for (std::int32_t c = 0; c < cols; ++c) {
      double best = args.front().At(r, c);
      for (std::size_t k = 1; k < args.size() && !IsMissing(best); ++k) {
        const double v = args[k].At(r, c);
        if (IsMissing(v)) {
          best = kMissing;
        } else {
          best = take_max ? std::max(best, v) : std::min(best, v);
        }
      }
      out(r, c) = best;
    }
  }
  return out;
}

FunctionRegistry MakeDefault() {
  FunctionRegistry reg;
  auto unary = [](double (*f)(double)) {
    return FunctionDef{1, 1, false, [f](const std::vector<Value>& a, bool) {
                         return Map1(a[0], [f](double x) { return IsMissing(x) ? x : f(x); });
                       }};
  };
  reg.Register("sum", FunctionDef{1, 1, true, [](const std::vector<Value>& a, bool na_rm) {
                                    return RowReduce(a[0], na_rm, false);
                                  }});
  reg.Register("mean", FunctionDef{1, 1, true, [](const std::vector<Value>& a, bool na_rm) {
                                     return RowReduce(a[0], na_rm, true);
                                   }});
  reg.Register("plogis", unary(Logistic));
  reg.Register("log", unary([](double x) { return std::log(x); }));
  reg.Register("exp", unary([](double x) { return std::exp(x); }));
  reg.Register("sqrt", unary([](double x) { return std::sqrt(x); }));
  reg.Register("abs", unary([](double x) { return std::fabs(x); }));
  reg.Register("min", FunctionDef{1, -1, false, [](const std::vector<Value>& a, bool) {
                                    return ElementwiseExtreme(a, false);
                                  }});
  reg.Register("max", FunctionDef{1, -1, false, [](const std::vector<Value>& a, bool) {
                                    return ElementwiseExtreme(a, true);
                                  }});
  reg.Register("ifelse", FunctionDef{3, 3, false, [](const std::vector<Value>& a, bool) {
    const std::int32_t rows = BroadcastDim(BroadcastDim(a[0].rows(), a[1].rows(), "row counts"),
                                           a[2].rows(), "row counts");
    const std::int32_t cols = BroadcastDim(BroadcastDim(a[0].cols(), a[1].cols(), "column counts"),
                                           a[2].cols(), "column counts");
    Value out(rows, cols);
    for (std::int32_t r = 0; r < rows; ++r) {
      for (std::int32_t c = 0; c < cols; ++c) {
        const double cond = a[0].At(r, c);
        out(r, c) = IsMissing(cond) ? kMissing : (cond != 0.0 ? a[1].At(r, c) : a[2].At(r, c));
      }
    }
    return out;
  }});
  reg.Register("c", FunctionDef{1, -1, false, [](const std::vector<Value>& a, bool) {
    std::int32_t rows = 1;
    std::int32_t cols = 0;
    for (const auto& v : a) {
      rows = BroadcastDim(rows, v.rows(), "row counts");
      cols += v.cols();
    }
    Value out(rows, cols);
    for (std::int32_t r = 0; r < rows; ++r) {
      std::int32_t offset = 0;
      for (const auto& v : a) {
        for (std::int32_t c = 0; c < v.cols(); ++c) out(r, offset + c) = v.At(r, c);
        offset += v.cols();
      }
    }
    return out;
  }});
  return reg;
}

}  // namespace

const FunctionRegistry& FunctionRegistry::Default() {
  static const FunctionRegistry registry = MakeDefault();
  return registry;
}

void FunctionRegistry::Register(std::string name, FunctionDef def) {
  functions_[std::move(name)] = std::move(def);
}

const FunctionDef* FunctionRegistry::Find(std::string_view name) const {
  auto it = functions_.find(name);
  return it == functions_.end() ? nullptr : &it->second;
}

}  // namespace netsem
