#include "netsem/summaries.hpp"

#include "netsem/error.hpp"
#include "netsem/eval.hpp"

namespace netsem {

Summary MakeSummary(std::string name, std::string_view formula, bool replace_na_with_zero) {
  return Summary{std::move(name), Parse(formula), replace_na_with_zero};
}

Dataset BuildSummaries(const Dataset& data, const std::vector<Summary>& summaries,
                       const ScalarMap& scalars) {
  Dataset out = data;
  for (const auto& s : summaries) {
    if (IsPlainReference(s.expr, s.name) && out.Has(s.name)) continue;
    EvalContext ctx;
    ctx.data = &out;
    ctx.network = out.network().get();
    ctx.scalars = &scalars;
    ctx.replace_na_with_zero = s.replace_na_with_zero;
    Value v;
    try {
      v = Evaluate(s.expr, ctx);
    } catch (const EvalError& e) {
      throw EvalError("summary '" + s.name + "': " + e.what());
    }
    for (std::int32_t c = 0; c < v.cols(); ++c) {
      std::string name = v.cols() == 1 ? s.name : s.name + "." + std::to_string(c + 1);
      if (out.Has(name)) throw ModelError("summary '" + name + "' collides with an existing column");
      out.Add(Column{std::move(name), ColumnType::kContinuous, v.ColumnValues(c, out.n())});
    }
  }
  return out;
}

Dataset ApplyIntervention(const Dataset& data, const Intervention& intervention) {
  EvalContext ctx;
  ctx.data = &data;
  ctx.network = data.network().get();
  ctx.scalars = &intervention.params;
  std::vector<Column> replaced;
  for (const auto& [name, expr] : intervention.exposures) {
    const auto& original = data.Get(name);
    Value v;
    try {
      v = Evaluate(expr, ctx);
    } catch (const EvalError& e) {
      throw EvalError("intervention on '" + name + "': " + e.what());
    }
    if (v.cols() != 1) throw EvalError("intervention on '" + name + "' must be a single column");
    replaced.push_back(Column{name, original.type, v.ColumnValues(0, data.n())});
  }
  Dataset out = data;
  for (auto& c : replaced) out.Set(std::move(c));
  return out;
}

}  // namespace netsem
