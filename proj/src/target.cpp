#include "netsem/target.hpp"

#include <cmath>

#include "netsem/error.hpp"
#include "netsem/parallel.hpp"
#include "netsem/simulate.hpp"

namespace netsem {
namespace {

double ColumnMean(const Dataset& d, const std::string& name) {
  const auto& col = d.Get(name);
  double sum = 0.0;
  for (double x : col.values) sum += x;
  return sum / static_cast<double>(col.values.size());
}

TargetResult Summarize(std::string parameter, std::vector<double> values, std::int32_t n,
                       bool keep) {
  TargetResult out;
  out.parameter = std::move(parameter);
  out.reps = static_cast<std::int32_t>(values.size());
  out.n = n;
  double sum = 0.0;
  for (double v : values) sum += v;
  out.estimate = sum / out.reps;
  if (out.reps > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - out.estimate) * (v - out.estimate);
    out.standard_error = std::sqrt(ss / (out.reps - 1) / out.reps);
  }
  if (keep) out.replicates = std::move(values);
  return out;
}

const Action* LookupAction(const DagModel& model, std::string_view name) {
  return name.empty() ? nullptr : &model.GetAction(name);
}

void CheckArgs(const DagModel& model, std::int32_t n, std::int32_t reps) {
  if (!model.finalized()) throw ModelError("model must be finalized");
  if (n < 1) throw ParameterError("n must be at least 1");
  if (reps < 1) throw ParameterError("reps must be at least 1");
}

}  // namespace

std::string ResolveOutcome(const DagModel& model, std::string_view requested) {
  if (model.nodes().empty()) throw ModelError("model has no nodes");
  std::string name;
  if (requested.empty()) {
    const auto& last = model.nodes().back();
    if (last.names.size() != 1) {
      throw ModelError("last node is multivariate; name the outcome explicitly");
    }
    name = last.name();
  } else {
    name = std::string(requested);
  }
  const auto idx = model.NodeIndex(name);
  if (!idx) throw ModelError("unknown outcome node '" + name + "'");
  const auto& spec = model.nodes()[*idx];
  const auto* def = DistributionRegistry::Default().Find(spec.distribution);
  if (def != nullptr && def->type == ColumnType::kCategorical) {
    throw ModelError("outcome '" + name + "' is categorical");
  }
  return name;
}

TargetResult MonteCarloTargetMean(const DagModel& model, std::string_view action, std::int32_t n,
                                  std::int32_t reps, const RngKey& root,
                                  const TargetOptions& options) {
  CheckArgs(model, n, reps);
  const Action* act = LookupAction(model, action);
  const std::string outcome = ResolveOutcome(model, options.outcome);
  std::vector<double> values(static_cast<std::size_t>(reps));
  const RngKey base = root.Child("replicate");
  ParallelFor(reps, options.threads, [&](std::int64_t r) {
    const auto data = Simulate(model, act, n, base.Child(static_cast<std::uint64_t>(r)));
    values[r] = ColumnMean(data, outcome);
  });
  return Summarize("mean(" + outcome + ")" + (act ? " under " + act->name : std::string()),
                   std::move(values), n, options.keep_replicates);
}

TargetResult MonteCarloTargetMean(const DagModel& model, std::string_view action, std::int32_t n,
                                  std::int32_t reps, std::uint64_t seed,
                                  const TargetOptions& options) {
  return MonteCarloTargetMean(model, action, n, reps, RngKey(seed), options);
}

TargetResult Ate(const DagModel& model, std::string_view action1, std::string_view action0,
                 std::int32_t n, std::int32_t reps, std::uint64_t seed,
                 const TargetOptions& options) {
  CheckArgs(model, n, reps);
  const Action* a1 = LookupAction(model, action1);
  const Action* a0 = LookupAction(model, action0);
  const std::string outcome = ResolveOutcome(model, options.outcome);
  std::vector<double> values(static_cast<std::size_t>(reps));
  const RngKey base = RngKey(seed).Child("replicate");
  ParallelFor(reps, options.threads, [&](std::int64_t r) {
    const RngKey key = base.Child(static_cast<std::uint64_t>(r));
    values[r] = ColumnMean(Simulate(model, a1, n, key), outcome) -
                ColumnMean(Simulate(model, a0, n, key), outcome);
  });
  auto label = [](const Action* a) { return a ? a->name : std::string("observed"); };
  return Summarize("ate(" + label(a1) + " - " + label(a0) + ")", std::move(values), n,
                   options.keep_replicates);
}

}  // namespace netsem
