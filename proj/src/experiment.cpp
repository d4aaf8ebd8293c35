#include "netsem/experiment.hpp"

#include <algorithm>
#include <cmath>

#include "netsem/dataset.hpp"
#include "netsem/error.hpp"
#include "netsem/parallel.hpp"
#include "netsem/simulate.hpp"

namespace netsem {
namespace {

std::string Num(double x) { return FormatDouble(x); }

EstimateReport OracleReport(const Dataset& counterfactual, const std::string& outcome) {
  const auto y = counterfactual.Values(outcome);
  std::vector<double> v(y.begin(), y.end());
  EstimateReport r;
  r.estimator = std::string(EstimatorName(EstimatorKind::kOracle));
  double s = 0.0;
  for (double x : v) s += x;
  r.estimate = s / static_cast<double>(v.size());
  r.var_iid = IidVariance(v);
  r.ci_iid = NormalInterval(r.estimate, r.var_iid);
  return r;
}

EstimatorMetrics Aggregate(const std::string& name, const std::vector<const EstimateReport*>& ok,
                           std::int32_t failed, const TargetResult& truth,
                           const ExperimentConfig& config) {
  EstimatorMetrics m;
  m.estimator = name;
  m.psi0 = truth.estimate;
  m.psi0_se = truth.standard_error;
  m.reps = static_cast<std::int32_t>(ok.size());
  m.failed = failed;
  m.n = config.n;
  m.seed = config.seed;
  if (ok.empty()) {
    m.mean_est = m.bias = m.mse = m.variance = m.cover_iid = m.mean_var_iid = kMissing;
    return m;
  }
  const double r = static_cast<double>(ok.size());
  double sum = 0.0, sq = 0.0, cover = 0.0, var_iid = 0.0;
  double cover_boot = 0.0, var_boot = 0.0;
  bool has_boot = true;
  for (const auto* e : ok) {
    sum += e->estimate;
    sq += (e->estimate - m.psi0) * (e->estimate - m.psi0);
    cover += e->ci_iid.Contains(m.psi0) ? 1.0 : 0.0;
    var_iid += e->var_iid;
    if (e->var_boot) {
      var_boot += *e->var_boot;
      cover_boot += e->ci_boot->Contains(m.psi0) ? 1.0 : 0.0;
    } else {
      has_boot = false;
    }
  }
  m.mean_est = sum / r;
  m.bias = m.mean_est - m.psi0;
  m.mse = sq / r;
  double ss = 0.0;
  for (const auto* e : ok) ss += (e->estimate - m.mean_est) * (e->estimate - m.mean_est);
  m.variance = ok.size() > 1 ? ss / (r - 1.0) : 0.0;
  m.cover_iid = cover / r;
  m.mean_var_iid = var_iid / r;
  if (has_boot) {
    m.cover_boot = cover_boot / r;
    m.mean_var_boot = var_boot / r;
  }
  return m;
}

}  // namespace

ExperimentResult RunExperiment(const DagModel& model, const EstimationSpec& spec,
                               const ExperimentConfig& config) {
  if (config.reps < 1) throw ParameterError("reps must be at least 1");
  if (config.estimators.empty()) throw ParameterError("no estimators requested");
  const bool needs_spec = std::any_of(config.estimators.begin(), config.estimators.end(),
                                      [](EstimatorKind k) { return k != EstimatorKind::kOracle; });
  if (needs_spec) ValidateSpec(spec);
  const std::string outcome =
      !config.outcome.empty() ? config.outcome
      : !spec.qform.outcomes.empty() ? spec.qform.outcomes.front()
                                     : ResolveOutcome(model, "");
  const Action* action = config.action.empty() ? nullptr : &model.GetAction(config.action);

  ExperimentResult result;
  TargetOptions topt;
  topt.outcome = outcome;
  topt.threads = config.threads;
  result.truth = MonteCarloTargetMean(model, config.action, config.n, config.truth_reps,
                                      RngKey(config.seed).Child("truth"), topt);

  std::vector<EstimatorKind> spec_kinds;
  for (auto k : config.estimators) {
    if (k != EstimatorKind::kOracle) spec_kinds.push_back(k);
  }
  const std::size_t ne = config.estimators.size();
  result.replicates.assign(config.reps, std::vector<ReplicateEstimate>(ne));
  const RngKey base = RngKey(config.seed).Child("replicate");
  ParallelFor(config.reps, config.threads, [&](std::int64_t r) {
    auto& row = result.replicates[r];
    const RngKey key = base.Child(static_cast<std::uint64_t>(r));
    Dataset data;
    try {
      data = Simulate(model, nullptr, config.n, key);
    } catch (const Error& e) {
      for (auto& cell : row) cell.error = std::string("simulation: ") + e.what();
      return;
    }
    std::vector<EstimateReport> reports;
    std::string spec_error;
    if (!spec_kinds.empty()) {
      try {
        reports = Estimate(data, spec, spec_kinds, key);
      } catch (const Error& e) {
        spec_error = e.what();
      }
    }
    std::size_t next = 0;
    for (std::size_t e = 0; e < ne; ++e) {
      if (config.estimators[e] == EstimatorKind::kOracle) {
        try {
          row[e].report = OracleReport(Simulate(model, action, config.n, key), outcome);
        } catch (const Error& err) {
          row[e].error = err.what();
        }
      } else if (!spec_error.empty()) {
        row[e].error = spec_error;
      } else {
        row[e].report = reports[next++];
      }
    }
  });

  for (std::size_t e = 0; e < ne; ++e) {
    std::vector<const EstimateReport*> ok;
    std::int32_t failed = 0;
    for (const auto& row : result.replicates) {
      if (row[e].report) {
        ok.push_back(&*row[e].report);
      } else {
        ++failed;
      }
    }
    result.metrics.push_back(Aggregate(std::string(EstimatorName(config.estimators[e])), ok,
                                       failed, result.truth, config));
  }
  return result;
}

std::vector<std::vector<double>> InterpolateScenarios(const std::vector<double>& from,
                                                      const std::vector<double>& to,
                                                      std::int32_t k) {
  if (from.size() != to.size()) throw ParameterError("sweep endpoints differ in length");
  if (k < 1) throw ParameterError("sweep needs k >= 1");
  std::vector<std::vector<double>> out;
  for (std::int32_t s = 0; s < k; ++s) {
    std::vector<double> v(from.size());
    for (std::size_t j = 0; j < from.size(); ++j) {
      if (s == 0) {
        v[j] = from[j];
      } else if (s == k - 1) {
        v[j] = to[j];
      } else {
        v[j] = from[j] + (to[j] - from[j]) * static_cast<double>(s) / static_cast<double>(k - 1);
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<SweepScenario> ScenarioSweep(const DagModel& model, const EstimationSpec& spec,
                                         const ExperimentConfig& config, const SweepConfig& sweep) {
  if (sweep.params.size() != sweep.from.size()) {
    throw ParameterError("sweep parameters and endpoints differ in length");
  }
  std::vector<SweepScenario> out;
  const auto grid = InterpolateScenarios(sweep.from, sweep.to, sweep.k);
  for (std::size_t s = 0; s < grid.size(); ++s) {
    ScalarMap overrides;
    for (std::size_t j = 0; j < sweep.params.size(); ++j) overrides[sweep.params[j]] = grid[s][j];
    SweepScenario sc;
    sc.index = static_cast<std::int32_t>(s) + 1;
    sc.values = grid[s];
    sc.result = RunExperiment(model.WithParameters(overrides), spec, config);
    out.push_back(std::move(sc));
  }
  return out;
}

void WriteMetricsHeader(std::ostream& out, const std::vector<std::string>& extra_names) {
  out << "scenario,estimator,psi0,mean_est,bias,mse,variance,cover_iid,cover_boot,reps,n,seed,"
         "psi0_se,mean_var_iid,mean_var_boot,bias_x10,mse_x10,variance_x10,failed";
  for (const auto& name : extra_names) out << ',' << name;
  out << '\n';
}

void WriteMetricsRow(std::ostream& out, std::int32_t scenario, const EstimatorMetrics& m,
                     const std::vector<double>& extra_values) {
  auto opt = [](const std::optional<double>& x) { return x ? Num(*x) : std::string(); };
  out << scenario << ',' << m.estimator << ',' << Num(m.psi0) << ',' << Num(m.mean_est) << ','
      << Num(m.bias) << ',' << Num(m.mse) << ',' << Num(m.variance) << ',' << Num(m.cover_iid)
      << ',' << opt(m.cover_boot) << ',' << m.reps << ',' << m.n << ',' << m.seed << ','
      << Num(m.psi0_se) << ',' << Num(m.mean_var_iid) << ',' << opt(m.mean_var_boot) << ','
      << Num(m.bias * 10.0) << ',' << Num(m.mse * 10.0) << ',' << Num(m.variance * 10.0) << ','
      << m.failed;
  for (double v : extra_values) out << ',' << Num(v);
  out << '\n';
}

void WriteReplicatesCsv(std::ostream& out, const ExperimentResult& result) {
  out << "replicate,estimator,estimate,var_iid,var_boot,error\n";
  for (std::size_t r = 0; r < result.replicates.size(); ++r) {
    for (std::size_t e = 0; e < result.replicates[r].size(); ++e) {
      const auto& cell = result.replicates[r][e];
      out << r + 1 << ',' << result.metrics[e].estimator << ',';
      if (cell.report) {
        out << Num(cell.report->estimate) << ',' << Num(cell.report->var_iid) << ','
            << (cell.report->var_boot ? Num(*cell.report->var_boot) : std::string()) << ",\n";
      } else {
        std::string msg = cell.error;
        for (auto& c : msg) {
          if (c == '"') c = '\'';
        }
        out << ",,,\"" << msg << "\"\n";
      }
    }
  }
}

}  // namespace netsem
