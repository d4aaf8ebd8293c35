#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "netsem/dataset.hpp"
#include "netsem/error.hpp"
#include "netsem/estimators.hpp"
#include "netsem/experiment.hpp"
#include "netsem/io.hpp"
#include "netsem/network.hpp"
#include "netsem/parallel.hpp"
#include "netsem/scenario.hpp"
#include "netsem/simulate.hpp"
#include "netsem/target.hpp"

using namespace netsem;

namespace {

// Bad flags or unreadable inputs: exit code 1 like other validation errors.
class InputError : public Error {
 public:
  using Error::Error;
};

// Set once flags and scenario are validated; later failures are runtime
// errors.
bool g_running = false;

struct Common {
  std::string scenario;
  std::vector<std::string> params;
  std::uint64_t seed = 1;
  int threads = -1;
};

struct Options {
  Common common;
  std::string action;
  std::string outcome;
  std::string out;
  std::string replicates;
  std::string data;
  std::string net;
  std::string estimators;
  std::string scheme;
  std::int32_t n = -1;
  std::int32_t reps = -1;
  std::int32_t truth_reps = -1;
  std::int32_t bootstrap = -1;
  std::int32_t k = -1;
  bool fresh = false;
};

ScalarMap ParseParams(const std::vector<std::string>& items) {
  ScalarMap out;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) throw InputError("--param expects name=value, got '" + item + "'");
    const std::string name = item.substr(0, eq);
    const std::string text = item.substr(eq + 1);
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) throw InputError("--param " + name + ": '" + text + "' is not a number");
    if (out.count(name)) throw InputError("--param " + name + " given twice");
    out[name] = value;
  }
  return out;
}

int Threads(int requested) {
  if (requested >= 0) return ResolveThreads(requested);
  if (const char* env = std::getenv("NETSEM_THREADS")) {
    try {
      return ResolveThreads(std::stoi(env));
    } catch (const std::exception&) {
      throw InputError(std::string("NETSEM_THREADS is not an integer: '") + env + "'");
    }
  }
  return ResolveThreads(0);
}

// Command line minus --threads, which never changes the output.
std::string Echo(int argc, char** argv) {
  std::string out = "# netsem";
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--threads") {
      ++i;
      continue;
    }
    if (a.rfind("--threads=", 0) == 0) continue;
    out += " " + a;
  }
  return out + "\n";
}

void Emit(const std::string& path, const std::string& header,
          const std::function<void(std::ostream&)>& body) {
  auto write = [&](std::ostream& out) {
    out << header;
    body(out);
  };
  if (path.empty() || path == "-") {
    write(std::cout);
    std::cout.flush();
  } else {
    WriteFileAtomically(path, write);
  }
}

Scenario Load(const Options& o) {
  if (!std::filesystem::exists(o.common.scenario)) {
    throw InputError("scenario file '" + o.common.scenario + "' does not exist");
  }
  return LoadScenario(o.common.scenario, ParseParams(o.common.params));
}

ExperimentConfig ExperimentFrom(const Scenario& s, const Options& o) {
  ExperimentConfig cfg = s.experiment.value_or(ExperimentConfig{});
  cfg.seed = o.common.seed;
  if (o.n > 0) cfg.n = o.n;
  if (o.reps > 0) cfg.reps = o.reps;
  if (o.truth_reps > 0) cfg.truth_reps = o.truth_reps;
  if (!o.action.empty()) cfg.action = o.action;
  if (!o.outcome.empty()) cfg.outcome = o.outcome;
  if (!o.estimators.empty()) {
    cfg.estimators.clear();
    std::stringstream ss(o.estimators);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.estimators.push_back(ParseEstimator(item));
  }
  cfg.threads = Threads(o.common.threads);
  if (cfg.action.empty()) throw InputError("no action: pass --action or set experiment.action");
  return cfg;
}

EstimationSpec EstimationFrom(const Scenario& s, const Options& o) {
  if (!s.estimation) throw InputError("scenario has no estimation block");
  EstimationSpec spec = *s.estimation;
  if (o.bootstrap >= 0) spec.bootstrap = o.bootstrap;
  if (!o.scheme.empty()) spec.bootstrap_scheme = ParseBootstrapScheme(o.scheme);
  ValidateSpec(spec);
  return spec;
}

int RunSimulate(const Options& o, const std::string& echo) {
  const auto s = Load(o);
  if (!o.action.empty() && !s.model.HasAction(o.action)) throw InputError("unknown action '" + o.action + "'");
  g_running = true;
  const auto data = o.action.empty() ? SimulateObserved(s.model, o.n, o.common.seed)
                                     : SimulateAction(s.model, o.action, o.n, o.common.seed);
  const std::filesystem::path dir = o.out;
  Emit((dir / "data.csv").string(), echo, [&](std::ostream& out) { WriteDatasetCsv(out, data); });
  if (data.network()) {
    Emit((dir / "network.csv").string(), echo, [&](std::ostream& out) { WriteNetworkCsv(out, *data.network()); });
  }
  return 0;
}

int RunTruth(const Options& o, const std::string& echo) {
  const auto s = Load(o);
  if (!o.action.empty() && !s.model.HasAction(o.action)) throw InputError("unknown action '" + o.action + "'");
  TargetOptions topt;
  topt.outcome = o.outcome;
  topt.threads = Threads(o.common.threads);
  topt.keep_replicates = !o.replicates.empty();
  const auto n = o.n > 0 ? o.n : (s.experiment ? s.experiment->n : 500);
  g_running = true;
  const auto r = MonteCarloTargetMean(s.model, o.action, n, o.reps, o.common.seed, topt);
  Emit(o.out, echo, [&](std::ostream& out) {
    out << "parameter,estimate,standard_error,reps,n\n"
        << r.parameter << ',' << FormatDouble(r.estimate) << ',' << FormatDouble(r.standard_error) << ','
        << r.reps << ',' << r.n << '\n';
  });
  if (!o.replicates.empty()) {
    Emit(o.replicates, echo, [&](std::ostream& out) {
      out << "replicate,value\n";
      for (std::size_t i = 0; i < r.replicates.size(); ++i) out << i << ',' << FormatDouble(r.replicates[i]) << '\n';
    });
  }
  return 0;
}

void WriteReports(std::ostream& out, const std::vector<EstimateReport>& reports, std::int32_t n) {
  out << "estimator,estimate,var_iid,ci_iid_lower,ci_iid_upper,var_boot,ci_boot_lower,ci_boot_upper,"
         "iterations,converged,separated,w_min,w_max,w_mean,w_sd,w_capped,n\n";
  auto opt = [](const std::optional<double>& v) { return v ? FormatDouble(*v) : std::string(); };
  for (const auto& r : reports) {
    out << r.estimator << ',' << FormatDouble(r.estimate) << ',' << FormatDouble(r.var_iid) << ','
        << FormatDouble(r.ci_iid.lower) << ',' << FormatDouble(r.ci_iid.upper) << ',' << opt(r.var_boot) << ','
        << (r.ci_boot ? FormatDouble(r.ci_boot->lower) : "") << ','
        << (r.ci_boot ? FormatDouble(r.ci_boot->upper) : "") << ',' << r.iterations << ','
        << (r.converged ? 1 : 0) << ',' << (r.separated ? 1 : 0) << ',';
    if (r.weights) {
      out << FormatDouble(r.weights->min) << ',' << FormatDouble(r.weights->max) << ','
          << FormatDouble(r.weights->mean) << ',' << FormatDouble(r.weights->sd) << ',' << r.weights->capped;
    } else {
      out << ",,,,";
    }
    out << ',' << n << '\n';
  }
}

int RunEstimate(const Options& o, const std::string& echo) {
  const auto s = Load(o);
  const auto spec = EstimationFrom(s, o);
  std::vector<EstimatorKind> kinds{EstimatorKind::kGcomp, EstimatorKind::kIpw};
  if (!o.estimators.empty()) {
    kinds.clear();
    std::stringstream ss(o.estimators);
    std::string item;
    while (std::getline(ss, item, ',')) kinds.push_back(ParseEstimator(item));
  }
  Dataset data;
  if (o.fresh) {
    if (!o.data.empty() || !o.net.empty()) throw InputError("--simulate-fresh excludes --data and --net");
    const auto n = o.n > 0 ? o.n : (s.experiment ? s.experiment->n : 500);
    g_running = true;
    data = SimulateObserved(s.model, n, o.common.seed);
  } else {
    if (o.data.empty()) throw InputError("estimate needs --data or --simulate-fresh");
    std::ifstream in(o.data, std::ios::binary);
    if (!in) throw InputError("cannot open data file '" + o.data + "'");
    data = ReadDatasetCsv(in);
    if (!o.net.empty()) {
      std::ifstream net_in(o.net, std::ios::binary);
      if (!net_in) throw InputError("cannot open network file '" + o.net + "'");
      auto net = ReadNetworkCsv(net_in);
      if (net.n() != data.n()) {
        throw InputError("network has " + std::to_string(net.n()) + " units, data has " + std::to_string(data.n()));
      }
      data.AttachNetwork(std::make_shared<const NetworkMatrix>(std::move(net)));
    } else if (s.model.network()) {
      throw InputError("scenario declares a network: pass --net");
    }
  }
  g_running = true;
  const auto reports = Estimate(data, spec, kinds, RngKey(o.common.seed).Child("estimate"));
  Emit(o.out, echo, [&](std::ostream& out) { WriteReports(out, reports, data.n()); });
  return 0;
}

int RunExperimentCommand(const Options& o, const std::string& echo) {
  const auto s = Load(o);
  const auto spec = EstimationFrom(s, o);
  const auto cfg = ExperimentFrom(s, o);
  g_running = true;
  const auto r = RunExperiment(s.model, spec, cfg);
  Emit(o.out, echo, [&](std::ostream& out) {
    WriteMetricsHeader(out, {});
    for (const auto& m : r.metrics) WriteMetricsRow(out, 1, m, {});
  });
  if (!o.replicates.empty()) Emit(o.replicates, echo, [&](std::ostream& out) { WriteReplicatesCsv(out, r); });
  return 0;
}

int RunSweep(const Options& o, const std::string& echo) {
  const auto s = Load(o);
  if (!s.sweep) throw InputError("scenario has no experiment.sweep block");
  const auto spec = EstimationFrom(s, o);
  const auto cfg = ExperimentFrom(s, o);
  auto sweep = *s.sweep;
  if (o.k > 0) sweep.k = o.k;
  g_running = true;
  const auto scenarios = ScenarioSweep(s.model, spec, cfg, sweep);
  Emit(o.out, echo, [&](std::ostream& out) {
    WriteMetricsHeader(out, sweep.params);
    for (const auto& sc : scenarios) {
      for (const auto& m : sc.result.metrics) WriteMetricsRow(out, sc.index, m, sc.values);
    }
  });
  return 0;
}

void AddCommon(CLI::App* app, Options& o) {
  app->add_option("--scenario", o.common.scenario, "scenario file")->required();
  app->add_option("--param", o.common.params, "override a scalar parameter, name=value (repeatable)");
  app->add_option("--seed", o.common.seed, "random seed")->capture_default_str();
  app->add_option("--threads", o.common.threads,
                  "worker threads; 0 = all cores (default: NETSEM_THREADS or all cores)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Network structural equation simulation and estimation"};
  app.require_subcommand(1);
  Options o;

  auto* sim = app.add_subcommand("simulate", "simulate one dataset and its network");
  AddCommon(sim, o);
  sim->add_option("--n", o.n, "number of units")->required();
  sim->add_option("--action", o.action, "counterfactual action (default: observed model)");
  sim->add_option("--out", o.out, "output directory for data.csv and network.csv")->required();

  auto* truth = app.add_subcommand("truth", "Monte-Carlo mean of the outcome under an action");
  AddCommon(truth, o);
  truth->add_option("--action", o.action, "action (default: observed model)");
  truth->add_option("--n", o.n, "units per replicate (default: experiment.n or 500)");
  truth->add_option("--reps", o.reps, "replicates")->required()->check(CLI::PositiveNumber);
  truth->add_option("--outcome", o.outcome, "outcome column (default: last node)");
  truth->add_option("--out", o.out, "summary CSV (default: stdout)");
  truth->add_option("--replicates", o.replicates, "per-replicate CSV");

  auto* est = app.add_subcommand("estimate", "GCOMP and IPW on one dataset");
  AddCommon(est, o);
  est->add_option("--data", o.data, "data CSV");
  est->add_option("--net", o.net, "network CSV");
  est->add_flag("--simulate-fresh", o.fresh, "simulate the data from the scenario instead");
  est->add_option("--n", o.n, "units for --simulate-fresh");
  est->add_option("--estimators", o.estimators, "comma list of gcomp, ipw");
  est->add_option("--bootstrap", o.bootstrap, "bootstrap draws B (0 disables)");
  est->add_option("--scheme", o.scheme, "bootstrap scheme: outcome, exposure_outcome, full");
  est->add_option("--out", o.out, "report CSV (default: stdout)");

  auto* exp = app.add_subcommand("experiment", "replicated estimation against the true value");
  AddCommon(exp, o);
  exp->add_option("--action", o.action, "action defining the true value");
  exp->add_option("--n", o.n, "units per replicate");
  exp->add_option("--reps", o.reps, "replicates")->check(CLI::PositiveNumber);
  exp->add_option("--truth-reps", o.truth_reps, "replicates for the true value")->check(CLI::PositiveNumber);
  exp->add_option("--estimators", o.estimators, "comma list of gcomp, ipw, oracle");
  exp->add_option("--bootstrap", o.bootstrap, "bootstrap draws B (0 disables)");
  exp->add_option("--scheme", o.scheme, "bootstrap scheme: outcome, exposure_outcome, full");
  exp->add_option("--out", o.out, "metrics CSV (default: stdout)");
  exp->add_option("--replicates", o.replicates, "per-replicate CSV");

  auto* sweep = app.add_subcommand("sweep", "experiment over interpolated parameter scenarios");
  AddCommon(sweep, o);
  sweep->add_option("--k", o.k, "number of scenarios")->check(CLI::Range(2, 1000));
  sweep->add_option("--reps", o.reps, "replicates per scenario")->check(CLI::PositiveNumber);
  sweep->add_option("--n", o.n, "units per replicate");
  sweep->add_option("--truth-reps", o.truth_reps, "replicates for each true value")->check(CLI::PositiveNumber);
  sweep->add_option("--estimators", o.estimators, "comma list of gcomp, ipw, oracle");
  sweep->add_option("--bootstrap", o.bootstrap, "bootstrap draws B (0 disables)");
  sweep->add_option("--scheme", o.scheme, "bootstrap scheme: outcome, exposure_outcome, full");
  sweep->add_option("--out", o.out, "metrics CSV (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  const std::string echo = Echo(argc, argv);
  try {
    if (*sim) return RunSimulate(o, echo);
    if (*truth) return RunTruth(o, echo);
    if (*est) return RunEstimate(o, echo);
    if (*exp) return RunExperimentCommand(o, echo);
    if (*sweep) return RunSweep(o, echo);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    if (g_running) {
      std::cerr << "runtime error: " << e.what() << '\n';
      return 2;
    }
    std::cerr << "validation error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
