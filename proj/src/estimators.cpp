#include "netsem/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

#include "netsem/error.hpp"

namespace netsem {
namespace {

std::vector<Summary> Concat(const std::vector<Summary>& a, const std::vector<Summary>& b) {
  std::vector<Summary> out = a;
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double SampleVariance(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = Mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return ss / static_cast<double>(v.size() - 1);
}

std::vector<double> ToVector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

std::string_view EstimatorName(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kGcomp: return "GCOMP";
    case EstimatorKind::kIpw: return "IPW";
    case EstimatorKind::kOracle: return "ORACLE";
  }
  return "?";
}

EstimatorKind ParseEstimator(std::string_view name) {
  std::string lower(name);
  for (auto& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (lower == "gcomp") return EstimatorKind::kGcomp;
  if (lower == "ipw") return EstimatorKind::kIpw;
  if (lower == "oracle") return EstimatorKind::kOracle;
  throw ParameterError("unknown estimator '" + std::string(name) + "'");
}

std::string_view BootstrapSchemeName(BootstrapScheme scheme) {
  switch (scheme) {
    case BootstrapScheme::kOutcome: return "outcome";
    case BootstrapScheme::kExposureOutcome: return "exposure_outcome";
    case BootstrapScheme::kFull: return "full";
  }
  return "?";
}

BootstrapScheme ParseBootstrapScheme(std::string_view name) {
  if (name == "outcome") return BootstrapScheme::kOutcome;
  if (name == "exposure_outcome") return BootstrapScheme::kExposureOutcome;
  if (name == "full") return BootstrapScheme::kFull;
  throw ParameterError("unknown bootstrap scheme '" + std::string(name) + "'");
}

void ValidateSpec(const EstimationSpec& spec) {
  if (spec.qform.outcomes.size() != 1) throw ModelError("qform needs exactly one outcome");
  if (spec.hform.outcomes.empty()) throw ModelError("hform needs at least one exposure summary");
  if (spec.bootstrap == 1 || spec.bootstrap < 0) throw ParameterError("bootstrap count must be 0 or >= 2");
  if (!(spec.weight_cap > 0.0)) throw ParameterError("weight cap must be positive");
  if (spec.binning.max_per_bin < 1) throw ParameterError("max_per_bin must be positive");

  std::set<std::string> exposures;
  for (const auto& [name, expr] : spec.intervention.exposures) {
    if (!exposures.insert(name).second) throw ModelError("exposure '" + name + "' intervened twice");
  }
  std::set<std::string> sa_names;
  for (const auto& s : spec.sa) sa_names.insert(s.name);
  std::set<std::string> sw_names;
  for (const auto& s : spec.sw) {
    sw_names.insert(s.name);
    if (exposures.contains(s.name)) {
      throw ModelError("baseline summary '" + s.name + "' is an intervened exposure");
    }
    for (const auto& dep : Dependencies(s.expr)) {
      if (exposures.contains(dep) || sa_names.contains(dep)) {
        throw ModelError("baseline summary '" + s.name + "' reads exposure '" + dep + "'");
      }
    }
  }
  for (const auto& name : spec.hform.outcomes) {
    if (!sa_names.contains(name) && !exposures.contains(name)) {
      throw ModelError("hform outcome '" + name + "' is not an exposure summary");
    }
  }
  for (const auto& name : spec.hform.covariates) {
    if (sa_names.contains(name) || exposures.contains(name)) {
      throw ModelError("hform covariate '" + name + "' is an exposure summary");
    }
  }
}

Interval NormalInterval(double estimate, double variance) {
  const double half = 1.96 * std::sqrt(std::max(variance, 0.0));
  return Interval{estimate - half, estimate + half};
}

PreparedData Prepare(const Dataset& data, const EstimationSpec& spec) {
  ValidateSpec(spec);
  const auto all = Concat(spec.sw, spec.sa);
  PreparedData out;
  out.observed = BuildSummaries(data, all);
  out.intervened = BuildSummaries(ApplyIntervention(data, spec.intervention), all);
  return out;
}

double IidVariance(const std::vector<double>& contributions) {
  const double n = static_cast<double>(contributions.size());
  if (contributions.empty()) return 0.0;
  // shifted by the first value so constant input gives exactly zero
  const double k = contributions.front();
  double s = 0.0, ss = 0.0;
  for (double c : contributions) {
    s += c - k;
    ss += (c - k) * (c - k);
  }
  return std::max(0.0, (ss - s * s / n) / (n * n));
}

OutcomeModel FitOutcomeModel(const PreparedData& data, const EstimationSpec& spec) {
  OutcomeModel m;
  m.x_observed = DesignWithIntercept(data.observed, spec.qform.covariates);
  m.x_intervened = DesignWithIntercept(data.intervened, spec.qform.covariates);
  const auto y = data.observed.Values(spec.qform.outcomes.front());
  m.y = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
  m.fit = FitLogistic(m.x_observed, m.y, spec.logistic);
  m.q_observed = PredictLogistic(m.fit, m.x_observed);
  m.q_intervened = PredictLogistic(m.fit, m.x_intervened);
  return m;
}

IpwWeights FitIpwWeights(const PreparedData& data, const EstimationSpec& spec) {
  std::vector<std::vector<double>> edges;
  for (const auto& name : spec.hform.outcomes) {
    auto e = EqualMassEdges(data.observed.Values(name), spec.binning.max_per_bin);
    ExtendEdges(e, data.intervened.Values(name));
    edges.push_back(std::move(e));
  }
  const auto g0 = BinnedDensity::Fit(data.observed, spec.hform, spec.binning, &edges, spec.logistic);
  const auto gstar =
      BinnedDensity::Fit(data.intervened, spec.hform, spec.binning, &edges, spec.logistic);
  const auto den = g0.Evaluate(data.observed);
  const auto num = gstar.Evaluate(data.observed);

  IpwWeights out;
  for (const auto* fit : {&g0, &gstar}) {
    for (const auto& c : fit->components()) {
      out.iterations = std::max(out.iterations, c.hazard.iterations);
      out.converged = out.converged && c.hazard.converged;
    }
  }
  out.weights.resize(den.size());
  auto& d = out.diagnostics;
  for (std::size_t i = 0; i < den.size(); ++i) {
    double w = num[i] == 0.0 ? 0.0 : num[i] / den[i];
    if (!(w <= spec.weight_cap)) {
      w = spec.weight_cap;
      ++d.capped;
    }
    out.weights[i] = w;
  }
  d.min = *std::min_element(out.weights.begin(), out.weights.end());
  d.max = *std::max_element(out.weights.begin(), out.weights.end());
  d.mean = Mean(out.weights);
  d.sd = std::sqrt(SampleVariance(out.weights));
  return out;
}

namespace {

// Unit contributions q*_i + (x_i . v)(y_i - q_i), v = M^-1 d, where M is the
// average logistic information and d the average gradient of q* in beta.
std::vector<double> GcompInfluence(const OutcomeModel& m) {
  auto contrib = ToVector(m.q_intervened);
  if (m.fit.constant_response >= 0.0) return contrib;
  const auto n = static_cast<double>(m.y.size());
  const Eigen::VectorXd wq = m.q_observed.array() * (1.0 - m.q_observed.array());
  const Eigen::VectorXd ws = m.q_intervened.array() * (1.0 - m.q_intervened.array());
  const Eigen::MatrixXd info = m.x_observed.transpose() * wq.asDiagonal() * m.x_observed / n;
  const Eigen::VectorXd grad = m.x_intervened.transpose() * ws / n;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  Eigen::VectorXd v;
  if (ldlt.info() == Eigen::Success && ldlt.isPositive()) v = ldlt.solve(grad);
  if (v.size() != grad.size() || !v.allFinite()) v = info.completeOrthogonalDecomposition().solve(grad);
  const Eigen::VectorXd proj = m.x_observed * v;
  for (std::size_t i = 0; i < contrib.size(); ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    contrib[i] += proj[k] * (m.y[k] - m.q_observed[k]);
  }
  return contrib;
}

EstimateReport GcompReport(const OutcomeModel& m) {
  EstimateReport r;
  r.estimator = std::string(EstimatorName(EstimatorKind::kGcomp));
  r.estimate = m.q_intervened.mean();
  r.var_iid = IidVariance(GcompInfluence(m));
  r.ci_iid = NormalInterval(r.estimate, r.var_iid);
  r.iterations = m.fit.iterations;
  r.converged = m.fit.converged;
  r.separated = m.fit.separated;
  return r;
}

double WeightedMean(const std::vector<double>& w, const Eigen::VectorXd& y) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * y[static_cast<Eigen::Index>(i)];
  return s / static_cast<double>(w.size());
}

EstimateReport IpwReport(const IpwWeights& w, const Eigen::VectorXd& y) {
  EstimateReport r;
  r.estimator = std::string(EstimatorName(EstimatorKind::kIpw));
  std::vector<double> contrib(w.weights.size());
  for (std::size_t i = 0; i < contrib.size(); ++i) contrib[i] = w.weights[i] * y[static_cast<Eigen::Index>(i)];
  r.estimate = Mean(contrib);
  r.var_iid = IidVariance(contrib);
  r.ci_iid = NormalInterval(r.estimate, r.var_iid);
  r.iterations = w.iterations;
  r.converged = w.converged;
  r.weights = w.diagnostics;
  return r;
}

Eigen::VectorXd OutcomeColumn(const PreparedData& data, const EstimationSpec& spec) {
  const auto y = data.observed.Values(spec.qform.outcomes.front());
  for (double v : y) {
    if (v != 0.0 && v != 1.0) throw ParameterError("outcome must be binary");
  }
  return Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
}

}  // namespace

EstimateReport Gcomp(const Dataset& data, const EstimationSpec& spec) {
  const auto prepared = Prepare(data, spec);
  return GcompReport(FitOutcomeModel(prepared, spec));
}

EstimateReport Ipw(const Dataset& data, const EstimationSpec& spec) {
  const auto prepared = Prepare(data, spec);
  return IpwReport(FitIpwWeights(prepared, spec), OutcomeColumn(prepared, spec));
}

BootstrapResult ParametricBootstrap(const Eigen::VectorXd& q, std::int32_t b,
                                    const std::function<double(const Eigen::VectorXd&)>& estimator,
                                    const RngKey& key) {
  if (b < 2) throw ParameterError("bootstrap needs B >= 2");
  BootstrapResult out;
  out.estimates.reserve(b);
  const RngKey base = key.Child("bootstrap");
  Eigen::VectorXd y(q.size());
  for (std::int32_t k = 0; k < b; ++k) {
    Stream rng{base.Child(static_cast<std::uint64_t>(k))};
    for (Eigen::Index i = 0; i < q.size(); ++i) y[i] = rng.Uniform() < q[i] ? 1.0 : 0.0;
    out.estimates.push_back(estimator(y));
  }
  out.variance = SampleVariance(out.estimates);
  return out;
}

namespace {

// Exposure densities given the baseline summaries (and earlier exposures),
// used to redraw the exposures in the bootstrap.
struct ExposureSampler {
  std::vector<std::string> names;
  std::vector<BinnedDensity> models;
};

ExposureSampler FitExposureSampler(const PreparedData& data, const EstimationSpec& spec) {
  ExposureSampler out;
  std::vector<std::string> conditioning = spec.hform.covariates;
  for (const auto& [name, expr] : spec.intervention.exposures) {
    RegressionSpec form{{name}, conditioning};
    out.names.push_back(name);
    out.models.push_back(BinnedDensity::Fit(data.observed, form, spec.binning, nullptr, spec.logistic));
    conditioning.push_back(name);
  }
  return out;
}

Dataset RedrawExposures(const Dataset& raw, const Dataset& observed, const ExposureSampler& sampler,
                        const RngKey& key) {
  Dataset out = raw;
  for (std::size_t e = 0; e < sampler.names.size(); ++e) {
    const auto& comp = sampler.models[e].components().front();
    std::vector<std::span<const double>> cols;
    for (const auto& c : comp.conditioning) {
      cols.push_back(out.Has(c) ? out.Values(c) : observed.Values(c));
    }
    Stream bin{key.Child(sampler.names[e]).Child("bin")};
    Stream within{key.Child(sampler.names[e]).Child("within")};
    std::vector<double> values(raw.n());
    std::vector<double> z(cols.size());
    for (std::int32_t i = 0; i < raw.n(); ++i) {
      for (std::size_t c = 0; c < cols.size(); ++c) z[c] = cols[c][i];
      values[i] = comp.Sample(z, bin.Uniform(), within.Uniform());
    }
    out.Set(Column{sampler.names[e], raw.Get(sampler.names[e]).type, std::move(values)});
  }
  return out;
}

// Unit rows drawn with replacement; the network stays in place.
Dataset ResampleBaseline(const Dataset& raw, const std::vector<std::string>& keep, const RngKey& key) {
  Stream rng{key};
  std::vector<std::int32_t> idx(raw.n());
  for (auto& i : idx) i = static_cast<std::int32_t>(rng.Below(static_cast<std::uint64_t>(raw.n())));
  Dataset out = raw;
  for (const auto& col : raw.columns()) {
    if (std::find(keep.begin(), keep.end(), col.name) != keep.end()) continue;
    Column c{col.name, col.type, std::vector<double>(idx.size())};
    for (std::size_t i = 0; i < idx.size(); ++i) c.values[i] = col.values[idx[i]];
    out.Set(std::move(c));
  }
  return out;
}

Eigen::VectorXd DrawOutcome(const Eigen::VectorXd& q, const RngKey& key) {
  Stream rng{key};
  Eigen::VectorXd y(q.size());
  for (Eigen::Index i = 0; i < q.size(); ++i) y[i] = rng.Uniform() < q[i] ? 1.0 : 0.0;
  return y;
}

}  // namespace

std::vector<EstimateReport> Estimate(const Dataset& data, const EstimationSpec& spec,
                                     const std::vector<EstimatorKind>& kinds, const RngKey& key) {
  const auto prepared = Prepare(data, spec);
  const auto y = OutcomeColumn(prepared, spec);
  const auto q = FitOutcomeModel(prepared, spec);
  std::optional<IpwWeights> weights;

  std::vector<EstimateReport> out;
  for (auto kind : kinds) {
    if (kind == EstimatorKind::kGcomp) {
      out.push_back(GcompReport(q));
    } else if (kind == EstimatorKind::kIpw) {
      if (!weights) weights = FitIpwWeights(prepared, spec);
      out.push_back(IpwReport(*weights, y));
    } else {
      throw ParameterError("the oracle estimator needs the generating model");
    }
  }
  if (spec.bootstrap == 0) return out;

  std::vector<std::vector<double>> boot(kinds.size());
  if (spec.bootstrap_scheme == BootstrapScheme::kOutcome) {
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      boot[k] = ParametricBootstrap(
                    q.q_observed, spec.bootstrap,
                    [&](const Eigen::VectorXd& yb) {
                      if (kinds[k] == EstimatorKind::kGcomp) {
                        const auto fit = FitLogistic(q.x_observed, yb, spec.logistic);
                        return PredictLogistic(fit, q.x_intervened).mean();
                      }
                      return WeightedMean(weights->weights, yb);
                    },
                    key)
                    .estimates;
    }
  } else {
    const auto sampler = FitExposureSampler(prepared, spec);
    const auto all = Concat(spec.sw, spec.sa);
    const RngKey base = key.Child("bootstrap");
    const std::string& outcome = spec.qform.outcomes.front();
    std::vector<std::string> fixed = sampler.names;
    fixed.push_back(outcome);
    for (std::int32_t b = 0; b < spec.bootstrap; ++b) {
      const RngKey bkey = base.Child(static_cast<std::uint64_t>(b));
      Dataset raw = data;
      Dataset baseline = prepared.observed;
      if (spec.bootstrap_scheme == BootstrapScheme::kFull) {
        raw = ResampleBaseline(data, fixed, bkey.Child("units"));
        baseline = BuildSummaries(raw, spec.sw);
      }
      raw = RedrawExposures(raw, baseline, sampler, bkey);
      PreparedData pb;
      pb.observed = BuildSummaries(raw, all);
      pb.intervened = BuildSummaries(ApplyIntervention(raw, spec.intervention), all);
      const auto xb = DesignWithIntercept(pb.observed, spec.qform.covariates);
      const auto yb = DrawOutcome(PredictLogistic(q.fit, xb), bkey.Child(outcome));
      pb.observed.Set(Column{outcome, ColumnType::kBinary, {yb.data(), yb.data() + yb.size()}});
      for (std::size_t k = 0; k < kinds.size(); ++k) {
        if (kinds[k] == EstimatorKind::kGcomp) {
          const auto fit = FitLogistic(xb, yb, spec.logistic);
          boot[k].push_back(
              PredictLogistic(fit, DesignWithIntercept(pb.intervened, spec.qform.covariates)).mean());
        } else {
          boot[k].push_back(WeightedMean(FitIpwWeights(pb, spec).weights, yb));
        }
      }
    }
  }
  for (std::size_t k = 0; k < kinds.size(); ++k) {
    const double v = SampleVariance(boot[k]);
    out[k].var_boot = v;
    out[k].ci_boot = NormalInterval(out[k].estimate, v);
  }
  return out;
}

}  // namespace netsem
