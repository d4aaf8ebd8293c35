#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "netsem/density.hpp"
#include "netsem/regression.hpp"
#include "netsem/rng.hpp"
#include "netsem/summaries.hpp"

namespace netsem {

enum class EstimatorKind { kGcomp, kIpw, kOracle };

std::string_view EstimatorName(EstimatorKind kind);  // GCOMP, IPW, ORACLE
EstimatorKind ParseEstimator(std::string_view name);  // case-insensitive

// What the parametric bootstrap redraws, the network always fixed:
// outcome           Y from the fitted outcome model
// exposure_outcome  the intervened exposures from the fitted exposure
//                   density, then Y
// full              unit baseline rows resampled with replacement, then as
//                   exposure_outcome
enum class BootstrapScheme { kOutcome, kExposureOutcome, kFull };

std::string_view BootstrapSchemeName(BootstrapScheme scheme);  // outcome, exposure_outcome, full
BootstrapScheme ParseBootstrapScheme(std::string_view name);

struct EstimationSpec {
  std::vector<Summary> sw;  // baseline summaries; may not read intervened exposures
  std::vector<Summary> sa;  // exposure summaries, rebuilt after the intervention
  Intervention intervention;
  RegressionSpec qform;  // one binary outcome
  RegressionSpec hform;  // exposure summaries ~ baseline summaries
  BinningConfig binning;
  double weight_cap = 50.0;
  std::int32_t bootstrap = 0;  // B; 0 disables the bootstrap
  BootstrapScheme bootstrap_scheme = BootstrapScheme::kOutcome;
  LogisticOptions logistic;
};

// Throws ModelError when the spec is inconsistent.
void ValidateSpec(const EstimationSpec& spec);

struct Interval {
  double lower = 0.0;
  double upper = 0.0;
  bool Contains(double x) const { return lower <= x && x <= upper; }
};

// psi +- 1.96 sqrt(variance)
Interval NormalInterval(double estimate, double variance);

struct WeightDiagnostics {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sd = 0.0;
  std::int32_t capped = 0;
};

struct EstimateReport {
  std::string estimator;
  double estimate = 0.0;
  double var_iid = 0.0;
  Interval ci_iid;
  std::optional<double> var_boot;
  std::optional<Interval> ci_boot;
  std::int32_t iterations = 0;  // IRLS iterations of the outcome or density fits
  bool converged = true;
  bool separated = false;
  std::optional<WeightDiagnostics> weights;
};

// Observed data with all summaries, and the same after the intervention.
struct PreparedData {
  Dataset observed;
  Dataset intervened;
};
PreparedData Prepare(const Dataset& data, const EstimationSpec& spec);

// (1/n^2) sum (c_i - mean(c))^2 for unit contributions c_i.
double IidVariance(const std::vector<double>& contributions);

// Outcome regression fitted on the observed summaries with predictions at the
// observed and the intervened summaries.
struct OutcomeModel {
  LogisticFit fit;
  Eigen::MatrixXd x_observed;
  Eigen::MatrixXd x_intervened;
  Eigen::VectorXd y;
  Eigen::VectorXd q_observed;
  Eigen::VectorXd q_intervened;
};
OutcomeModel FitOutcomeModel(const PreparedData& data, const EstimationSpec& spec);

// IPW weights g*(sA | sW) / g0(sA | sW) at the observed summaries.
struct IpwWeights {
  std::vector<double> weights;
  WeightDiagnostics diagnostics;
  std::int32_t iterations = 0;
  bool converged = true;
};
IpwWeights FitIpwWeights(const PreparedData& data, const EstimationSpec& spec);

EstimateReport Gcomp(const Dataset& data, const EstimationSpec& spec);
EstimateReport Ipw(const Dataset& data, const EstimationSpec& spec);

struct BootstrapResult {
  double variance = 0.0;
  std::vector<double> estimates;
};

// For b = 1..B draws Y_b ~ Bernoulli(q) from key.Child("bootstrap").Child(b)
// with (W, A, network) fixed and re-runs `estimator` on Y_b.
BootstrapResult ParametricBootstrap(const Eigen::VectorXd& q, std::int32_t b,
                                    const std::function<double(const Eigen::VectorXd&)>& estimator,
                                    const RngKey& key);

// GCOMP and/or IPW on one dataset, sharing the outcome fit; adds bootstrap
// variances when spec.bootstrap > 0.
std::vector<EstimateReport> Estimate(const Dataset& data, const EstimationSpec& spec,
                                     const std::vector<EstimatorKind>& kinds, const RngKey& key);

}  // namespace netsem
