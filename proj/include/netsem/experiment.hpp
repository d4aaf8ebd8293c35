#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "netsem/estimators.hpp"
#include "netsem/model.hpp"
#include "netsem/target.hpp"

namespace netsem {

struct ExperimentConfig {
  std::int32_t n = 500;
  std::int32_t reps = 100;
  std::uint64_t seed = 1;
  std::string action;        // defines psi0 and the oracle
  std::int32_t truth_reps = 2000;
  std::string outcome;       // empty: qform outcome
  std::vector<EstimatorKind> estimators{EstimatorKind::kGcomp, EstimatorKind::kIpw};
  int threads = 1;
};

// One estimator's result on one replicate; `error` is set when it failed.
struct ReplicateEstimate {
  std::optional<EstimateReport> report;
  std::string error;
};

struct EstimatorMetrics {
  std::string estimator;
  double psi0 = 0.0;
  double psi0_se = 0.0;
  double mean_est = 0.0;
  double bias = 0.0;
  double mse = 0.0;
  double variance = 0.0;  // across replicates
  double cover_iid = 0.0;
  std::optional<double> cover_boot;
  double mean_var_iid = 0.0;
  std::optional<double> mean_var_boot;
  std::int32_t reps = 0;  // successful replicates
  std::int32_t failed = 0;
  std::int32_t n = 0;
  std::uint64_t seed = 0;
};

struct ExperimentResult {
  TargetResult truth;
  std::vector<EstimatorMetrics> metrics;
  // replicates[r][e]: replicate r, estimator e in config order.
  std::vector<std::vector<ReplicateEstimate>> replicates;
};

// Replicate r analyses SimulateObserved-style data drawn from
// RngKey(seed).Child("replicate").Child(r); psi0 comes from truth_reps
// counterfactual runs under RngKey(seed).Child("truth").
ExperimentResult RunExperiment(const DagModel& model, const EstimationSpec& spec,
                               const ExperimentConfig& config);

// Scalar parameters interpolated linearly from `from` (scenario 1) to `to`
// (scenario k).
struct SweepConfig {
  std::vector<std::string> params;
  std::vector<double> from;
  std::vector<double> to;
  std::int32_t k = 9;
};

std::vector<std::vector<double>> InterpolateScenarios(const std::vector<double>& from,
                                                      const std::vector<double>& to,
                                                      std::int32_t k);

struct SweepScenario {
  std::int32_t index = 0;  // 1-based
  std::vector<double> values;
  ExperimentResult result;
};

// Every scenario reuses config.seed, so scenarios share their random inputs.
std::vector<SweepScenario> ScenarioSweep(const DagModel& model, const EstimationSpec& spec,
                                         const ExperimentConfig& config, const SweepConfig& sweep);

// Metrics CSV. Extra leading columns (e.g. sweep coefficients) come from
// `extra_names` / `extra_values`, one value vector per row.
void WriteMetricsHeader(std::ostream& out, const std::vector<std::string>& extra_names);
void WriteMetricsRow(std::ostream& out, std::int32_t scenario, const EstimatorMetrics& m,
                     const std::vector<double>& extra_values);

// Per-replicate CSV: replicate, estimator, estimate, var_iid, var_boot, error.
void WriteReplicatesCsv(std::ostream& out, const ExperimentResult& result);

}  // namespace netsem
