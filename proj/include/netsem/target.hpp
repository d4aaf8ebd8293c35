#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "netsem/model.hpp"
#include "netsem/rng.hpp"

namespace netsem {

// Monte-Carlo value of a causal parameter at fixed sample size n.
struct TargetResult {
  std::string parameter;
  double estimate = 0.0;
  double standard_error = 0.0;  // sd(replicate values) / sqrt(reps)
  std::int32_t reps = 0;
  std::int32_t n = 0;
  std::vector<double> replicates;  // empty unless kept
};

struct TargetOptions {
  std::string outcome;  // empty: the last node, which must be univariate
  int threads = 1;
  bool keep_replicates = false;
};

// Column name of the outcome; rejects categorical or unknown columns.
std::string ResolveOutcome(const DagModel& model, std::string_view requested);

// Replicate r simulates from key root.Child("replicate").Child(r) with a fresh
// network, so any prefix of replicates reproduces regardless of scheduling.
// An empty action name means the observed (base) model.
TargetResult MonteCarloTargetMean(const DagModel& model, std::string_view action, std::int32_t n,
                                  std::int32_t reps, const RngKey& root,
                                  const TargetOptions& options = {});
TargetResult MonteCarloTargetMean(const DagModel& model, std::string_view action, std::int32_t n,
                                  std::int32_t reps, std::uint64_t seed,
                                  const TargetOptions& options = {});

// mean(Y under action1) - mean(Y under action0), both arms sharing each
// replicate's key so network and untouched nodes coincide.
TargetResult Ate(const DagModel& model, std::string_view action1, std::string_view action0,
                 std::int32_t n, std::int32_t reps, std::uint64_t seed,
                 const TargetOptions& options = {});

}  // namespace netsem
