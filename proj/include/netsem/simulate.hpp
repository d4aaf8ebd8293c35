#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>

#include "netsem/dataset.hpp"
#include "netsem/model.hpp"
#include "netsem/rng.hpp"

namespace netsem {

// Sampling follows the model order: the network is drawn from substream
// "network" when its declaration point is reached, each node from
// "node/<name>". Replacement nodes of an action reuse the substream of the node
// they replace, so observed and counterfactual runs share every other draw.

// Observed data under the base model; the replicate key is RngKey(seed).
Dataset SimulateObserved(const DagModel& model, std::int32_t n, std::uint64_t seed);
// Counterfactual data under a named action.
Dataset SimulateAction(const DagModel& model, std::string_view action, std::int32_t n,
                       std::uint64_t seed);
// General form: action may be null; key selects the replicate.
Dataset Simulate(const DagModel& model, const Action* action, std::int32_t n,
                 const RngKey& key);

// Writes the dataset CSV and, when a network is attached, the network CSV.
void ExportDataset(const Dataset& data, const std::filesystem::path& data_csv,
                   const std::filesystem::path& network_csv);

namespace detail {
// Same as Simulate without the finalized-model precondition.
Dataset SimulateUnchecked(const DagModel& model, const Action* action, std::int32_t n,
                          const RngKey& key);
}  // namespace detail

}  // namespace netsem
