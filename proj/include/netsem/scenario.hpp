#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "netsem/error.hpp"
#include "netsem/estimators.hpp"
#include "netsem/experiment.hpp"
#include "netsem/model.hpp"

namespace netsem {

// Problem in a scenario file, located at line:column (1-based; 0 when the
// position is unknown).
class ScenarioError : public ModelError {
 public:
  ScenarioError(const std::string& source, std::int32_t line, std::int32_t column,
                const std::string& message);

  std::int32_t line() const { return line_; }
  std::int32_t column() const { return column_; }

 private:
  std::int32_t line_;
  std::int32_t column_;
};

struct Scenario {
  DagModel model;  // finalized
  std::int32_t n_test = 200;
  std::optional<EstimationSpec> estimation;
  std::optional<ExperimentConfig> experiment;
  std::optional<SweepConfig> sweep;
};

// A relative network path is taken from the scenario file's directory.
// Scalar overrides are applied before finalize to model parameters, action
// parameters and intervention parameters of the same name; a name matching
// none of them is an error.
Scenario ParseScenario(std::string_view text, const std::string& source = "<scenario>",
                       const ScalarMap& overrides = {});
Scenario LoadScenario(const std::filesystem::path& path, const ScalarMap& overrides = {});

// Canonical text; formulas come back fully parenthesised.
std::string SaveScenario(const Scenario& scenario);

}  // namespace netsem
