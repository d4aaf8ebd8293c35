#pragma once

#include <string>
#include <utility>
#include <vector>

#include "netsem/dataset.hpp"
#include "netsem/expr.hpp"
#include "netsem/model.hpp"

namespace netsem {

// Named per-unit summary of own and friends' columns.
struct Summary {
  std::string name;
  Expression expr;
  bool replace_na_with_zero = false;
};

Summary MakeSummary(std::string name, std::string_view formula, bool replace_na_with_zero = false);

// Appends one column per summary, evaluated in order against the attached
// network (later summaries may use earlier ones). A summary that is a bare
// reference to an existing column of the same name is a no-op. A summary k
// columns wide yields name.1 .. name.k. Name collisions throw ModelError.
Dataset BuildSummaries(const Dataset& data, const std::vector<Summary>& summaries,
                       const ScalarMap& scalars = {});

// Estimation-side intervention: new values for exposure columns, computed
// from the observed data with the given scalar parameters.
struct Intervention {
  std::vector<std::pair<std::string, Expression>> exposures;
  ScalarMap params;
};

// All replacement expressions see the unmodified input.
Dataset ApplyIntervention(const Dataset& data, const Intervention& intervention);

}  // namespace netsem
