#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "netsem/dataset.hpp"
#include "netsem/expr.hpp"
#include "netsem/network.hpp"
#include "netsem/value.hpp"

namespace netsem {

struct EvalContext {
  const Dataset* data = nullptr;         // columns defined so far
  const NetworkMatrix* network = nullptr;  // null when no network is attached
  const std::map<std::string, double, std::less<>>* scalars = nullptr;  // action / model parameters
  bool replace_na_with_zero = false;       // replaceNAw0
  const FunctionRegistry* registry = &FunctionRegistry::Default();

  std::int32_t n() const { return data != nullptr ? data->n() : 0; }
};

// n x |positions| block: entry (i, k) is column[i] for position 0, the value of
// i's positions[k]-th friend when i has that many friends, and missing (or 0
// when fill_zero) otherwise. Positions above kmax throw EvalError.
Value FriendLookup(std::span<const double> column, const NetworkMatrix& net,
                   std::span<const std::int32_t> positions, bool fill_zero = false);

Value Evaluate(const Expression& expr, const EvalContext& ctx);

}  // namespace netsem
