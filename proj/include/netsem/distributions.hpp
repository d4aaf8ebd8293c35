#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netsem/dataset.hpp"
#include "netsem/rng.hpp"
#include "netsem/value.hpp"

namespace netsem {

using DistributionParams = std::map<std::string, Value, std::less<>>;

// Draws n units. Unit i, column c takes the (i * cols + c)-th draw of the
// stream, so each unit's randomness is fixed by its index alone.
using Sampler = std::function<Value(const DistributionParams& params, std::int32_t n,
                                    const Stream& rng, std::string_view node)>;

struct DistributionDef {
  std::vector<std::string> required;
  std::map<std::string, double, std::less<>> defaults;
  ColumnType type = ColumnType::kContinuous;
  Sampler sample;

  bool Accepts(std::string_view param) const;
};

// rbern(prob), rnorm(mean = 0, sd = 1), runif(min = 0, max = 1),
// rcat.b0(probs) coded 0..K-1, rcat.b1(probs) coded 1..K, rconst(const).
class DistributionRegistry {
 public:
  static const DistributionRegistry& Default();

  void Register(std::string name, DistributionDef def);
  const DistributionDef* Find(std::string_view name) const;

 private:
  std::map<std::string, DistributionDef, std::less<>> defs_;
};

// Fills defaults, checks the signature, samples. Out-of-range parameters
// raise ParameterError naming the node and the (1-based) unit.
Value SampleDistribution(std::string_view distribution, DistributionParams params,
                         std::int32_t n, const Stream& rng, std::string_view node,
                         const DistributionRegistry& registry = DistributionRegistry::Default());

}  // namespace netsem
