#include "netsem/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "netsem/error.hpp"

namespace netsem {
namespace {

double UniformAt(const Stream& rng, std::uint64_t counter) {
  return (static_cast<double>(rng.BitsAt(counter) >> 11) + 0.5) * 0x1.0p-53;
}

[[noreturn]] void BadParam(std::string_view node, std::int32_t unit, const std::string& what) {
  throw ParameterError("node '" + std::string(node) + "', unit " + std::to_string(unit + 1) +
                       ": " + what);
}

std::int32_t Width(const DistributionParams& params) {
  std::int32_t cols = 1;
  for (const auto& [name, v] : params) {
    if (v.cols() == 1) continue;
    if (cols != 1 && cols != v.cols()) throw EvalError("parameter widths disagree");
    cols = v.cols();
  }
  return cols;
}

void CheckRows(const DistributionParams& params, std::int32_t n) {
  for (const auto& [name, v] : params) {
    if (v.rows() != 1 && v.rows() != n) {
      throw EvalError("parameter '" + name + "' has " + std::to_string(v.rows()) +
                      " rows for " + std::to_string(n) + " units");
    }
  }
}

Value SampleBernoulli(const DistributionParams& p, std::int32_t n, const Stream& rng,
                      std::string_view node) {
  const Value& prob = p.at("prob");
  const std::int32_t cols = prob.cols();
  Value out(n, cols);
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t c = 0; c < cols; ++c) {
      const double q = prob.At(i, c);
      if (!(q >= 0.0 && q <= 1.0)) BadParam(node, i, "prob must lie in [0, 1]");
      out(i, c) = UniformAt(rng, static_cast<std::uint64_t>(i) * cols + c) < q ? 1.0 : 0.0;
    }
  }
  return out;
}

Value SampleNormal(const DistributionParams& p, std::int32_t n, const Stream& rng,
                   std::string_view node) {
  const Value& mean = p.at("mean");
  const Value& sd = p.at("sd");
  const std::int32_t cols = Width(p);
  Value out(n, cols);
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t c = 0; c < cols; ++c) {
      const double m = mean.At(i, c);
      const double s = sd.At(i, c);
      if (!std::isfinite(m)) BadParam(node, i, "mean must be finite");
      if (!(s > 0.0) || !std::isfinite(s)) BadParam(node, i, "sd must be positive");
      const double z = NormalQuantile(UniformAt(rng, static_cast<std::uint64_t>(i) * cols + c));
      out(i, c) = m + s * z;
    }
  }
  return out;
}

Value SampleUniform(const DistributionParams& p, std::int32_t n, const Stream& rng,
                    std::string_view node) {
  const Value& lo = p.at("min");
  const Value& hi = p.at("max");
  const std::int32_t cols = Width(p);
  Value out(n, cols);
  for (std::int32_t i = 0; i < n; ++i) {
    for (std::int32_t c = 0; c < cols; ++c) {
      const double a = lo.At(i, c);
      const double b = hi.At(i, c);
      if (!(std::isfinite(a) && std::isfinite(b) && a <= b)) {
        BadParam(node, i, "runif needs finite min <= max");
      }
      out(i, c) = a + (b - a) * UniformAt(rng, static_cast<std::uint64_t>(i) * cols + c);
    }
  }
  return out;
}

Value SampleCategorical(const DistributionParams& p, std::int32_t n, const Stream& rng,
                        std::string_view node, double base) {
  const Value& probs = p.at("probs");
  const std::int32_t k = probs.cols();
  Value out(n, 1);
  for (std::int32_t i = 0; i < n; ++i) {
    double total = 0.0;
    for (std::int32_t c = 0; c < k; ++c) {
      const double q = probs.At(i, c);
      if (!(q >= 0.0 && q <= 1.0)) BadParam(node, i, "category probabilities must lie in [0, 1]");
      total += q;
    }
    if (std::fabs(total - 1.0) > 1e-8) {
      BadParam(node, i, "category probabilities sum to " + std::to_string(total) + ", not 1");
    }
    const double u = UniformAt(rng, static_cast<std::uint64_t>(i));
    double cumulative = 0.0;
    std::int32_t category = k - 1;
    for (std::int32_t c = 0; c < k; ++c) {
      cumulative += probs.At(i, c);
      if (u < cumulative) {
        category = c;
        break;
      }
    }
    out(i, 0) = base + category;
  }
  return out;
}

DistributionRegistry MakeDefault() {
  DistributionRegistry reg;
  reg.Register("rbern", DistributionDef{{"prob"}, {}, ColumnType::kBinary, SampleBernoulli});
  reg.Register("rnorm", DistributionDef{{}, {{"mean", 0.0}, {"sd", 1.0}},
                                        ColumnType::kContinuous, SampleNormal});
  reg.Register("runif", DistributionDef{{}, {{"min", 0.0}, {"max", 1.0}},
                                        ColumnType::kContinuous, SampleUniform});
  reg.Register("rcat.b0",
               DistributionDef{{"probs"}, {}, ColumnType::kCategorical,
                               [](const DistributionParams& p, std::int32_t n, const Stream& rng,
                                  std::string_view node) {
                                 return SampleCategorical(p, n, rng, node, 0.0);
                               }});
  reg.Register("rcat.b1",
               DistributionDef{{"probs"}, {}, ColumnType::kCategorical,
                               [](const DistributionParams& p, std::int32_t n, const Stream& rng,
                                  std::string_view node) {
                                 return SampleCategorical(p, n, rng, node, 1.0);
                               }});
  reg.Register("rconst", DistributionDef{{"const"}, {}, ColumnType::kContinuous,
                                         [](const DistributionParams& p, std::int32_t n,
                                            const Stream&, std::string_view) {
                                           const Value& v = p.at("const");
                                           Value out(n, v.cols());
                                           for (std::int32_t i = 0; i < n; ++i) {
                                             for (std::int32_t c = 0; c < v.cols(); ++c) {
                                               out(i, c) = v.At(i, c);
                                             }
                                           }
                                           return out;
                                         }});
  return reg;
}

}  // namespace

bool DistributionDef::Accepts(std::string_view param) const {
  return std::find(required.begin(), required.end(), param) != required.end() ||
         defaults.contains(param);
}

const DistributionRegistry& DistributionRegistry::Default() {
  static const DistributionRegistry registry = MakeDefault();
  return registry;
}

void DistributionRegistry::Register(std::string name, DistributionDef def) {
  defs_[std::move(name)] = std::move(def);
}

const DistributionDef* DistributionRegistry::Find(std::string_view name) const {
  auto it = defs_.find(name);
  return it == defs_.end() ? nullptr : &it->second;
}

Value SampleDistribution(std::string_view distribution, DistributionParams params,
                         std::int32_t n, const Stream& rng, std::string_view node,
                         const DistributionRegistry& registry) {
  const DistributionDef* def = registry.Find(distribution);
  if (def == nullptr) {
    throw ModelError("unknown distribution '" + std::string(distribution) + "'");
  }
  for (const auto& [name, v] : params) {
    if (!def->Accepts(name)) {
      throw ModelError("distribution '" + std::string(distribution) +
                       "' has no parameter '" + name + "'");
    }
  }
  for (const auto& name : def->required) {
    if (!params.contains(name)) {
      throw ModelError("distribution '" + std::string(distribution) + "' needs parameter '" +
                       name + "'");
    }
  }
  for (const auto& [name, value] : def->defaults) {
    if (!params.contains(name)) params.emplace(name, Value::Scalar(value));
  }
  CheckRows(params, n);
  return def->sample(params, n, rng, node);
}

}  // namespace netsem
