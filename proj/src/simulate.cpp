#include "netsem/simulate.hpp"

#include <cmath>
#include <fstream>
#include <memory>
#include <string>

#include "netsem/error.hpp"
#include "netsem/eval.hpp"
#include "netsem/io.hpp"

namespace netsem {
namespace {

double UnitConstant(const Value& v, const std::string& what) {
  if (v.cols() != 1) throw EvalError(what + " must be a single value");
  const double first = v(0, 0);
  for (std::int32_t r = 1; r < v.rows(); ++r) {
    if (v(r, 0) != first) throw EvalError(what + " must be the same for every unit");
  }
  if (IsMissing(first)) throw EvalError(what + " is missing");
  return first;
}

std::int32_t AsCount(double x, const std::string& what) {
  if (x != std::floor(x) || x < 0 || x > 1e9) throw ParameterError(what + " must be a count");
  return static_cast<std::int32_t>(x);
}

std::shared_ptr<const NetworkMatrix> SampleNetwork(const NetworkSpec& spec, const Dataset& data,
                                                   const ScalarMap& scalars, const RngKey& key) {
  EvalContext ctx;
  ctx.data = &data;
  ctx.scalars = &scalars;
  ScalarMap values;
  for (const auto& [name, expr] : spec.params) {
    values[name] = UnitConstant(Evaluate(expr, ctx), "network parameter '" + name + "'");
  }
  auto param = [&](const char* name, std::optional<double> fallback = std::nullopt) {
    if (auto it = values.find(name); it != values.end()) return it->second;
    if (fallback) return *fallback;
    throw ModelError("network '" + spec.name + "' needs parameter '" + name + "'");
  };
  auto check_known = [&](std::initializer_list<std::string_view> known) {
    for (const auto& [name, v] : values) {
      bool ok = false;
      for (auto k : known) ok = ok || k == name;
      if (!ok) {
        throw ModelError("network generator '" + spec.generator + "' has no parameter '" +
                         name + "'");
      }
    }
  };
  const std::int32_t n = data.n();
  Stream rng(key.Child("network"));
  if (spec.generator == kGeneratorGnp) {
    check_known({"p"});
    return std::make_shared<const NetworkMatrix>(GenerateGnp(n, param("p"), rng));
  }
  if (spec.generator == kGeneratorSmallWorld) {
    check_known({"dim", "nei", "p"});
    return std::make_shared<const NetworkMatrix>(
        GenerateSmallWorld(n, AsCount(param("dim", 1.0), "dim"), AsCount(param("nei"), "nei"),
                           param("p"), rng));
  }
  if (spec.generator == kGeneratorFile) {
    check_known({});
    std::ifstream in(spec.path);
    if (!in) throw Error("cannot open network file '" + spec.path + "'");
    auto net = std::make_shared<const NetworkMatrix>(ReadNetworkCsv(in));
    if (net->n() != n) {
      throw ParameterError("network file '" + spec.path + "' has " + std::to_string(net->n()) +
                           " units, simulation asks for " + std::to_string(n));
    }
    return net;
  }
  throw ModelError("unknown network generator '" + spec.generator + "'");
}

template <typename E>
[[noreturn]] void Rethrow(const E& e, const std::string& node) {
  throw E("node '" + node + "': " + e.what());
}

void SampleNode(const NodeSpec& spec, const ScalarMap& scalars, const RngKey& key, Dataset& data) {
  EvalContext ctx;
  ctx.data = &data;
  ctx.network = data.network().get();
  ctx.scalars = &scalars;
  ctx.replace_na_with_zero = spec.replace_na_with_zero;
  const DistributionDef* def = DistributionRegistry::Default().Find(spec.distribution);
  if (def == nullptr) throw ModelError("unknown distribution '" + spec.distribution + "'");
  Value value;
  try {
    DistributionParams params;
    for (const auto& [name, expr] : spec.params) params.emplace(name, Evaluate(expr, ctx));
    value = SampleDistribution(spec.distribution, std::move(params), data.n(),
                               Stream(key.Child("node").Child(spec.name())), spec.name());
  } catch (const EvalError& e) {
    Rethrow(e, spec.name());
  } catch (const ModelError& e) {
    Rethrow(e, spec.name());
  }

  const std::int32_t width = value.cols();
  if (spec.names.size() > 1 && static_cast<std::int32_t>(spec.names.size()) != width) {
    throw EvalError("node '" + spec.name() + "': " + std::to_string(spec.names.size()) +
                    " names for a value " + std::to_string(width) + " columns wide");
  }
  for (std::int32_t c = 0; c < width; ++c) {
    std::string name = spec.names.size() > 1 ? spec.names[c]
                       : width == 1          ? spec.name()
                                             : spec.name() + "." + std::to_string(c + 1);
    data.Add(Column{std::move(name), def->type, value.ColumnValues(c, data.n())});
  }
}

}  // namespace

namespace detail {

Dataset SimulateUnchecked(const DagModel& model, const Action* action, std::int32_t n,
                          const RngKey& key) {
  if (n < 1) throw ParameterError("n must be at least 1");
  Dataset data(n);
  ScalarMap scalars = model.parameters();
  ScalarMap with_action = scalars;
  if (action != nullptr) {
    for (const auto& [k, v] : action->params) with_action[k] = v;
  }
  const auto& nodes = model.nodes();
  for (std::size_t i = 0; i <= nodes.size(); ++i) {
    if (model.network() && model.network_position() == i) {
      data.AttachNetwork(SampleNetwork(*model.network(), data, scalars, key));
    }
    if (i == nodes.size()) break;
    const NodeSpec* replacement = action != nullptr ? action->Replacement(nodes[i].name()) : nullptr;
    if (replacement != nullptr) {
      SampleNode(*replacement, with_action, key, data);
    } else {
      SampleNode(nodes[i], scalars, key, data);
    }
  }
  return data;
}

}  // namespace detail

Dataset Simulate(const DagModel& model, const Action* action, std::int32_t n,
                 const RngKey& key) {
  if (!model.finalized()) throw ModelError("model must be finalized before simulation");
  return detail::SimulateUnchecked(model, action, n, key);
}

Dataset SimulateObserved(const DagModel& model, std::int32_t n, std::uint64_t seed) {
  return Simulate(model, nullptr, n, RngKey(seed));
}

Dataset SimulateAction(const DagModel& model, std::string_view action, std::int32_t n,
                       std::uint64_t seed) {
  return Simulate(model, &model.GetAction(action), n, RngKey(seed));
}

void ExportDataset(const Dataset& data, const std::filesystem::path& data_csv,
                   const std::filesystem::path& network_csv) {
  WriteFileAtomically(data_csv, [&](std::ostream& out) { WriteDatasetCsv(out, data); });
  if (data.network()) {
    WriteFileAtomically(network_csv,
                        [&](std::ostream& out) { WriteNetworkCsv(out, *data.network()); });
  }
}

}  // namespace netsem
