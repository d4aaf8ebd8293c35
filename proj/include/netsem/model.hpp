#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "netsem/distributions.hpp"
#include "netsem/expr.hpp"

namespace netsem {

using ParamList = std::vector<std::pair<std::string, Expression>>;
using ScalarMap = std::map<std::string, double, std::less<>>;

// One structural equation: the distribution of a node given earlier nodes.
// A node with several names is multivariate; a single-name node whose value
// turns out k columns wide yields columns "name.1" .. "name.k".
struct NodeSpec {
  std::vector<std::string> names;
  std::string distribution;
  ParamList params;
  bool replace_na_with_zero = false;

  const std::string& name() const { return names.front(); }
};

// Convenience: NodeSpec from formula strings.
NodeSpec MakeNode(std::string name, std::string distribution,
                  const std::vector<std::pair<std::string, std::string>>& params,
                  bool replace_na_with_zero = false);

inline constexpr std::string_view kGeneratorGnp = "gnp";
inline constexpr std::string_view kGeneratorSmallWorld = "small_world";
inline constexpr std::string_view kGeneratorFile = "file";

struct NetworkSpec {
  std::string name;
  std::string generator;  // gnp | small_world | file
  ParamList params;       // evaluated at simulation time, must be unit-constant
  std::string path;       // network CSV for the file generator
};

// Intervention: replacement equations for existing nodes plus scalar
// parameters visible only to those equations.
struct Action {
  std::string name;
  std::vector<NodeSpec> nodes;
  ScalarMap params;

  const NodeSpec* Replacement(std::string_view node) const;
};

class DagModel {
 public:
  // Throws ModelError on forward references, duplicates, unknown
  // distributions, or friend references with no network declared.
  void AddNode(NodeSpec spec);
  // Returns true when an earlier network was replaced.
  bool AddNetwork(NetworkSpec spec);
  void AddAction(Action action);
  // Model-wide scalar constant usable in any formula.
  void SetParameter(const std::string& name, double value);

  // Test-simulates n_test units under the base model and every action, then
  // freezes the model.
  void Finalize(std::int32_t n_test = 200);
  bool finalized() const { return finalized_; }

  const std::vector<NodeSpec>& nodes() const { return nodes_; }
  const NodeSpec* FindNode(std::string_view name) const;
  std::optional<std::size_t> NodeIndex(std::string_view name) const;
  const std::optional<NetworkSpec>& network() const { return network_; }
  // Number of nodes sampled before the network.
  std::size_t network_position() const { return network_position_; }
  const std::vector<Action>& actions() const { return actions_; }
  const Action& GetAction(std::string_view name) const;
  bool HasAction(std::string_view name) const;
  const ScalarMap& parameters() const { return parameters_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  // Column names the base model produces, in order (multivariate nodes
  // contribute each declared name).
  std::vector<std::string> DeclaredNames() const;

  // Copy with scalar overrides applied to model parameters and to every
  // action parameter of the same name. Unknown names throw ParameterError.
  DagModel WithParameters(const ScalarMap& overrides) const;

 private:
  void CheckMutable() const;
  void CheckEquation(const NodeSpec& spec, std::size_t position, const ScalarMap& extra,
                     const std::string& owner) const;

  std::vector<NodeSpec> nodes_;
  std::optional<NetworkSpec> network_;
  std::size_t network_position_ = 0;
  std::vector<Action> actions_;
  ScalarMap parameters_;
  std::vector<std::string> warnings_;
  bool finalized_ = false;
};

}  // namespace netsem
