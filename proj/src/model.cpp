#include "netsem/model.hpp"

#include <algorithm>

#include "netsem/error.hpp"
#include "netsem/simulate.hpp"

namespace netsem {

NodeSpec MakeNode(std::string name, std::string distribution,
                  const std::vector<std::pair<std::string, std::string>>& params,
                  bool replace_na_with_zero) {
  NodeSpec spec;
  spec.names = {std::move(name)};
  spec.distribution = std::move(distribution);
  for (const auto& [key, text] : params) spec.params.emplace_back(key, Parse(text));
  spec.replace_na_with_zero = replace_na_with_zero;
  return spec;
}

const NodeSpec* Action::Replacement(std::string_view node) const {
  for (const auto& n : nodes) {
    if (n.name() == node) return &n;
  }
  return nullptr;
}

void DagModel::CheckMutable() const {
  if (finalized_) throw ModelError("model is finalized and can no longer change");
}

const NodeSpec* DagModel::FindNode(std::string_view name) const {
  auto idx = NodeIndex(name);
  return idx ? &nodes_[*idx] : nullptr;
}

std::optional<std::size_t> DagModel::NodeIndex(std::string_view name) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& names = nodes_[i].names;
    if (std::find(names.begin(), names.end(), name) != names.end()) return i;
  }
  return std::nullopt;
}

std::vector<std::string> DagModel::DeclaredNames() const {
  std::vector<std::string> out;
  for (const auto& n : nodes_) out.insert(out.end(), n.names.begin(), n.names.end());
  return out;
}

void DagModel::CheckEquation(const NodeSpec& spec, std::size_t position, const ScalarMap& extra,
                             const std::string& owner) const {
  const DistributionDef* def = DistributionRegistry::Default().Find(spec.distribution);
  if (def == nullptr) {
    throw ModelError(owner + ": unknown distribution '" + spec.distribution + "'");
  }
  std::set<std::string> seen;
  for (const auto& [key, expr] : spec.params) {
    if (!def->Accepts(key)) {
      throw ModelError(owner + ": distribution '" + spec.distribution +
                       "' has no parameter '" + key + "'");
    }
    if (!seen.insert(key).second) throw ModelError(owner + ": parameter '" + key + "' given twice");
  }
  for (const auto& req : def->required) {
    if (!seen.contains(req)) throw ModelError(owner + ": missing parameter '" + req + "'");
  }

  std::set<std::string> defined;
  for (std::size_t i = 0; i < position; ++i) {
    defined.insert(nodes_[i].names.begin(), nodes_[i].names.end());
  }
  std::set<std::string> scalars;
  for (const auto& [k, v] : parameters_) scalars.insert(k);
  for (const auto& [k, v] : extra) scalars.insert(k);

  const bool network_ready = network_.has_value() && network_position_ <= position;
  for (const auto& [key, expr] : spec.params) {
    for (const auto& dep : Dependencies(expr, scalars)) {
      if (!defined.contains(dep)) {
        throw ModelError(owner + " references '" + dep + "' before it is defined");
      }
    }
    if (UsesNetwork(expr) && !network_ready) {
      throw ModelError(owner + " uses friend references but no network attached");
    }
  }
}

void DagModel::AddNode(NodeSpec spec) {
  CheckMutable();
  if (spec.names.empty()) throw ModelError("node without a name");
  const auto existing = DeclaredNames();
  for (const auto& name : spec.names) {
    if (name.empty()) throw ModelError("node without a name");
    if (IsReservedName(name)) throw ModelError("'" + name + "' is a reserved name");
    if (std::find(existing.begin(), existing.end(), name) != existing.end()) {
      throw ModelError("duplicate node name '" + name + "'");
    }
    if (parameters_.contains(name)) {
      throw ModelError("node name '" + name + "' clashes with a model parameter");
    }
  }
  CheckEquation(spec, nodes_.size(), {}, "node '" + spec.name() + "'");
  nodes_.push_back(std::move(spec));
}

bool DagModel::AddNetwork(NetworkSpec spec) {
  CheckMutable();
  if (spec.generator != kGeneratorGnp && spec.generator != kGeneratorSmallWorld &&
      spec.generator != kGeneratorFile) {
    throw ModelError("unknown network generator '" + spec.generator + "'");
  }
  if (spec.generator == kGeneratorFile && spec.path.empty()) {
    throw ModelError("file network needs a path");
  }
  std::set<std::string> defined;
  for (const auto& n : nodes_) defined.insert(n.names.begin(), n.names.end());
  std::set<std::string> scalars;
  for (const auto& [k, v] : parameters_) scalars.insert(k);
  for (const auto& [key, expr] : spec.params) {
    for (const auto& dep : Dependencies(expr, scalars)) {
      if (!defined.contains(dep)) {
        throw ModelError("network '" + spec.name + "' references '" + dep +
                         "' before it is defined");
      }
    }
    if (UsesNetwork(expr)) {
      throw ModelError("network '" + spec.name + "' parameters cannot use friend references");
    }
  }
  const bool replaced = network_.has_value();
  if (replaced) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      for (const auto& [key, expr] : nodes_[i].params) {
        if (UsesNetwork(expr)) {
          throw ModelError("network '" + spec.name + "' redeclared after node '" +
                           nodes_[i].name() + "' already uses the previous network");
        }
      }
    }
    warnings_.push_back("network '" + network_->name + "' replaced by '" + spec.name + "'");
  }
  network_ = std::move(spec);
  network_position_ = nodes_.size();
  return replaced;
}

void DagModel::AddAction(Action action) {
  CheckMutable();
  if (action.name.empty()) throw ModelError("action without a name");
  if (HasAction(action.name)) throw ModelError("duplicate action '" + action.name + "'");
  const auto declared = DeclaredNames();
  for (const auto& [key, value] : action.params) {
    if (std::find(declared.begin(), declared.end(), key) != declared.end()) {
      throw ModelError("action '" + action.name + "' parameter '" + key +
                       "' clashes with a node name");
    }
  }
  std::set<std::string> replaced;
  for (const auto& node : action.nodes) {
    const std::string owner = "action '" + action.name + "', node '" + node.name() + "'";
    if (node.names.size() != 1) throw ModelError(owner + ": replacements must be single nodes");
    auto idx = NodeIndex(node.name());
    if (!idx) {
      throw ModelError("action '" + action.name + "' replaces unknown node '" + node.name() + "'");
    }
    if (nodes_[*idx].names.size() != 1) {
      throw ModelError(owner + ": multivariate nodes cannot be replaced");
    }
    if (!replaced.insert(node.name()).second) throw ModelError(owner + " replaced twice");
    CheckEquation(node, *idx, action.params, owner);
  }
  actions_.push_back(std::move(action));
}

void DagModel::SetParameter(const std::string& name, double value) {
  CheckMutable();
  if (IsReservedName(name)) throw ModelError("'" + name + "' is a reserved name");
  if (NodeIndex(name)) throw ModelError("parameter '" + name + "' clashes with a node name");
  parameters_[name] = value;
}

const Action& DagModel::GetAction(std::string_view name) const {
  for (const auto& a : actions_) {
    if (a.name == name) return a;
  }
  throw ModelError("unknown action '" + std::string(name) + "'");
}

bool DagModel::HasAction(std::string_view name) const {
  return std::any_of(actions_.begin(), actions_.end(),
                     [&](const Action& a) { return a.name == name; });
}

void DagModel::Finalize(std::int32_t n_test) {
  CheckMutable();
  if (nodes_.empty()) throw ModelError("model has no nodes");
  if (n_test < 1) throw ParameterError("n_test must be positive");
  const RngKey key = RngKey(0).Child("finalize");
  try {
    detail::SimulateUnchecked(*this, nullptr, n_test, key);
    for (const auto& action : actions_) {
      detail::SimulateUnchecked(*this, &action, n_test, key);
    }
  } catch (const Error& e) {
    throw ModelError(std::string("validation at n_test = ") + std::to_string(n_test) +
                     " failed: " + e.what());
  }
  finalized_ = true;
}

DagModel DagModel::WithParameters(const ScalarMap& overrides) const {
  DagModel copy = *this;
  for (const auto& [key, value] : overrides) {
    bool used = false;
    if (auto it = copy.parameters_.find(key); it != copy.parameters_.end()) {
      it->second = value;
      used = true;
    }
    for (auto& action : copy.actions_) {
      if (auto it = action.params.find(key); it != action.params.end()) {
        it->second = value;
        used = true;
      }
    }
    if (!used) throw ParameterError("no model or action parameter named '" + key + "'");
  }
  return copy;
}

}  // namespace netsem
