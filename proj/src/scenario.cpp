#include "netsem/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "netsem/dataset.hpp"

namespace netsem {

ScenarioError::ScenarioError(const std::string& source, std::int32_t line, std::int32_t column,
                             const std::string& message)
    : ModelError(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

namespace {

class Reader {
 public:
  explicit Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void Fail(const YAML::Node& at, const std::string& message) const {
    const auto mark = at.Mark();
    if (mark.is_null()) throw ScenarioError(source_, 0, 0, message);
    throw ScenarioError(source_, mark.line + 1, mark.column + 1, message);
  }

  void Keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed,
            const std::string& where) const {
    if (!map.IsMap()) Fail(map, where + " must be a mapping");
    for (const auto& kv : map) {
      const auto key = kv.first.as<std::string>();
      bool ok = false;
      for (auto a : allowed) ok = ok || a == key;
      if (!ok) Fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  YAML::Node Required(const YAML::Node& map, const char* key, const std::string& where) const {
    auto v = map[key];
    if (!v) Fail(map, where + " needs '" + key + "'");
    return v;
  }

  std::string Text(const YAML::Node& v, const std::string& what) const {
    if (!v.IsScalar()) Fail(v, what + " must be a scalar");
    return v.as<std::string>();
  }

  double Number(const YAML::Node& v, const std::string& what) const {
    if (!v.IsScalar()) Fail(v, what + " must be a number");
    try {
      return v.as<double>();
    } catch (const YAML::BadConversion&) {
      Fail(v, what + " must be a number, got '" + v.as<std::string>() + "'");
    }
  }

  std::int64_t Integer(const YAML::Node& v, const std::string& what) const {
    if (!v.IsScalar()) Fail(v, what + " must be an integer");
    try {
      return v.as<std::int64_t>();
    } catch (const YAML::BadConversion&) {
      Fail(v, what + " must be an integer, got '" + v.as<std::string>() + "'");
    }
  }

  bool Flag(const YAML::Node& v, const std::string& what) const {
    if (!v.IsScalar()) Fail(v, what + " must be true or false");
    try {
      return v.as<bool>();
    } catch (const YAML::BadConversion&) {
      Fail(v, what + " must be true or false");
    }
  }

  Expression Formula(const YAML::Node& v, const std::string& what) const {
    const auto text = Text(v, what);
    try {
      return Parse(text);
    } catch (const ParseError& e) {
      Fail(v, what + ": " + e.what());
    }
  }

  std::vector<double> Numbers(const YAML::Node& v, const std::string& what) const {
    if (!v.IsSequence()) Fail(v, what + " must be a list");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(Number(x, what));
    return out;
  }

  ScalarMap Scalars(const YAML::Node& v, const std::string& what, const ScalarMap& overrides,
                    std::set<std::string>& used) const {
    if (!v.IsMap()) Fail(v, what + " must be a mapping");
    ScalarMap out;
    for (const auto& kv : v) {
      const auto name = kv.first.as<std::string>();
      if (out.count(name)) Fail(kv.first, "duplicate " + what + " '" + name + "'");
      double value = Number(kv.second, what + " '" + name + "'");
      if (auto it = overrides.find(name); it != overrides.end()) {
        value = it->second;
        used.insert(name);
      }
      out[name] = value;
    }
    return out;
  }

  ParamList Params(const YAML::Node& v, const std::string& what) const {
    if (!v.IsMap()) Fail(v, what + " must be a mapping");
    ParamList out;
    for (const auto& kv : v) {
      const auto name = kv.first.as<std::string>();
      out.emplace_back(name, Formula(kv.second, what + " '" + name + "'"));
    }
    return out;
  }

  NodeSpec Node(const YAML::Node& v) const {
    Keys(v, {"name", "names", "distr", "params", "replaceNAw0"}, "node");
    NodeSpec spec;
    if (v["name"] && v["names"]) Fail(v, "node takes 'name' or 'names', not both");
    if (v["name"]) {
      spec.names.push_back(Text(v["name"], "node name"));
    } else if (v["names"]) {
      if (!v["names"].IsSequence() || v["names"].size() == 0) Fail(v["names"], "'names' must be a non-empty list");
      for (const auto& n : v["names"]) spec.names.push_back(Text(n, "node name"));
    } else {
      Fail(v, "node needs 'name'");
    }
    const std::string what = "node '" + spec.name() + "'";
    spec.distribution = Text(Required(v, "distr", what), what + " distr");
    if (v["params"]) spec.params = Params(v["params"], what + " parameter");
    if (v["replaceNAw0"]) spec.replace_na_with_zero = Flag(v["replaceNAw0"], "replaceNAw0");
    return spec;
  }

  std::vector<Summary> Summaries(const YAML::Node& v, const std::string& what) const {
    if (!v.IsSequence()) Fail(v, what + " must be a list");
    std::vector<Summary> out;
    for (const auto& s : v) {
      Keys(s, {"name", "expr", "replaceNAw0"}, what);
      Summary sum;
      sum.name = Text(Required(s, "name", what), what + " name");
      sum.expr = Formula(Required(s, "expr", what), what + " '" + sum.name + "'");
      if (s["replaceNAw0"]) sum.replace_na_with_zero = Flag(s["replaceNAw0"], "replaceNAw0");
      out.push_back(std::move(sum));
    }
    return out;
  }

  RegressionSpec Regression(const YAML::Node& v, const std::string& what) const {
    const auto text = Text(v, what);
    try {
      return ParseRegression(text);
    } catch (const ParseError& e) {
      Fail(v, what + ": " + e.what());
    }
  }

  const std::string& source() const { return source_; }

 private:
  std::string source_;
};

EstimationSpec ReadEstimation(const Reader& r, const YAML::Node& v, const ScalarMap& overrides,
                              std::set<std::string>& used) {
  r.Keys(v, {"sW", "sA", "intervention", "qform", "hform", "binning", "weight_cap", "bootstrap"},
         "estimation");
  EstimationSpec spec;
  if (v["sW"]) spec.sw = r.Summaries(v["sW"], "sW summary");
  if (v["sA"]) spec.sa = r.Summaries(v["sA"], "sA summary");
  const auto iv = r.Required(v, "intervention", "estimation");
  r.Keys(iv, {"exposures", "params"}, "intervention");
  const auto exposures = r.Required(iv, "exposures", "intervention");
  if (!exposures.IsSequence()) r.Fail(exposures, "intervention exposures must be a list");
  for (const auto& e : exposures) {
    r.Keys(e, {"name", "expr"}, "intervention exposure");
    auto name = r.Text(r.Required(e, "name", "intervention exposure"), "exposure name");
    spec.intervention.exposures.emplace_back(
        name, r.Formula(r.Required(e, "expr", "intervention exposure"), "exposure '" + name + "'"));
  }
  if (iv["params"]) spec.intervention.params = r.Scalars(iv["params"], "intervention parameter", overrides, used);
  spec.qform = r.Regression(r.Required(v, "qform", "estimation"), "qform");
  spec.hform = r.Regression(r.Required(v, "hform", "estimation"), "hform");
  if (v["binning"]) {
    r.Keys(v["binning"], {"max_per_bin"}, "binning");
    if (v["binning"]["max_per_bin"]) {
      spec.binning.max_per_bin = static_cast<std::int32_t>(r.Integer(v["binning"]["max_per_bin"], "max_per_bin"));
    }
  }
  if (v["weight_cap"]) spec.weight_cap = r.Number(v["weight_cap"], "weight_cap");
  if (v["bootstrap"]) {
    const auto b = v["bootstrap"];
    r.Keys(b, {"B", "scheme"}, "bootstrap");
    if (b["B"]) spec.bootstrap = static_cast<std::int32_t>(r.Integer(b["B"], "bootstrap B"));
    if (b["scheme"]) {
      try {
        spec.bootstrap_scheme = ParseBootstrapScheme(r.Text(b["scheme"], "bootstrap scheme"));
      } catch (const ParameterError& e) {
        r.Fail(b["scheme"], e.what());
      }
    }
  }
  try {
    ValidateSpec(spec);
  } catch (const Error& e) {
    r.Fail(v, e.what());
  }
  return spec;
}

void ReadExperiment(const Reader& r, const YAML::Node& v, Scenario& out) {
  r.Keys(v, {"n", "reps", "seed", "action", "truth_reps", "outcome", "estimators", "sweep"},
         "experiment");
  ExperimentConfig cfg;
  if (v["n"]) cfg.n = static_cast<std::int32_t>(r.Integer(v["n"], "experiment n"));
  if (v["reps"]) cfg.reps = static_cast<std::int32_t>(r.Integer(v["reps"], "experiment reps"));
  if (v["seed"]) cfg.seed = static_cast<std::uint64_t>(r.Integer(v["seed"], "experiment seed"));
  if (v["action"]) cfg.action = r.Text(v["action"], "experiment action");
  if (v["truth_reps"]) cfg.truth_reps = static_cast<std::int32_t>(r.Integer(v["truth_reps"], "truth_reps"));
  if (v["outcome"]) cfg.outcome = r.Text(v["outcome"], "experiment outcome");
  if (v["estimators"]) {
    if (!v["estimators"].IsSequence()) r.Fail(v["estimators"], "estimators must be a list");
    cfg.estimators.clear();
    for (const auto& e : v["estimators"]) {
      try {
        cfg.estimators.push_back(ParseEstimator(r.Text(e, "estimator")));
      } catch (const ParameterError& err) {
        r.Fail(e, err.what());
      }
    }
  }
  if (!cfg.action.empty() && !out.model.HasAction(cfg.action)) {
    r.Fail(v["action"], "unknown action '" + cfg.action + "'");
  }
  if (v["sweep"]) {
    const auto s = v["sweep"];
    r.Keys(s, {"params", "from", "to", "k"}, "sweep");
    SweepConfig sweep;
    const auto params = r.Required(s, "params", "sweep");
    if (!params.IsSequence()) r.Fail(params, "sweep params must be a list");
    for (const auto& p : params) {
      auto name = r.Text(p, "sweep parameter");
      if (!out.model.parameters().count(name)) r.Fail(p, "sweep parameter '" + name + "' is not a model parameter");
      sweep.params.push_back(name);
    }
    sweep.from = r.Numbers(r.Required(s, "from", "sweep"), "sweep from");
    sweep.to = r.Numbers(r.Required(s, "to", "sweep"), "sweep to");
    if (sweep.from.size() != sweep.params.size() || sweep.to.size() != sweep.params.size()) {
      r.Fail(s, "sweep 'from' and 'to' need one value per parameter");
    }
    if (s["k"]) sweep.k = static_cast<std::int32_t>(r.Integer(s["k"], "sweep k"));
    out.sweep = std::move(sweep);
  }
  out.experiment = std::move(cfg);
}

Scenario Read(const Reader& r, const YAML::Node& root, const ScalarMap& overrides,
              const std::filesystem::path& base) {
  if (!root.IsMap()) r.Fail(root, "scenario must be a mapping");
  r.Keys(root, {"parameters", "network", "nodes", "actions", "estimation", "experiment", "n_test"},
         "scenario");
  Scenario out;
  std::set<std::string> used;
  DagModel& m = out.model;

  if (root["parameters"]) {
    for (const auto& [name, value] : r.Scalars(root["parameters"], "parameter", overrides, used)) {
      m.SetParameter(name, value);
    }
  }
  if (root["n_test"]) out.n_test = static_cast<std::int32_t>(r.Integer(root["n_test"], "n_test"));

  std::optional<NetworkSpec> network;
  std::string network_after;
  const YAML::Node network_node = root["network"];
  if (network_node) {
    r.Keys(network_node, {"name", "generator", "params", "path", "after"}, "network");
    NetworkSpec spec;
    spec.name = network_node["name"] ? r.Text(network_node["name"], "network name") : "net";
    spec.generator = r.Text(r.Required(network_node, "generator", "network"), "network generator");
    if (network_node["params"]) spec.params = r.Params(network_node["params"], "network parameter");
    if (network_node["path"]) {
      std::filesystem::path p = r.Text(network_node["path"], "network path");
      spec.path = (p.is_relative() && !base.empty() ? base / p : p).string();
    }
    if (network_node["after"]) network_after = r.Text(network_node["after"], "network after");
    network = std::move(spec);
  }
  auto add_network = [&] {
    try {
      m.AddNetwork(*network);
    } catch (const Error& e) {
      r.Fail(network_node, e.what());
    }
  };
  if (network && network_after.empty()) add_network();

  const auto nodes = r.Required(root, "nodes", "scenario");
  if (!nodes.IsSequence()) r.Fail(nodes, "nodes must be a list");
  bool placed = !network || network_after.empty();
  for (const auto& n : nodes) {
    auto spec = r.Node(n);
    const auto names = spec.names;
    try {
      m.AddNode(std::move(spec));
    } catch (const Error& e) {
      r.Fail(n, e.what());
    }
    if (!placed && std::find(names.begin(), names.end(), network_after) != names.end()) {
      add_network();
      placed = true;
    }
  }
  if (!placed) r.Fail(network_node["after"], "network 'after' names no node: '" + network_after + "'");

  if (root["actions"]) {
    if (!root["actions"].IsSequence()) r.Fail(root["actions"], "actions must be a list");
    for (const auto& a : root["actions"]) {
      r.Keys(a, {"name", "params", "nodes"}, "action");
      Action action;
      action.name = r.Text(r.Required(a, "name", "action"), "action name");
      if (a["params"]) action.params = r.Scalars(a["params"], "action parameter", overrides, used);
      const auto replacements = r.Required(a, "nodes", "action '" + action.name + "'");
      if (!replacements.IsSequence()) r.Fail(replacements, "action nodes must be a list");
      for (const auto& n : replacements) action.nodes.push_back(r.Node(n));
      try {
        m.AddAction(std::move(action));
      } catch (const Error& e) {
        r.Fail(a, e.what());
      }
    }
  }

  if (root["estimation"]) out.estimation = ReadEstimation(r, root["estimation"], overrides, used);
  if (root["experiment"]) ReadExperiment(r, root["experiment"], out);
  if (out.estimation && out.experiment && out.experiment->outcome.empty()) {
    out.experiment->outcome = out.estimation->qform.outcomes.front();
  }

  for (const auto& [name, value] : overrides) {
    if (!used.count(name)) {
      throw ParameterError("--param '" + name + "' matches no parameter in " + r.source());
    }
  }
  m.Finalize(out.n_test);
  return out;
}

void EmitParams(YAML::Emitter& e, const ParamList& params) {
  e << YAML::Key << "params" << YAML::Value << YAML::BeginMap;
  for (const auto& [name, expr] : params) {
    e << YAML::Key << name << YAML::Value << YAML::DoubleQuoted << ToString(expr);
  }
  e << YAML::EndMap;
}

void EmitScalars(YAML::Emitter& e, const char* key, const ScalarMap& values) {
  if (values.empty()) return;
  e << YAML::Key << key << YAML::Value << YAML::BeginMap;
  for (const auto& [name, value] : values) e << YAML::Key << name << YAML::Value << FormatDouble(value);
  e << YAML::EndMap;
}

void EmitNode(YAML::Emitter& e, const NodeSpec& node) {
  e << YAML::BeginMap;
  if (node.names.size() == 1) {
    e << YAML::Key << "name" << YAML::Value << node.name();
  } else {
    e << YAML::Key << "names" << YAML::Value << YAML::Flow << node.names;
  }
  e << YAML::Key << "distr" << YAML::Value << node.distribution;
  if (!node.params.empty()) EmitParams(e, node.params);
  if (node.replace_na_with_zero) e << YAML::Key << "replaceNAw0" << YAML::Value << true;
  e << YAML::EndMap;
}

void EmitSummaries(YAML::Emitter& e, const char* key, const std::vector<Summary>& summaries) {
  if (summaries.empty()) return;
  e << YAML::Key << key << YAML::Value << YAML::BeginSeq;
  for (const auto& s : summaries) {
    e << YAML::BeginMap << YAML::Key << "name" << YAML::Value << s.name << YAML::Key << "expr"
      << YAML::Value << YAML::DoubleQuoted << ToString(s.expr);
    if (s.replace_na_with_zero) e << YAML::Key << "replaceNAw0" << YAML::Value << true;
    e << YAML::EndMap;
  }
  e << YAML::EndSeq;
}

}  // namespace

Scenario ParseScenario(std::string_view text, const std::string& source, const ScalarMap& overrides) {
  Reader r(source);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(text));
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(source, e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  return Read(r, root, overrides, {});
}

Scenario LoadScenario(const std::filesystem::path& path, const ScalarMap& overrides) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open scenario '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  Reader r(path.string());
  YAML::Node root;
  try {
    root = YAML::Load(text.str());
  } catch (const YAML::ParserException& e) {
    throw ScenarioError(path.string(), e.mark.line + 1, e.mark.column + 1, e.msg);
  }
  return Read(r, root, overrides, path.parent_path());
}

std::string SaveScenario(const Scenario& scenario) {
  const DagModel& m = scenario.model;
  YAML::Emitter e;
  e << YAML::BeginMap;
  EmitScalars(e, "parameters", m.parameters());
  e << YAML::Key << "n_test" << YAML::Value << scenario.n_test;
  if (const auto& net = m.network()) {
    e << YAML::Key << "network" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "name" << YAML::Value << net->name;
    e << YAML::Key << "generator" << YAML::Value << net->generator;
    if (!net->params.empty()) EmitParams(e, net->params);
    if (!net->path.empty()) e << YAML::Key << "path" << YAML::Value << net->path;
    if (m.network_position() > 0) {
      e << YAML::Key << "after" << YAML::Value << m.nodes()[m.network_position() - 1].names.back();
    }
    e << YAML::EndMap;
  }
  e << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto& node : m.nodes()) EmitNode(e, node);
  e << YAML::EndSeq;
  if (!m.actions().empty()) {
    e << YAML::Key << "actions" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : m.actions()) {
      e << YAML::BeginMap << YAML::Key << "name" << YAML::Value << a.name;
      EmitScalars(e, "params", a.params);
      e << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
      for (const auto& node : a.nodes) EmitNode(e, node);
      e << YAML::EndSeq << YAML::EndMap;
    }
    e << YAML::EndSeq;
  }
  if (const auto& spec = scenario.estimation) {
    e << YAML::Key << "estimation" << YAML::Value << YAML::BeginMap;
    EmitSummaries(e, "sW", spec->sw);
    EmitSummaries(e, "sA", spec->sa);
    e << YAML::Key << "intervention" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "exposures" << YAML::Value << YAML::BeginSeq;
    for (const auto& [name, expr] : spec->intervention.exposures) {
      e << YAML::BeginMap << YAML::Key << "name" << YAML::Value << name << YAML::Key << "expr"
        << YAML::Value << YAML::DoubleQuoted << ToString(expr) << YAML::EndMap;
    }
    e << YAML::EndSeq;
    EmitScalars(e, "params", spec->intervention.params);
    e << YAML::EndMap;
    e << YAML::Key << "qform" << YAML::Value << YAML::DoubleQuoted << ToString(spec->qform);
    e << YAML::Key << "hform" << YAML::Value << YAML::DoubleQuoted << ToString(spec->hform);
    e << YAML::Key << "binning" << YAML::Value << YAML::BeginMap << YAML::Key << "max_per_bin"
      << YAML::Value << spec->binning.max_per_bin << YAML::EndMap;
    e << YAML::Key << "weight_cap" << YAML::Value << FormatDouble(spec->weight_cap);
    e << YAML::Key << "bootstrap" << YAML::Value << YAML::BeginMap << YAML::Key << "B" << YAML::Value
      << spec->bootstrap << YAML::Key << "scheme" << YAML::Value
      << std::string(BootstrapSchemeName(spec->bootstrap_scheme)) << YAML::EndMap;
    e << YAML::EndMap;
  }
  if (const auto& cfg = scenario.experiment) {
    e << YAML::Key << "experiment" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "n" << YAML::Value << cfg->n;
    e << YAML::Key << "reps" << YAML::Value << cfg->reps;
    e << YAML::Key << "seed" << YAML::Value << cfg->seed;
    if (!cfg->action.empty()) e << YAML::Key << "action" << YAML::Value << cfg->action;
    e << YAML::Key << "truth_reps" << YAML::Value << cfg->truth_reps;
    if (!cfg->outcome.empty()) e << YAML::Key << "outcome" << YAML::Value << cfg->outcome;
    e << YAML::Key << "estimators" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (auto k : cfg->estimators) e << std::string(EstimatorName(k));
    e << YAML::EndSeq;
    if (const auto& s = scenario.sweep) {
      e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
      e << YAML::Key << "params" << YAML::Value << YAML::Flow << s->params;
      e << YAML::Key << "from" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (double x : s->from) e << FormatDouble(x);
      e << YAML::EndSeq << YAML::Key << "to" << YAML::Value << YAML::Flow << YAML::BeginSeq;
      for (double x : s->to) e << FormatDouble(x);
      e << YAML::EndSeq << YAML::Key << "k" << YAML::Value << s->k << YAML::EndMap;
    }
    e << YAML::EndMap;
  }
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

}  // namespace netsem
