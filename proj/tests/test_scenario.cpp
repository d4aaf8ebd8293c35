#include <string>

#include "doctest.h"
#include "netsem/scenario.hpp"
#include "netsem/simulate.hpp"

using namespace netsem;

namespace {

std::string Bundled(const std::string& name) { return std::string(NETSEM_SCENARIO_DIR) + "/" + name; }

std::string Csv(const Dataset& d) {
  std::ostringstream out;
  WriteDatasetCsv(out, d);
  return out.str();
}

std::string ErrorOf(const std::string& text) {
  try {
    ParseScenario(text, "t.scn");
  } catch (const ModelError& e) {
    return e.what();
  }
  return "";
}

const char* kSmall = R"yaml(
network:
  generator: gnp
  params: {p: "0.2"}
nodes:
  - name: W
    distr: rbern
    params: {prob: "0.5"}
  - name: Y
    distr: rbern
    params: {prob: "plogis(-1 + sum(W[[1:Kmax]]))"}
    replaceNAw0: true
)yaml";

}  // namespace

TEST_CASE("bundled scenarios load and finalize") {
  for (const char* name : {"paper_s4.scn", "toy_gnp.scn", "iid_baseline.scn"}) {
    INFO(name);
    auto s = LoadScenario(Bundled(name));
    CHECK(s.model.finalized());
  }
  auto s = LoadScenario(Bundled("paper_s4.scn"));
  CHECK(s.model.nodes().size() == 6);
  CHECK(s.model.HasAction("gstar"));
  CHECK(s.model.HasAction("null"));
  CHECK(s.model.GetAction("gstar").params.at("shift") == 0.3);
  REQUIRE(s.estimation.has_value());
  CHECK(s.estimation->bootstrap == 100);
  CHECK(s.estimation->bootstrap_scheme == BootstrapScheme::kFull);
  REQUIRE(s.sweep.has_value());
  CHECK(s.sweep->k == 9);
  CHECK(s.experiment->outcome == "Y");
}

TEST_CASE("save and reload give the same model") {
  for (const char* name : {"paper_s4.scn", "toy_gnp.scn", "iid_baseline.scn"}) {
    INFO(name);
    auto a = LoadScenario(Bundled(name));
    const auto text = SaveScenario(a);
    auto b = ParseScenario(text, "saved");
    CHECK(SaveScenario(b) == text);
    CHECK(Csv(SimulateObserved(a.model, 60, 4)) == Csv(SimulateObserved(b.model, 60, 4)));
    for (const auto& act : a.model.actions()) {
      CHECK(Csv(SimulateAction(a.model, act.name, 60, 4)) == Csv(SimulateAction(b.model, act.name, 60, 4)));
    }
  }
}

TEST_CASE("network placement after a node") {
  std::string text = kSmall;
  text.replace(text.find("  params: {p: \"0.2\"}"), 0, "  after: W\n");
  auto s = ParseScenario(text);
  CHECK(s.model.network_position() == 1);
  auto again = ParseScenario(SaveScenario(s));
  CHECK(again.model.network_position() == 1);
}

TEST_CASE("unknown keys are rejected with a position") {
  std::string text = kSmall;
  text.replace(text.find("nodes:"), 6, "nodez:");
  try {
    ParseScenario(text, "t.scn");
    FAIL("accepted an unknown key");
  } catch (const ScenarioError& e) {
    CHECK(std::string(e.what()).find("unknown key 'nodez'") != std::string::npos);
    CHECK(e.line() == 5);
    CHECK(e.column() == 1);
  }
  text = kSmall;
  text.replace(text.find("    distr: rbern\n    params: {prob: \"0.5\"}"), 0, "    dist: x\n");
  CHECK(ErrorOf(text).find("unknown key 'dist' in node") != std::string::npos);
}

TEST_CASE("scenario errors name what went wrong") {
  std::string forward = kSmall;
  forward.replace(forward.find("prob: \"0.5\""), 11, "prob: \"Y\"");
  auto msg = ErrorOf(forward);
  CHECK(msg.find("'W'") != std::string::npos);
  CHECK(msg.find("'Y'") != std::string::npos);
  CHECK(msg.find("t.scn:6:5:") != std::string::npos);

  std::string bad = kSmall;
  bad.replace(bad.find("distr: rbern"), 12, "distr: rbeta");
  CHECK(ErrorOf(bad).find("rbeta") != std::string::npos);

  std::string gen = kSmall;
  gen.replace(gen.find("gnp"), 3, "lattice");
  CHECK(ErrorOf(gen).find("lattice") != std::string::npos);

  std::string syntax = kSmall;
  syntax.replace(syntax.find("\"0.5\""), 5, "\"0.5 +\"");
  CHECK(ErrorOf(syntax).find("t.scn:8:20:") != std::string::npos);

  CHECK_THROWS_AS(ParseScenario("nodes: [ {name: W"), ScenarioError);
  CHECK(ErrorOf("parameters: {b: 1}\n").find("needs 'nodes'") != std::string::npos);
}

TEST_CASE("parameter overrides") {
  auto s = LoadScenario(Bundled("paper_s4.scn"), {{"shift", 0.5}, {"b_sumW3", 0.0}});
  CHECK(s.model.GetAction("gstar").params.at("shift") == 0.5);
  CHECK(s.estimation->intervention.params.at("shift") == 0.5);
  CHECK(s.model.parameters().at("b_sumW3") == 0.0);
  CHECK_THROWS_AS(LoadScenario(Bundled("paper_s4.scn"), {{"shfit", 0.5}}), ParameterError);
}
