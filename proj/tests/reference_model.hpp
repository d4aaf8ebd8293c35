#pragma once

#include "netsem/estimators.hpp"
#include "netsem/model.hpp"

namespace netsem::testing {

struct NetworkCoefficients {
  double mean_w1 = -1.5;
  double sum_w2 = -1.4;
  double sum_w3 = 2.1;
};

// Small-world covariates, normal exposure, logistic outcome driven by own and
// friends' covariates and exposures. Action "gstar" shifts the exposure
// unless the density ratio exceeds trunc; action "null" keeps it as observed.
inline DagModel ReferenceModel(NetworkCoefficients b = {}, double shift = 0.3,
                               double trunc = 1.0, bool finalize = true) {
  DagModel m;
  m.SetParameter("b_meanW1", b.mean_w1);
  m.SetParameter("b_sumW2", b.sum_w2);
  m.SetParameter("b_sumW3", b.sum_w3);
  m.AddNetwork(NetworkSpec{"net", "small_world",
                           {{"dim", Parse("1")}, {"nei", Parse("3")}, {"p", Parse("0.3")}},
                           ""});
  m.AddNode(MakeNode("W1", "rcat.b0",
                     {{"probs", "c(0.0494, 0.1823, 0.2806, 0.2680, 0.1651, 0.0546)"}}));
  m.AddNode(MakeNode("W2", "rbern", {{"prob", "plogis(-0.2 + W1/3)"}}));
  m.AddNode(MakeNode("W3", "rbern", {{"prob", "0.6"}}));
  m.AddNode(MakeNode("A.obs", "rnorm", {{"mean", "0.58*W2 + 0.33*W3"}, {"sd", "1"}}));
  m.AddNode(MakeNode("A", "rconst", {{"const", "A.obs"}}));
  m.AddNode(MakeNode(
      "Y", "rbern",
      {{"prob",
        "plogis(5 + -0.5*W1 - 0.58*W2 - 0.33*W3"
        " + b_meanW1*ifelse(nF > 0, sum(W1[[1:Kmax]])/nF, 0)"
        " + b_sumW2*sum(W2[[1:Kmax]]) + b_sumW3*sum(W3[[1:Kmax]])"
        " + 0.35*A + 0.15*sum(A[[1:Kmax]]))"}},
      true));

  Action gstar{"gstar",
               {MakeNode("A", "rconst",
                         {{"const",
                           "ifelse(A.obs - (0.58*W2 + 0.33*W3) > (log(trunc)/shift + shift/2), "
                           "A.obs, A.obs + shift)"}})},
               {{"trunc", trunc}, {"shift", shift}}};
  m.AddAction(gstar);
  m.AddAction(Action{"null", {MakeNode("A", "rconst", {{"const", "A.obs"}})}, {}});
  if (finalize) m.Finalize();
  return m;
}

// Correctly specified estimation setup for ReferenceModel.
inline EstimationSpec ReferenceEstimation(double shift = 0.5, double trunc = 1.0,
                                          std::int32_t bootstrap = 0) {
  EstimationSpec spec;
  spec.sw = {MakeSummary("W1", "W1"),
             MakeSummary("W2", "W2"),
             MakeSummary("W3", "W3"),
             MakeSummary("meanW1", "ifelse(nF > 0, sum(W1[[1:Kmax]])/nF, 0)", true),
             MakeSummary("sumW2", "sum(W2[[1:Kmax]])", true),
             MakeSummary("sumW3", "sum(W3[[1:Kmax]])", true)};
  spec.sa = {MakeSummary("A", "A"), MakeSummary("sumA", "sum(A[[1:Kmax]])", true)};
  spec.intervention.exposures = {
      {"A", Parse("ifelse(A - (0.58*W2 + 0.33*W3) > (log(trunc)/shift + shift/2), A, A + shift)")}};
  spec.intervention.params = {{"trunc", trunc}, {"shift", shift}};
  spec.qform = ParseRegression("Y ~ A + sumA + meanW1 + sumW2 + sumW3 + W1 + W2 + W3");
  spec.hform = ParseRegression("A + sumA ~ meanW1 + sumW2 + sumW3 + W1 + W2 + W3");
  spec.bootstrap = bootstrap;
  return spec;
}

}  // namespace netsem::testing
