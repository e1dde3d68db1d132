#pragma once

#include <eagl/problems.hpp>

#include <nlohmann/json.hpp>

namespace eagl {

// Exact distributional statistics of an ExactProblem, all computed by
// enumeration over the finite support.
struct InvarianceReport {
  // Probability that two independent draws sharing an explanation key carry
  // different labels, weighted by the explanation-key distribution.
  double label_disagreement = 0.0;
  // I(label; graph | explanation key), natural log.
  double conditional_mi_nats = 0.0;
  double expected_expl_edges = 0.0;
  // Error of the best predictor seeing the full graph, and of the best
  // predictor seeing only the explanation key.
  double bayes_error = 0.0;
  double expl_bayes_error = 0.0;
  // Explanation stability: whenever one support graph's explanation embeds
  // into another support graph, both share one explanation key.
  bool explanations_stable = false;
};

// Label-disagreement rate: group the support by explanation key e; with
// p_e the key mass and q_{e,y} the conditional label law, returns
// sum_e p_e * (1 - sum_y q_{e,y}^2).
double expl_label_disagreement_exact(const ExactProblem& p);

// I(label; graph | explanation key) in nats. Requires stable explanations
// (the key- and containment-conditioned forms coincide only then); throws
// ConditionViolated otherwise instead of silently picking one reading.
double expl_conditional_mi_exact(const ExactProblem& p);

double bayes_error_exact(const ExactProblem& p);
double expl_bayes_error_exact(const ExactProblem& p);

// Mean number of explanation edges under the graph distribution.
double expected_expl_edges(const ExactProblem& p);

// True iff for every pair of support graphs g, g': the explanation of g
// embedding into g' implies g and g' share one explanation key.
bool check_explanation_stability(const ExactProblem& p);

// Computes every field and asserts the two enumeration identities
// label_disagreement <= 2*expl_bayes_error and bayes_error <=
// expl_bayes_error (tolerance 1e-12). A violation is an internal defect and
// throws Error. Propagates ConditionViolated from the MI computation.
InvarianceReport invariance_report(const ExactProblem& p);

nlohmann::json report_to_json(const InvarianceReport& r);

}  // namespace eagl
