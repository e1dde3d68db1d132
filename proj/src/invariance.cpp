#include <eagl/invariance.hpp>

#include <eagl/errors.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <vector>

namespace eagl {

namespace {

struct KeyGroup {
  double mass = 0.0;
  std::vector<double> label_mass;  // indexed by label
  // joint mass per (graph, label) pair inside this key group
  std::vector<std::pair<int, double>> graph_label_mass;  // (entry index, prob)
};

std::map<CanonicalKey, KeyGroup> group_by_expl_key(const ExactProblem& p) {
  std::map<CanonicalKey, KeyGroup> groups;
  for (std::size_t i = 0; i < p.entries.size(); ++i) {
    const ExactEntry& e = p.entries[i];
    KeyGroup& g = groups[p.expl_keys[static_cast<std::size_t>(e.graph_id)]];
    g.mass += e.prob;
    if (static_cast<int>(g.label_mass.size()) <= e.label) g.label_mass.resize(e.label + 1, 0.0);
    g.label_mass[static_cast<std::size_t>(e.label)] += e.prob;
    g.graph_label_mass.push_back({static_cast<int>(i), e.prob});
  }
  return groups;
}

}  // namespace

double expl_label_disagreement_exact(const ExactProblem& p) {
  double total = 0.0;
  for (const auto& [key, g] : group_by_expl_key(p)) {
    double same = 0.0;
    for (double m : g.label_mass) {
      double q = m / g.mass;
      same += q * q;
    }
    total += g.mass * (1.0 - same);
  }
  return total;
}

double expl_conditional_mi_exact(const ExactProblem& p) {
  if (!check_explanation_stability(p))
    throw ConditionViolated(
        "explanations are unstable under containment; the key-conditioned "
        "mutual information would not match the containment-conditioned one");
  double mi = 0.0;
  for (const auto& [key, g] : group_by_expl_key(p)) {
    for (const auto& [entry_idx, prob] : g.graph_label_mass) {
      const ExactEntry& e = p.entries[static_cast<std::size_t>(entry_idx)];
      double label_mass = g.label_mass[static_cast<std::size_t>(e.label)];
      double graph_mass = p.graph_mass(e.graph_id);
      // prob = P(y, g); dividing the joint by the two conditionals'
      // product leaves ln[P(y,g|e) / (P(y|e) P(g|e))] after the shared
      // P(e) factors cancel.
      mi += prob * std::log(prob * g.mass / (label_mass * graph_mass));
    }
  }
  // Enumeration roundoff can land a hair below zero.
  return std::max(0.0, mi);
}

double bayes_error_exact(const ExactProblem& p) {
  // For each graph, the best predictor keeps the heaviest label.
  std::map<int, std::vector<double>> by_graph;
  for (const ExactEntry& e : p.entries) {
    std::vector<double>& lm = by_graph[e.graph_id];
    if (static_cast<int>(lm.size()) <= e.label) lm.resize(e.label + 1, 0.0);
    lm[static_cast<std::size_t>(e.label)] += e.prob;
  }
  double err = 0.0;
  for (const auto& [gid, lm] : by_graph) {
    double mass = 0.0, best = 0.0;
    for (double m : lm) {
      mass += m;
      best = std::max(best, m);
    }
    err += mass - best;
  }
  return err;
}

double expl_bayes_error_exact(const ExactProblem& p) {
  double err = 0.0;
  for (const auto& [key, g] : group_by_expl_key(p)) {
    double best = 0.0;
    for (double m : g.label_mass) best = std::max(best, m);
    err += g.mass - best;
  }
  return err;
}

double expected_expl_edges(const ExactProblem& p) {
  double total = 0.0;
  for (const ExactEntry& e : p.entries)
    total +=
        e.prob * static_cast<double>(p.explanations[static_cast<std::size_t>(e.graph_id)].edge_subset.size());
  return total;
}

bool check_explanation_stability(const ExactProblem& p) {
  const int n = static_cast<int>(p.graphs.size());
  std::vector<Graph> expl_graphs;
  expl_graphs.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    expl_graphs.push_back(explanation_graph(p.graphs[static_cast<std::size_t>(i)],
                                            p.explanations[static_cast<std::size_t>(i)]));
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (p.expl_keys[static_cast<std::size_t>(i)] == p.expl_keys[static_cast<std::size_t>(j)])
        continue;
      if (contains_subgraph(expl_graphs[static_cast<std::size_t>(i)],
                            p.graphs[static_cast<std::size_t>(j)]))
        return false;
    }
  }
  return true;
}

InvarianceReport invariance_report(const ExactProblem& p) {
  InvarianceReport r;
  r.label_disagreement = expl_label_disagreement_exact(p);
  r.conditional_mi_nats = expl_conditional_mi_exact(p);
  r.expected_expl_edges = expected_expl_edges(p);
  r.bayes_error = bayes_error_exact(p);
  r.expl_bayes_error = expl_bayes_error_exact(p);
  r.explanations_stable = true;  // the MI computation already refused otherwise
  if (r.label_disagreement > 2.0 * r.expl_bayes_error + 1e-12)
    throw Error("label disagreement exceeds twice the explanation-level error");
  if (r.bayes_error > r.expl_bayes_error + 1e-12)
    throw Error("full-graph error exceeds the explanation-level error");
  return r;
}

nlohmann::json report_to_json(const InvarianceReport& r) {
  return {{"label_disagreement", r.label_disagreement},
          {"conditional_mi_nats", r.conditional_mi_nats},
          {"expected_expl_edges", r.expected_expl_edges},
          {"bayes_error", r.bayes_error},
          {"expl_bayes_error", r.expl_bayes_error},
          {"explanations_stable", r.explanations_stable}};
}

}  // namespace eagl
