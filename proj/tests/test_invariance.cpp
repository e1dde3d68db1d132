#include <doctest.h>

#include <cmath>
#include <cstddef>
#include <map>
#include <vector>

#include "eagl/errors.hpp"
#include "eagl/invariance.hpp"
#include "eagl/problems.hpp"
#include "eagl/rng.hpp"
#include "test_util.hpp"

using namespace eagl;

namespace {

// Conditional MI via the entropy split H(Y|key) - H(Y|graph); the main
// implementation sums joint-over-marginals log ratios instead.
double mi_entropy_oracle(const ExactProblem& p) {
  auto cond_entropy = [&](auto&& cell_of) {
    std::map<std::pair<std::string, int>, double> joint;
    std::map<std::string, double> marginal;
    for (const ExactEntry& e : p.entries) {
      std::string cell = cell_of(e);
      joint[{cell, e.label}] += e.prob;
      marginal[cell] += e.prob;
    }
    double h = 0.0;
    for (const auto& [cell_label, m] : joint) h -= m * std::log(m / marginal[cell_label.first]);
    return h;
  };
  double h_given_key = cond_entropy([&](const ExactEntry& e) {
    return p.expl_keys[static_cast<std::size_t>(e.graph_id)].bytes;
  });
  double h_given_graph = cond_entropy([&](const ExactEntry& e) {
    return p.graph_keys[static_cast<std::size_t>(e.graph_id)].bytes;
  });
  return h_given_key - h_given_graph;
}

// Family with shared explanation keys but stable explanations: all nodes of
// a group carry the group's tag, the explanation is one tagged node, so the
// explanation embeds exactly into its own group.
ExactProblem tagged_group_problem(RngStream& rng) {
  std::vector<Graph> graphs;
  std::vector<Explanation> expls;
  std::vector<ExactEntry> entries;
  std::vector<double> raw;
  for (int tag = 1; tag <= 3; ++tag) {
    int members = 2 + static_cast<int>(rng.below(2));
    for (int j = 0; j < members; ++j) {
      Graph cyc = gen_motif(MotifKind::cycle, 3 + 2 * j + (tag - 1) % 2);
      cyc.node_tags.assign(static_cast<std::size_t>(cyc.node_count), tag);
      int id = static_cast<int>(graphs.size());
      expls.push_back(make_explanation(cyc, {0}));
      graphs.push_back(std::move(cyc));
      for (int label = 0; label <= 1; ++label) {
        entries.push_back({id, label, 0.0});
        raw.push_back(0.05 + rng.real());
      }
    }
  }
  double sum = 0.0;
  for (double w : raw) sum += w;
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
    entries[i].prob = raw[i] / sum;
    acc += entries[i].prob;
  }
  entries.back().prob = 1.0 - acc;
  return make_exact_problem(std::move(graphs), std::move(expls), std::move(entries));
}

// Two entries per support graph of the cycle-pair problem, flipping the true
// label with a per-graph rate of eta or 2*eta.
ExactProblem noisy_cycle_pair(int K, double eta) {
  ExactProblem base = cycle_pair_problem(K);
  std::vector<ExactEntry> entries;
  for (std::size_t i = 0; i < base.entries.size(); ++i) {
    const ExactEntry& e = base.entries[i];
    double rate = eta * static_cast<double>(1 + i % 2);
    entries.push_back({e.graph_id, e.label, e.prob * (1.0 - rate)});
    entries.push_back({e.graph_id, 1 - e.label, e.prob * rate});
  }
  return make_exact_problem(base.graphs, base.explanations, std::move(entries));
}

}  // namespace

TEST_SUITE("invariance") {

TEST_CASE("cycle pair report is fully clean") {
  for (int K : {5, 12}) {
    InvarianceReport r = invariance_report(cycle_pair_problem(K));
    CHECK(r.label_disagreement == 0.0);
    CHECK(r.conditional_mi_nats == 0.0);
    CHECK(r.bayes_error == 0.0);
    CHECK(r.expl_bayes_error == 0.0);
    CHECK(r.explanations_stable);
    // Half the mass explains as a triangle (3 edges), half as a square (4).
    CHECK(std::abs(r.expected_expl_edges - 3.5) < 1e-12);
  }
}

TEST_CASE("hand-computed disagreement values") {
  // One graph, labels split evenly: 1 - 0.25 - 0.25.
  Graph c5 = gen_motif(MotifKind::cycle, 5);
  ExactProblem even = make_exact_problem(
      {c5}, {make_explanation(c5, {0, 1, 2, 3, 4})}, {{0, 0, 0.5}, {0, 1, 0.5}});
  CHECK(std::abs(expl_label_disagreement_exact(even) - 0.5) < 1e-12);

  // Two key groups, each with conditional label law (0.9, 0.1):
  // 2 * 0.5 * (1 - 0.81 - 0.01) = 0.18.
  Graph c6 = gen_motif(MotifKind::cycle, 6);
  ExactProblem two = make_exact_problem(
      {c5, c6},
      {make_explanation(c5, {0, 1, 2, 3, 4}), make_explanation(c6, {0, 1, 2, 3, 4, 5})},
      {{0, 0, 0.45}, {0, 1, 0.05}, {1, 1, 0.45}, {1, 0, 0.05}});
  CHECK(std::abs(expl_label_disagreement_exact(two) - 0.18) < 1e-12);
}

TEST_CASE("disagreement matches the triple-enumeration oracle") {
  RngStream rng(0x5eedbeef);
  for (int trial = 0; trial < 100; ++trial) {
    ExactProblem p = testutil::random_exact_problem(rng);
    CHECK(std::abs(expl_label_disagreement_exact(p) - oracle::disagreement_by_triples(p)) <= 1e-12);
  }
}

TEST_CASE("conditional MI vanishes when the key pins the graph or the label") {
  // Full-graph explanations: the key determines the graph exactly.
  Graph c5 = gen_motif(MotifKind::cycle, 5);
  Graph c6 = gen_motif(MotifKind::cycle, 6);
  Graph c7 = gen_motif(MotifKind::cycle, 7);
  auto full = [](const Graph& g) {
    std::vector<int> all(static_cast<std::size_t>(g.node_count));
    for (int v = 0; v < g.node_count; ++v) all[static_cast<std::size_t>(v)] = v;
    return make_explanation(g, all);
  };
  ExactProblem identity = make_exact_problem(
      {c5, c6, c7}, {full(c5), full(c6), full(c7)},
      {{0, 0, 0.2}, {0, 1, 0.1}, {1, 0, 0.05}, {1, 1, 0.35}, {2, 0, 0.3}});
  CHECK(expl_conditional_mi_exact(identity) == 0.0);

  // Deterministic labels given the key.
  CHECK(expl_conditional_mi_exact(cycle_pair_problem(8)) == 0.0);
}

TEST_CASE("conditional MI under a constant key equals plain MI") {
  Graph c3 = gen_motif(MotifKind::cycle, 3);
  Graph c4 = gen_motif(MotifKind::cycle, 4);
  Graph c5 = gen_motif(MotifKind::cycle, 5);
  // Empty explanations give every graph the same key.
  ExactProblem p = make_exact_problem(
      {c3, c4, c5},
      {make_explanation(c3, {}), make_explanation(c4, {}), make_explanation(c5, {})},
      {{0, 0, 0.30}, {0, 1, 0.10}, {1, 0, 0.05}, {1, 1, 0.25}, {2, 0, 0.2}, {2, 1, 0.1}});
  double py0 = 0.30 + 0.05 + 0.2, py1 = 1.0 - py0;
  double mi = 0.0;
  for (const ExactEntry& e : p.entries) {
    double pg = p.graph_mass(e.graph_id);
    double py = e.label == 0 ? py0 : py1;
    mi += e.prob * std::log(e.prob / (pg * py));
  }
  CHECK(std::abs(expl_conditional_mi_exact(p) - mi) <= 1e-12);
}

TEST_CASE("conditional MI matches the entropy-split oracle") {
  RngStream rng(0x7a66ed);
  for (int trial = 0; trial < 30; ++trial) {
    ExactProblem p = tagged_group_problem(rng);
    REQUIRE(check_explanation_stability(p));
    double mi = expl_conditional_mi_exact(p);
    CHECK(mi >= 0.0);
    CHECK(std::abs(mi - mi_entropy_oracle(p)) <= 1e-12);
    CHECK(std::abs(expl_label_disagreement_exact(p) - oracle::disagreement_by_triples(p)) <= 1e-12);
  }
}

TEST_CASE("prediction errors from graph and from key") {
  CHECK(bayes_error_exact(cycle_pair_problem(6)) == 0.0);

  Graph c5 = gen_motif(MotifKind::cycle, 5);
  ExactProblem noisy = make_exact_problem({c5}, {make_explanation(c5, {0})},
                                          {{0, 0, 0.9}, {0, 1, 0.1}});
  CHECK(std::abs(bayes_error_exact(noisy) - 0.1) < 1e-12);
  CHECK(std::abs(expl_bayes_error_exact(noisy) - 0.1) < 1e-12);

  RngStream rng(0xc0ffee);
  for (int trial = 0; trial < 100; ++trial) {
    ExactProblem p = testutil::random_exact_problem(rng);
    double full = bayes_error_exact(p);
    double coarse = expl_bayes_error_exact(p);
    CHECK(full <= coarse + 1e-12);
    // Disagreement of an independent pair is at most twice the best
    // key-level predictor's error.
    CHECK(expl_label_disagreement_exact(p) <= 2.0 * coarse + 1e-12);
  }
}

TEST_CASE("explanation stability check") {
  CHECK(check_explanation_stability(cycle_pair_problem(10)));

  // Stars nest: the explanation of the smallest star graph embeds into every
  // larger star graph, whose explanation key differs. The check must say so.
  CHECK_FALSE(check_explanation_stability(cycle_vs_star_problem(12)));
  CHECK_THROWS_AS(expl_conditional_mi_exact(cycle_vs_star_problem(12)), ConditionViolated);

  // Constructed violation: g1 explains as its triangle, g2 contains a
  // triangle but explains as its square.
  Graph g1 = disjoint_union(gen_motif(MotifKind::cycle, 3), gen_motif(MotifKind::cycle, 5));
  Graph g2 = disjoint_union(gen_motif(MotifKind::cycle, 3), gen_motif(MotifKind::cycle, 4));
  ExactProblem bad = make_exact_problem(
      {g1, g2}, {make_explanation(g1, {0, 1, 2}), make_explanation(g2, {3, 4, 5, 6})},
      {{0, 0, 0.5}, {1, 1, 0.5}});
  CHECK_FALSE(check_explanation_stability(bad));
  CHECK_THROWS_AS(invariance_report(bad), ConditionViolated);
}

TEST_CASE("all statistics shrink together along a noise ramp") {
  std::vector<double> etas = {0.04, 0.02, 0.01, 0.005};
  std::vector<InvarianceReport> reports;
  for (double eta : etas) reports.push_back(invariance_report(noisy_cycle_pair(4, eta)));
  for (std::size_t i = 0; i + 1 < reports.size(); ++i) {
    CHECK(reports[i].label_disagreement > reports[i + 1].label_disagreement);
    CHECK(reports[i].conditional_mi_nats > reports[i + 1].conditional_mi_nats);
    CHECK(reports[i].bayes_error > reports[i + 1].bayes_error);
  }
  CHECK(reports.back().label_disagreement < 0.03);
  CHECK(reports.back().bayes_error < 0.01);
}

TEST_CASE("report serialization carries every field") {
  InvarianceReport r = invariance_report(cycle_pair_problem(3));
  nlohmann::json j = report_to_json(r);
  CHECK(j.at("label_disagreement").get<double>() == r.label_disagreement);
  CHECK(j.at("conditional_mi_nats").get<double>() == r.conditional_mi_nats);
  CHECK(j.at("expected_expl_edges").get<double>() == r.expected_expl_edges);
  CHECK(j.at("bayes_error").get<double>() == r.bayes_error);
  CHECK(j.at("expl_bayes_error").get<double>() == r.expl_bayes_error);
  CHECK(j.at("explanations_stable").get<bool>() == r.explanations_stable);
}

}  // TEST_SUITE
