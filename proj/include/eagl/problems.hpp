#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eagl/graph.hpp"
#include "eagl/rng.hpp"

namespace eagl {

struct LabeledGraph {
  Graph graph;
  int label = 0;
};

struct TrainItem {
  Graph graph;
  int label = 0;
  std::optional<Explanation> explanation;
};
using TrainSet = std::vector<TrainItem>;

// One atom of the joint distribution P(G, Y). Several entries may share a
// graph_id to express label noise for that graph.
struct ExactEntry {
  int graph_id = 0;
  int label = 0;
  double prob = 0.0;
};

// Fully enumerated distribution over labeled graphs, with a total
// explainer over its support. graphs/explanations/graph_keys/expl_keys are
// parallel arrays indexed by graph id; canonical keys are precomputed and
// pairwise distinct.
struct ExactProblem {
  std::vector<Graph> graphs;
  std::vector<Explanation> explanations;
  std::vector<CanonicalKey> graph_keys;
  std::vector<CanonicalKey> expl_keys;
  std::vector<ExactEntry> entries;
  int num_classes = 2;
  int canonical_cap = kDefaultCanonicalCap;

  // Graph id for a query, matched by canonical key; -1 when absent.
  int find_graph(const CanonicalKey& key) const;
  double graph_mass(int graph_id) const;
};

// Validates every structural invariant and precomputes keys. Throws
// BadProblem / SizeCapExceeded.
ExactProblem make_exact_problem(std::vector<Graph> graphs, std::vector<Explanation> explanations,
                                std::vector<ExactEntry> entries, int num_classes = 2,
                                int canonical_cap = kDefaultCanonicalCap);
void validate_problem(const ExactProblem& p);

// Explainer lookup for an arbitrary query graph (resolved by canonical
// key). Throws ExplainerUndefined when the query is off-support.
const Explanation& explain_query(const ExactProblem& p, const Graph& query);

// Class-marker family: label 0 graphs are C_i + C3, label 1 graphs are
// C_i + C4, i in [6, 5+K], all equally likely. The explanation is the
// small cycle component. K in [1, 55] (the per-component canonical cap bounds K).
ExactProblem cycle_pair_problem(int K);

// Edge-count family: label 0 graphs are C_a + M_(n-a) (n edges, one cycle,
// no star), label 1 graphs are D_(k+1) + M_(n+1-k) (n+1 edges, one star,
// acyclic), a in [3, n], k in [3, n+1], uniform within each label, labels
// balanced. The explanation is the cycle or star component. n in [10, 16].
ExactProblem cycle_vs_star_problem(int n);

struct Sample {
  Graph graph;
  int label = 0;
  Explanation explanation;
};

// Generative problem: graphs can be drawn but not enumerated.
struct SamplerProblem {
  int num_classes = 2;
  int num_nodes = 0;
  std::function<Sample(RngStream&)> draw;
};

// Preferential-attachment base with one of two motifs attached by a single
// bridge edge: house (label 0) or five-cycle (label 1), balanced. Nodes
// carry constant feature 1.0. The explanation is the motif's five nodes.
SamplerProblem ba2motifs_sampler(int num_nodes = 25);

// Finds the labeled motif in a sampler-style graph and returns its vertex
// set as an explanation. Throws ExplainerUndefined when neither motif is
// present.
Explanation find_motif_explanation(const Graph& g, int* label_out = nullptr);

TrainSet sample_training_set(const ExactProblem& p, int m, RngStream& rng);
TrainSet sample_training_set(const SamplerProblem& p, int m, RngStream& rng);

nlohmann::json problem_to_json(const ExactProblem& p);
ExactProblem problem_from_json(const nlohmann::json& j);
void save_problem(const ExactProblem& p, const std::string& path);
ExactProblem load_problem(const std::string& path);

}  // namespace eagl
