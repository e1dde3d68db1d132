#pragma once

#include <eagl/problems.hpp>
#include <eagl/rng.hpp>

#include <cstdint>
#include <map>
#include <vector>

#include <nlohmann/json.hpp>

namespace eagl {

enum class HypothesisKind {
  key_table,   // one label per canonical graph key, default elsewhere
  edge_count,  // label depends on the edge count only
};

struct HypothesisClass {
  HypothesisKind kind = HypothesisKind::key_table;
  int num_classes = 2;
  // key_table: cap for canonicalizing queries and training graphs.
  int canonical_cap = kDefaultCanonicalCap;
  // edge_count: inclusive domain range, used by shattering searches.
  int min_edges = 0;
  int max_edges = 0;
};

HypothesisClass key_table_class(int num_classes = 2, int canonical_cap = kDefaultCanonicalCap);
HypothesisClass edge_count_class(int min_edges, int max_edges, int num_classes = 2);

// A fitted classifier. The base part is a deterministic table; the optional
// wrapper holds (explanation pattern, label) pairs taken verbatim from the
// training set. A query matched by one or more patterns is answered by a
// uniform draw over the matched labels, derived deterministically from
// (seed, query key) so a fixed classifier stays a fixed function while the
// seed ensemble realizes the uniform draw.
struct Classifier {
  HypothesisClass cls;
  std::map<CanonicalKey, int> table;
  std::map<int, int> count_table;
  int default_label = 0;
  struct WrapperItem {
    Graph pattern;
    int label = 0;
  };
  std::vector<WrapperItem> wrapper;
  std::uint64_t seed = 0;

  int base_predict(const Graph& query) const;
  int predict(const Graph& query) const;
  // Exact law of predict(query) under the wrapper draw: a point mass when no
  // pattern matches, otherwise the matched-label frequencies. The keyed
  // overload gives the same answer without re-canonicalizing a query whose
  // key is already known.
  std::vector<double> class_distribution(const Graph& query) const;
  std::vector<double> class_distribution(const Graph& query, const CanonicalKey& key) const;
};

// Empirical risk minimizer: majority label per key or per edge count, ties
// to the lower label, unseen inputs to label 0. An empty training set gives
// the constant-0 classifier.
Classifier erm_fit(const HypothesisClass& h, const TrainSet& train);

// erm_fit plus the explanation wrapper. Every training item must carry its
// explanation; throws MissingExplanation otherwise.
Classifier explained_erm_fit(const HypothesisClass& h, const TrainSet& train, std::uint64_t seed);

// All graphs g' with expl embedded in g' and |edges(g) XOR edges(g')| within
// gamma * |edges(g)|, drawn from an explicit universe. Support mode scans a
// finite problem's support; the edge-set difference is taken over index
// pairs. Combinatorial mode enumerates edge flips on g's own vertex set and
// refuses more than 10^6 candidates with BudgetTooLarge. gamma = 0 yields
// exactly {g} in both modes.
std::vector<Graph> enumerate_edit_neighborhood(const Graph& g, const Explanation& expl,
                                               double gamma, const ExactProblem& support_universe);
std::vector<Graph> enumerate_edit_neighborhood(const Graph& g, const Explanation& expl,
                                               double gamma);

// Augmentation-based fit: the training set is enlarged with every neighbor
// of every training graph (carrying the originating label), the base is
// fitted on the enlarged set, and the wrapper is built from the original
// training set only. gamma = 0 therefore reproduces explained_erm_fit
// pointwise for every query and seed.
Classifier augmented_erm_fit(const HypothesisClass& h, const TrainSet& train, double gamma,
                             const ExactProblem& support_universe, std::uint64_t seed);
Classifier augmented_erm_fit(const HypothesisClass& h, const TrainSet& train, double gamma,
                             std::uint64_t seed);

// Exact statistical error: sum over support entries of
// prob * P(prediction != label), with the wrapper draw mixed analytically.
double eval_error_exact(const Classifier& c, const ExactProblem& p);

struct ErrorEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  int draws = 0;
};

// Monte Carlo error over sampler draws. Each draw contributes its exact
// conditional miss probability, so only the graph draw adds variance.
ErrorEstimate eval_error_mc(const Classifier& c, const SamplerProblem& p, int draws,
                            RngStream& rng);

nlohmann::json classifier_to_json(const Classifier& c);
Classifier classifier_from_json(const nlohmann::json& j);

}  // namespace eagl
