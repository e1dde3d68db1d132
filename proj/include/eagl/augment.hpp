#pragma once

#include <eagl/gnn.hpp>
#include <eagl/graph.hpp>
#include <eagl/problems.hpp>
#include <eagl/rng.hpp>

#include <string>

namespace eagl {

// Shared rounding policy for every perturbation count: round half up.
int rounded_share(double fraction, std::size_t total);

// Keeps the explanation's edges plus a uniform sample of
// rounded_share(keep_fraction, .) of the remaining edges. Vertex set
// unchanged, so the output stays within symmetric difference
// (1 - keep_fraction) * |non-explanation edges| of the input.
Graph expl_preserving_perturb(const Graph& g, const Explanation& expl, double keep_fraction,
                              RngStream& rng);

enum class OodMode { add, remove };

// Distribution-shifting perturbation that still preserves the explanation:
// add-mode inserts rounded_share(fraction, |non-explanation edges|) absent
// pairs between vertices outside the explanation; remove-mode deletes that
// many non-explanation edges.
Graph ood_perturb(const Graph& g, const Explanation& expl, OodMode mode, double fraction,
                  RngStream& rng);

enum class BaselineKind { edge_insert, edge_drop, node_drop, feature_drop };

// Explanation-blind augmentations. edge_insert adds a share of the absent
// pairs, edge_drop removes a share of the edges, node_drop removes a share
// of the nodes with reindexing, feature_drop zeroes a share of the feature
// columns. The label is carried through unchanged.
LabeledGraph baseline_augment(const LabeledGraph& item, BaselineKind kind, double rate,
                              RngStream& rng);

// Disjoint union of the two graphs joined by min(2, possible) random cross
// edges; the result takes the first graph's label.
LabeledGraph mixup_augment(const LabeledGraph& gi, const LabeledGraph& gj, RngStream& rng);

// Config-facing selection of an augmentation. kind is one of:
// keep_explained, ood_add, ood_remove, edge_insert, edge_drop, node_drop,
// feature_drop, mixup. rate is the keep fraction for keep_explained and the
// operator's fraction otherwise (ignored by mixup).
struct AugmentSpec {
  std::string kind = "keep_explained";
  double rate = 0.9;
};

// Closure suitable for the training loop. keep_explained and the ood kinds
// require items to carry explanations (MissingExplanation otherwise); mixup
// draws its partner uniformly from `data`. Throws ParseError on an unknown
// kind.
Augmenter make_augmenter(const AugmentSpec& spec, const TrainSet& data);

}  // namespace eagl
