#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eagl/rng.hpp"

namespace eagl {

using Edge = std::pair<int, int>;

// Undirected simple graph. Edges are stored normalized: u < v, sorted,
// no duplicates. node_tags is empty or has node_count entries; features
// is empty or node_count rows of feat_dim doubles.
struct Graph {
  int node_count = 0;
  std::vector<Edge> edges;
  std::vector<int> node_tags;
  std::vector<std::vector<double>> features;
  int feat_dim = 0;

  int tag(int v) const { return node_tags.empty() ? 0 : node_tags[v]; }
  bool has_edge(int u, int v) const;
};

// Normalizes edge order and validates every structural invariant.
// Throws BadGraph on out-of-range endpoints, self loops, duplicate edges,
// or tag/feature shape mismatches.
Graph make_graph(int node_count, std::vector<Edge> edges,
                 std::vector<int> node_tags = {},
                 std::vector<std::vector<double>> features = {});
void validate_graph(const Graph& g);

std::vector<std::vector<int>> adjacency_lists(const Graph& g);
std::vector<int> degrees(const Graph& g);

// Vertex subset of a parent graph together with the induced edge set.
// An empty vertex_subset is allowed and means "no explanation".
struct Explanation {
  std::vector<int> vertex_subset;  // sorted, unique
  std::vector<Edge> edge_subset;   // induced edges, normalized
};

// Computes the induced edge subset and validates indices against parent.
Explanation make_explanation(const Graph& parent, std::vector<int> vertices);
// Extracts the explanation as a standalone graph (indices compacted,
// tags and features carried over).
Graph explanation_graph(const Graph& parent, const Explanation& e);
// True when e.vertex_subset indexes into g and e.edge_subset equals the
// subset of g's edges induced by it.
bool explanation_in_graph(const Graph& g, const Explanation& e);

// Total order on isomorphism classes. Two graphs have equal keys iff they
// are isomorphic with matching node tags. Features do not participate.
struct CanonicalKey {
  std::string bytes;

  friend bool operator==(const CanonicalKey&, const CanonicalKey&) = default;
  friend auto operator<=>(const CanonicalKey&, const CanonicalKey&) = default;
  std::uint64_t fingerprint() const { return fnv1a64(bytes); }
  std::string hex() const;
};

inline constexpr int kDefaultCanonicalCap = 32;

// Exact canonical form via per-component refinement plus permutation
// minimization. Throws SizeCapExceeded when g has more than node_cap nodes;
// the cap bounds the backtracking search.
CanonicalKey canonical_key(const Graph& g, int node_cap = kDefaultCanonicalCap);

// Isomorphism-invariant fingerprint with no size cap. Unlike canonical_key
// it may collide for non-isomorphic graphs; used only where a stable
// per-graph seed is needed and exact keys are unavailable.
std::uint64_t wl_fingerprint(const Graph& g);

inline constexpr int kDefaultPatternCap = 64;

// Subgraph containment: an injective map pattern -> host preserving node
// tags and mapping every pattern edge onto a host edge (monomorphism; the
// image need not be induced). Throws SizeCapExceeded when pattern exceeds
// pattern_cap nodes.
bool contains_subgraph(const Graph& pattern, const Graph& host,
                       int pattern_cap = kDefaultPatternCap);
// Same search, returning one witness map (pattern index -> host index).
std::optional<std::vector<int>> find_subgraph(const Graph& pattern, const Graph& host,
                                              int pattern_cap = kDefaultPatternCap);

// Nodes of b are appended after nodes of a. Feature dimensions must agree
// when both sides carry features (ShapeMismatch otherwise); tags are kept
// when either side has them.
Graph disjoint_union(const Graph& a, const Graph& b);

// |E(a) symmetric-difference E(b)| for graphs on the same vertex set.
// Throws NodeCountMismatch when node counts differ.
std::size_t edge_symmetric_difference(const Graph& a, const Graph& b);

enum class MotifKind { cycle, star, path, matching, house };

// Fixed small structures. Size semantics per kind: cycle/star/path count
// nodes (cycle >= 3, star >= 4 with the center at index 0, path >= 1),
// matching counts edges (>= 1, 2*size nodes), house is exactly size 5
// (4-cycle plus an apex joined to two adjacent base nodes; degree sequence
// 2,2,2,3,3). Throws InvalidSize outside those ranges.
Graph gen_motif(MotifKind kind, int size);

// Connected preferential-attachment graph: starts from `attach` nodes and
// attaches each new node to `attach` distinct existing nodes, sampled by
// degree (plus one smoothing). attach >= 1; attach == 1 yields a tree.
Graph gen_ba(int num_nodes, int attach, std::uint64_t seed);

// Text serialization:
//   n <node_count> <feat_dim>
//   v <idx> <tag> <feat...>
//   e <u> <v>
// Floats are printed with round-trip precision; decode(encode(g)) is
// bit-exact.
std::string graph_to_text(const Graph& g);
Graph graph_from_text(const std::string& text);

nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

}  // namespace eagl
