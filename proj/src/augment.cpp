#include <eagl/augment.hpp>

#include <eagl/errors.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>
#include <vector>

namespace eagl {

namespace {

void require_fraction(double x, const char* what) {
  if (!(x >= 0.0 && x <= 1.0)) throw InvalidRange(std::string(what) + " must lie in [0, 1]");
}

void require_explanation(const Graph& g, const Explanation& expl) {
  if (!explanation_in_graph(g, expl))
    throw ExplanationNotInGraph("explanation does not match the graph");
}

// Edges of g outside the explanation's induced edge set.
std::vector<Edge> complement_edges(const Graph& g, const Explanation& expl) {
  std::set<Edge> inside(expl.edge_subset.begin(), expl.edge_subset.end());
  std::vector<Edge> out;
  for (const Edge& e : g.edges)
    if (!inside.count(e)) out.push_back(e);
  return out;
}

Graph rebuild(const Graph& g, std::vector<Edge> edges) {
  return make_graph(g.node_count, std::move(edges), g.node_tags, g.features);
}

}  // namespace

int rounded_share(double fraction, std::size_t total) {
  return static_cast<int>(std::floor(fraction * static_cast<double>(total) + 0.5));
}

Graph expl_preserving_perturb(const Graph& g, const Explanation& expl, double keep_fraction,
                              RngStream& rng) {
  require_fraction(keep_fraction, "keep_fraction");
  require_explanation(g, expl);
  std::vector<Edge> rest = complement_edges(g, expl);
  std::size_t keep = static_cast<std::size_t>(rounded_share(keep_fraction, rest.size()));
  std::vector<Edge> edges = expl.edge_subset;
  for (std::size_t i : rng.sample_indices(rest.size(), keep)) edges.push_back(rest[i]);
  return rebuild(g, std::move(edges));
}

Graph ood_perturb(const Graph& g, const Explanation& expl, OodMode mode, double fraction,
                  RngStream& rng) {
  require_fraction(fraction, "fraction");
  require_explanation(g, expl);
  std::vector<Edge> rest = complement_edges(g, expl);
  std::size_t count = static_cast<std::size_t>(rounded_share(fraction, rest.size()));

  if (mode == OodMode::remove) {
    std::vector<bool> gone(rest.size(), false);
    for (std::size_t i : rng.sample_indices(rest.size(), count)) gone[i] = true;
    std::vector<Edge> edges = expl.edge_subset;
    for (std::size_t i = 0; i < rest.size(); ++i)
      if (!gone[i]) edges.push_back(rest[i]);
    return rebuild(g, std::move(edges));
  }

  std::set<Edge> present(g.edges.begin(), g.edges.end());
  std::set<int> expl_nodes(expl.vertex_subset.begin(), expl.vertex_subset.end());
  std::vector<Edge> absent;
  for (int u = 0; u < g.node_count; ++u) {
    if (expl_nodes.count(u)) continue;
    for (int v = u + 1; v < g.node_count; ++v) {
      if (expl_nodes.count(v)) continue;
      if (!present.count({u, v})) absent.push_back({u, v});
    }
  }
  if (absent.size() < count)
    throw NotEnoughAbsentPairs("wanted " + std::to_string(count) + " new edges, only " +
                               std::to_string(absent.size()) + " vertex pairs are free");
  std::vector<Edge> edges = g.edges;
  for (std::size_t i : rng.sample_indices(absent.size(), count)) edges.push_back(absent[i]);
  return rebuild(g, std::move(edges));
}

LabeledGraph baseline_augment(const LabeledGraph& item, BaselineKind kind, double rate,
                              RngStream& rng) {
  require_fraction(rate, "rate");
  const Graph& g = item.graph;

  switch (kind) {
    case BaselineKind::edge_insert: {
      std::set<Edge> present(g.edges.begin(), g.edges.end());
      std::vector<Edge> absent;
      for (int u = 0; u < g.node_count; ++u)
        for (int v = u + 1; v < g.node_count; ++v)
          if (!present.count({u, v})) absent.push_back({u, v});
      std::size_t count = static_cast<std::size_t>(rounded_share(rate, absent.size()));
      std::vector<Edge> edges = g.edges;
      for (std::size_t i : rng.sample_indices(absent.size(), count)) edges.push_back(absent[i]);
      return {rebuild(g, std::move(edges)), item.label};
    }
    case BaselineKind::edge_drop: {
      std::size_t count = static_cast<std::size_t>(rounded_share(rate, g.edges.size()));
      std::vector<bool> gone(g.edges.size(), false);
      for (std::size_t i : rng.sample_indices(g.edges.size(), count)) gone[i] = true;
      std::vector<Edge> edges;
      for (std::size_t i = 0; i < g.edges.size(); ++i)
        if (!gone[i]) edges.push_back(g.edges[i]);
      return {rebuild(g, std::move(edges)), item.label};
    }
    case BaselineKind::node_drop: {
      std::size_t count =
          static_cast<std::size_t>(rounded_share(rate, static_cast<std::size_t>(g.node_count)));
      if (count >= static_cast<std::size_t>(g.node_count) && g.node_count > 0)
        throw EmptyGraphAfterDrop("dropping " + std::to_string(count) + " of " +
                                  std::to_string(g.node_count) + " nodes leaves nothing");
      std::vector<bool> gone(static_cast<std::size_t>(g.node_count), false);
      for (std::size_t i : rng.sample_indices(static_cast<std::size_t>(g.node_count), count))
        gone[i] = true;
      std::vector<int> new_id(static_cast<std::size_t>(g.node_count), -1);
      int next = 0;
      for (int v = 0; v < g.node_count; ++v)
        if (!gone[static_cast<std::size_t>(v)]) new_id[static_cast<std::size_t>(v)] = next++;
      std::vector<Edge> edges;
      for (const Edge& e : g.edges) {
        int a = new_id[static_cast<std::size_t>(e.first)];
        int b = new_id[static_cast<std::size_t>(e.second)];
        if (a >= 0 && b >= 0) edges.push_back({a, b});
      }
      std::vector<int> tags;
      if (!g.node_tags.empty())
        for (int v = 0; v < g.node_count; ++v)
          if (!gone[static_cast<std::size_t>(v)])
            tags.push_back(g.node_tags[static_cast<std::size_t>(v)]);
      std::vector<std::vector<double>> feats;
      if (g.feat_dim > 0)
        for (int v = 0; v < g.node_count; ++v)
          if (!gone[static_cast<std::size_t>(v)])
            feats.push_back(g.features[static_cast<std::size_t>(v)]);
      return {make_graph(next, std::move(edges), std::move(tags), std::move(feats)), item.label};
    }
    case BaselineKind::feature_drop: {
      std::size_t count =
          static_cast<std::size_t>(rounded_share(rate, static_cast<std::size_t>(g.feat_dim)));
      std::vector<std::vector<double>> feats = g.features;
      for (std::size_t col : rng.sample_indices(static_cast<std::size_t>(g.feat_dim), count))
        for (auto& row : feats) row[col] = 0.0;
      return {make_graph(g.node_count, g.edges, g.node_tags, std::move(feats)), item.label};
    }
  }
  throw InvalidRange("unknown baseline kind");
}

LabeledGraph mixup_augment(const LabeledGraph& gi, const LabeledGraph& gj, RngStream& rng) {
  Graph merged = disjoint_union(gi.graph, gj.graph);
  const std::size_t ni = static_cast<std::size_t>(gi.graph.node_count);
  const std::size_t nj = static_cast<std::size_t>(gj.graph.node_count);
  std::size_t cross = std::min<std::size_t>(2, ni * nj);
  std::vector<Edge> edges = merged.edges;
  for (std::size_t idx : rng.sample_indices(ni * nj, cross)) {
    int u = static_cast<int>(idx / nj);
    int v = static_cast<int>(ni + idx % nj);
    edges.push_back({u, v});
  }
  return {rebuild(merged, std::move(edges)), gi.label};
}

Augmenter make_augmenter(const AugmentSpec& spec, const TrainSet& data) {
  require_fraction(spec.rate, "rate");
  auto need_expl = [](const TrainItem& item) -> const Explanation& {
    if (!item.explanation)
      throw MissingExplanation("augmentation needs per-item explanations");
    return *item.explanation;
  };
  const double rate = spec.rate;
  if (spec.kind == "keep_explained")
    return [rate, need_expl](const TrainItem& item, RngStream& rng) {
      return expl_preserving_perturb(item.graph, need_expl(item), rate, rng);
    };
  if (spec.kind == "ood_add")
    return [rate, need_expl](const TrainItem& item, RngStream& rng) {
      return ood_perturb(item.graph, need_expl(item), OodMode::add, rate, rng);
    };
  if (spec.kind == "ood_remove")
    return [rate, need_expl](const TrainItem& item, RngStream& rng) {
      return ood_perturb(item.graph, need_expl(item), OodMode::remove, rate, rng);
    };
  auto baseline = [rate](BaselineKind kind) {
    return [rate, kind](const TrainItem& item, RngStream& rng) {
      return baseline_augment({item.graph, item.label}, kind, rate, rng).graph;
    };
  };
  if (spec.kind == "edge_insert") return baseline(BaselineKind::edge_insert);
  if (spec.kind == "edge_drop") return baseline(BaselineKind::edge_drop);
  if (spec.kind == "node_drop") return baseline(BaselineKind::node_drop);
  if (spec.kind == "feature_drop") return baseline(BaselineKind::feature_drop);
  if (spec.kind == "mixup") {
    if (data.empty()) throw InvalidSize("mixup needs a nonempty partner pool");
    TrainSet pool = data;
    return [pool](const TrainItem& item, RngStream& rng) {
      const TrainItem& partner = pool[rng.below(pool.size())];
      return mixup_augment({item.graph, item.label}, {partner.graph, partner.label}, rng).graph;
    };
  }
  throw ParseError("unknown augmentation kind: " + spec.kind);
}

}  // namespace eagl
