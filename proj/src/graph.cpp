#include "eagl/graph.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <cstring>
#include <map>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eagl/errors.hpp"

namespace eagl {

namespace {

std::string describe_edge(const Edge& e) {
  return "(" + std::to_string(e.first) + "," + std::to_string(e.second) + ")";
}

}  // namespace

bool Graph::has_edge(int u, int v) const {
  if (u > v) std::swap(u, v);
  return std::binary_search(edges.begin(), edges.end(), Edge{u, v});
}

void validate_graph(const Graph& g) {
  if (g.node_count < 0) throw BadGraph("negative node count");
  for (const Edge& e : g.edges) {
    if (e.first < 0 || e.second >= g.node_count || e.first >= e.second)
      throw BadGraph("bad edge " + describe_edge(e) + " for node count " +
                     std::to_string(g.node_count));
  }
  for (std::size_t i = 1; i < g.edges.size(); ++i) {
    if (!(g.edges[i - 1] < g.edges[i]))
      throw BadGraph("edges not sorted unique at " + describe_edge(g.edges[i]));
  }
  if (!g.node_tags.empty() && g.node_tags.size() != static_cast<std::size_t>(g.node_count))
    throw BadGraph("node_tags size mismatch");
  if (g.feat_dim < 0) throw BadGraph("negative feat_dim");
  if (g.feat_dim == 0) {
    if (!g.features.empty()) throw BadGraph("features present with feat_dim 0");
  } else {
    if (g.features.size() != static_cast<std::size_t>(g.node_count))
      throw BadGraph("features row count mismatch");
    for (const auto& row : g.features)
      if (row.size() != static_cast<std::size_t>(g.feat_dim))
        throw BadGraph("feature row width mismatch");
  }
}

Graph make_graph(int node_count, std::vector<Edge> edges, std::vector<int> node_tags,
                 std::vector<std::vector<double>> features) {
  Graph g;
  g.node_count = node_count;
  for (Edge& e : edges)
    if (e.first > e.second) std::swap(e.first, e.second);
  std::sort(edges.begin(), edges.end());
  g.edges = std::move(edges);
  // All-zero tags are stored as "no tags" so that serialization round-trips
  // to a canonical representation.
  bool all_zero = std::all_of(node_tags.begin(), node_tags.end(), [](int t) { return t == 0; });
  if (!all_zero) g.node_tags = std::move(node_tags);
  g.features = std::move(features);
  g.feat_dim = g.features.empty() ? 0 : static_cast<int>(g.features.front().size());
  validate_graph(g);
  return g;
}

std::vector<std::vector<int>> adjacency_lists(const Graph& g) {
  std::vector<std::vector<int>> adj(g.node_count);
  for (const Edge& e : g.edges) {
    adj[e.first].push_back(e.second);
    adj[e.second].push_back(e.first);
  }
  for (auto& nbrs : adj) std::sort(nbrs.begin(), nbrs.end());
  return adj;
}

std::vector<int> degrees(const Graph& g) {
  std::vector<int> deg(g.node_count, 0);
  for (const Edge& e : g.edges) {
    ++deg[e.first];
    ++deg[e.second];
  }
  return deg;
}

Explanation make_explanation(const Graph& parent, std::vector<int> vertices) {
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
  for (int v : vertices)
    if (v < 0 || v >= parent.node_count)
      throw ExplanationNotInGraph("explanation vertex " + std::to_string(v) + " out of range");
  Explanation e;
  e.vertex_subset = std::move(vertices);
  for (const Edge& ed : parent.edges) {
    bool a = std::binary_search(e.vertex_subset.begin(), e.vertex_subset.end(), ed.first);
    bool b = std::binary_search(e.vertex_subset.begin(), e.vertex_subset.end(), ed.second);
    if (a && b) e.edge_subset.push_back(ed);
  }
  return e;
}

bool explanation_in_graph(const Graph& g, const Explanation& e) {
  for (int v : e.vertex_subset)
    if (v < 0 || v >= g.node_count) return false;
  try {
    Explanation fresh = make_explanation(g, e.vertex_subset);
    return fresh.edge_subset == e.edge_subset && fresh.vertex_subset == e.vertex_subset;
  } catch (const Error&) {
    return false;
  }
}

Graph explanation_graph(const Graph& parent, const Explanation& e) {
  if (!explanation_in_graph(parent, e))
    throw ExplanationNotInGraph("explanation does not match parent graph");
  std::vector<int> local(parent.node_count, -1);
  for (std::size_t i = 0; i < e.vertex_subset.size(); ++i)
    local[e.vertex_subset[i]] = static_cast<int>(i);
  std::vector<Edge> edges;
  edges.reserve(e.edge_subset.size());
  for (const Edge& ed : e.edge_subset)
    edges.push_back({local[ed.first], local[ed.second]});
  std::vector<int> tags;
  std::vector<std::vector<double>> feats;
  if (!parent.node_tags.empty())
    for (int v : e.vertex_subset) tags.push_back(parent.node_tags[v]);
  if (parent.feat_dim > 0)
    for (int v : e.vertex_subset) feats.push_back(parent.features[v]);
  return make_graph(static_cast<int>(e.vertex_subset.size()), std::move(edges), std::move(tags),
                    std::move(feats));
}

// ---------------------------------------------------------------------------
// Subgraph monomorphism search.

namespace {

struct MonoSearch {
  const Graph& pat;
  const Graph& host;
  std::vector<std::vector<int>> pat_adj, host_adj;
  std::vector<int> pat_deg, host_deg;
  std::vector<int> order;          // pattern nodes in placement order
  std::vector<std::vector<int>> placed_nbrs;  // per order slot: earlier-placed pattern nbrs
  std::vector<int> map;            // pattern -> host
  std::vector<bool> used;
  bool found = false;

  MonoSearch(const Graph& p, const Graph& h)
      : pat(p), host(h), pat_adj(adjacency_lists(p)), host_adj(adjacency_lists(h)),
        pat_deg(degrees(p)), host_deg(degrees(h)) {}

  void build_order() {
    int n = pat.node_count;
    std::vector<bool> chosen(n, false);
    std::vector<int> placed_count(n, 0);
    order.reserve(n);
    for (int step = 0; step < n; ++step) {
      int best = -1;
      for (int v = 0; v < n; ++v) {
        if (chosen[v]) continue;
        if (best == -1 || placed_count[v] > placed_count[best] ||
            (placed_count[v] == placed_count[best] && pat_deg[v] > pat_deg[best]))
          best = v;
      }
      chosen[best] = true;
      order.push_back(best);
      for (int u : pat_adj[best])
        if (!chosen[u]) ++placed_count[u];
    }
    placed_nbrs.assign(n, {});
    std::vector<int> slot(n, -1);
    for (int i = 0; i < n; ++i) slot[order[i]] = i;
    for (int i = 0; i < n; ++i) {
      for (int u : pat_adj[order[i]])
        if (slot[u] < i) placed_nbrs[i].push_back(u);
    }
  }

  bool feasible(int v, int h) const {
    if (used[h]) return false;
    if (pat.tag(v) != host.tag(h)) return false;
    if (host_deg[h] < pat_deg[v]) return false;
    return true;
  }

  bool edges_ok(int slot_idx, int v, int h) const {
    for (int u : placed_nbrs[slot_idx])
      if (!host.has_edge(map[u], h)) return false;
    return true;
  }

  bool rec(int i) {
    if (i == pat.node_count) {
      found = true;
      return true;
    }
    int v = order[i];
    if (!placed_nbrs[i].empty()) {
      // Candidates restricted to neighbors of one already-mapped neighbor.
      int anchor = map[placed_nbrs[i][0]];
      for (int h : host_adj[anchor]) {
        if (!feasible(v, h) || !edges_ok(i, v, h)) continue;
        map[v] = h;
        used[h] = true;
        if (rec(i + 1)) return true;
        used[h] = false;
        map[v] = -1;
      }
    } else {
      for (int h = 0; h < host.node_count; ++h) {
        if (!feasible(v, h)) continue;
        map[v] = h;
        used[h] = true;
        if (rec(i + 1)) return true;
        used[h] = false;
        map[v] = -1;
      }
    }
    return false;
  }

  std::optional<std::vector<int>> run() {
    int n = pat.node_count;
    if (n > host.node_count || pat.edges.size() > host.edges.size()) return std::nullopt;
    // Necessary degree condition: k-th largest pattern degree needs a
    // distinct host node of at least that degree.
    std::vector<int> pd = pat_deg, hd = host_deg;
    std::sort(pd.rbegin(), pd.rend());
    std::sort(hd.rbegin(), hd.rend());
    for (std::size_t k = 0; k < pd.size(); ++k)
      if (pd[k] > hd[k]) return std::nullopt;
    build_order();
    map.assign(n, -1);
    used.assign(host.node_count, false);
    if (!rec(0)) return std::nullopt;
    return map;
  }
};

}  // namespace

std::optional<std::vector<int>> find_subgraph(const Graph& pattern, const Graph& host,
                                              int pattern_cap) {
  if (pattern.node_count > pattern_cap)
    throw SizeCapExceeded("pattern has " + std::to_string(pattern.node_count) +
                          " nodes, cap " + std::to_string(pattern_cap));
  if (pattern.node_count == 0) return std::vector<int>{};
  MonoSearch s(pattern, host);
  return s.run();
}

bool contains_subgraph(const Graph& pattern, const Graph& host, int pattern_cap) {
  return find_subgraph(pattern, host, pattern_cap).has_value();
}

// ---------------------------------------------------------------------------
// Canonicalization.

namespace {

// Equitable refinement; colors are normalized so that equal (color,
// neighbor-color multiset) signatures get equal new colors, with new ids
// assigned by signature order. Invariant under node relabeling.
std::vector<int> refine_colors(const std::vector<std::vector<int>>& adj, std::vector<int> color) {
  const int n = static_cast<int>(adj.size());
  while (true) {
    std::vector<std::pair<std::vector<int>, int>> sig(n);
    for (int v = 0; v < n; ++v) {
      std::vector<int> s;
      s.reserve(adj[v].size() + 1);
      s.push_back(color[v]);
      for (int u : adj[v]) s.push_back(color[u]);
      std::sort(s.begin() + 1, s.end());
      sig[v] = {std::move(s), v};
    }
    std::vector<std::pair<std::vector<int>, int>> sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    std::vector<int> next(n);
    int classes = 0;
    for (int i = 0; i < n; ++i) {
      if (i > 0 && sorted[i].first != sorted[i - 1].first) ++classes;
      next[sorted[i].second] = classes;
    }
    int old_classes = *std::max_element(color.begin(), color.end());
    if (classes == old_classes) {
      // Same class count means the partition is stable (refinement only
      // ever splits classes).
      return next;
    }
    color = std::move(next);
  }
}

struct ComponentCanon {
  int n;
  std::vector<std::vector<int>> adj;
  std::vector<std::uint64_t> mask;  // adjacency bitmask; component size <= 64
  std::vector<int> tags;
  std::string best;
  bool have_best = false;
  long long steps = 0;

  static constexpr long long kStepCap = 5'000'000;

  std::string encode(const std::vector<int>& pos_of_node) const {
    const int m = n;
    std::vector<int> node_at(m);
    for (int v = 0; v < m; ++v) node_at[pos_of_node[v]] = v;
    std::string out;
    out.push_back(static_cast<char>(m));
    for (int i = 0; i < m; ++i) {
      std::uint32_t t = static_cast<std::uint32_t>(tags[node_at[i]]);
      for (int b = 24; b >= 0; b -= 8) out.push_back(static_cast<char>((t >> b) & 0xff));
    }
    int bitpos = 0;
    char cur = 0;
    for (int i = 1; i < m; ++i) {
      for (int j = 0; j < i; ++j) {
        bool bit = (mask[node_at[i]] >> node_at[j]) & 1;
        cur = static_cast<char>((cur << 1) | (bit ? 1 : 0));
        if (++bitpos == 8) {
          out.push_back(cur);
          bitpos = 0;
          cur = 0;
        }
      }
    }
    if (bitpos > 0) out.push_back(static_cast<char>(cur << (8 - bitpos)));
    return out;
  }

  void rec(std::vector<int> color) {
    if (++steps > kStepCap)
      throw SizeCapExceeded("canonicalization search exceeded step cap");
    color = refine_colors(adj, std::move(color));
    int classes = *std::max_element(color.begin(), color.end()) + 1;
    if (classes == n) {
      std::string enc = encode(color);
      if (!have_best || enc < best) {
        best = std::move(enc);
        have_best = true;
      }
      return;
    }
    // First non-singleton color class is the branching cell.
    std::vector<int> count(classes, 0);
    for (int c : color) ++count[c];
    int target = 0;
    while (count[target] < 2) ++target;
    std::vector<int> cell;
    for (int v = 0; v < n; ++v)
      if (color[v] == target) cell.push_back(v);
    // Twin pruning: swapping two nodes with identical open or closed
    // neighborhoods is an automorphism, so one branch per twin class
    // suffices.
    std::vector<int> cands;
    for (int v : cell) {
      bool dup = false;
      for (int w : cands) {
        if (mask[v] == mask[w] ||
            (mask[v] | (1ULL << v)) == (mask[w] | (1ULL << w))) {
          dup = true;
          break;
        }
      }
      if (!dup) cands.push_back(v);
    }
    for (int v : cands) {
      std::vector<int> next(n);
      for (int u = 0; u < n; ++u) {
        if (color[u] < target)
          next[u] = color[u];
        else if (color[u] == target)
          next[u] = (u == v) ? target : target + 1;
        else
          next[u] = color[u] + 1;
      }
      rec(std::move(next));
    }
  }

  std::string run() {
    if (n == 0) return std::string(1, '\0');
    std::vector<int> tag_sorted(tags.begin(), tags.end());
    std::sort(tag_sorted.begin(), tag_sorted.end());
    tag_sorted.erase(std::unique(tag_sorted.begin(), tag_sorted.end()), tag_sorted.end());
    std::vector<int> color(n);
    for (int v = 0; v < n; ++v)
      color[v] = static_cast<int>(std::lower_bound(tag_sorted.begin(), tag_sorted.end(), tags[v]) -
                                  tag_sorted.begin());
    rec(std::move(color));
    return best;
  }
};

std::vector<std::vector<int>> connected_components(const Graph& g) {
  std::vector<std::vector<int>> adj = adjacency_lists(g);
  std::vector<int> comp(g.node_count, -1);
  std::vector<std::vector<int>> comps;
  for (int s = 0; s < g.node_count; ++s) {
    if (comp[s] != -1) continue;
    std::vector<int> stack{s}, members;
    comp[s] = static_cast<int>(comps.size());
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      members.push_back(v);
      for (int u : adj[v]) {
        if (comp[u] == -1) {
          comp[u] = comp[s];
          stack.push_back(u);
        }
      }
    }
    std::sort(members.begin(), members.end());
    comps.push_back(std::move(members));
  }
  return comps;
}

}  // namespace

CanonicalKey canonical_key(const Graph& g, int node_cap) {
  validate_graph(g);
  if (g.node_count > node_cap)
    throw SizeCapExceeded("graph has " + std::to_string(g.node_count) + " nodes, cap " +
                          std::to_string(node_cap));
  std::vector<std::string> parts;
  for (const std::vector<int>& members : connected_components(g)) {
    ComponentCanon cc;
    cc.n = static_cast<int>(members.size());
    if (cc.n > 64)
      throw SizeCapExceeded("connected component has " + std::to_string(cc.n) +
                            " nodes; canonical form supports at most 64 per component");
    std::vector<int> local(g.node_count, -1);
    for (std::size_t i = 0; i < members.size(); ++i) local[members[i]] = static_cast<int>(i);
    cc.adj.assign(cc.n, {});
    cc.mask.assign(cc.n, 0);
    cc.tags.assign(cc.n, 0);
    for (std::size_t i = 0; i < members.size(); ++i) cc.tags[i] = g.tag(members[i]);
    for (const Edge& e : g.edges) {
      int a = local[e.first], b = local[e.second];
      if (a >= 0 && b >= 0) {
        cc.adj[a].push_back(b);
        cc.adj[b].push_back(a);
        cc.mask[a] |= 1ULL << b;
        cc.mask[b] |= 1ULL << a;
      }
    }
    parts.push_back(cc.run());
  }
  std::sort(parts.begin(), parts.end());
  CanonicalKey key;
  key.bytes.push_back(static_cast<char>(parts.size() & 0xff));
  key.bytes.push_back(static_cast<char>((parts.size() >> 8) & 0xff));
  for (const std::string& p : parts) {
    key.bytes.push_back(static_cast<char>(p.size() & 0xff));
    key.bytes.push_back(static_cast<char>((p.size() >> 8) & 0xff));
    key.bytes += p;
  }
  return key;
}

std::string CanonicalKey::hex() const {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (unsigned char c : bytes) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 0xf]);
  }
  return out;
}

std::uint64_t wl_fingerprint(const Graph& g) {
  std::vector<std::vector<int>> adj = adjacency_lists(g);
  const int n = g.node_count;
  std::vector<std::uint64_t> color(n);
  for (int v = 0; v < n; ++v) color[v] = splitmix64(0x1000 + static_cast<std::uint64_t>(g.tag(v)));
  int rounds = std::min(n, 16);
  for (int r = 0; r < rounds; ++r) {
    std::vector<std::uint64_t> next(n);
    for (int v = 0; v < n; ++v) {
      std::vector<std::uint64_t> nb;
      nb.reserve(adj[v].size());
      for (int u : adj[v]) nb.push_back(color[u]);
      std::sort(nb.begin(), nb.end());
      std::uint64_t h = splitmix64(color[v]);
      for (std::uint64_t c : nb) h = mix_seed(h, c);
      next[v] = h;
    }
    color = std::move(next);
  }
  std::sort(color.begin(), color.end());
  std::uint64_t h = mix_seed(static_cast<std::uint64_t>(n), g.edges.size());
  for (std::uint64_t c : color) h = mix_seed(h, c);
  return h;
}

// ---------------------------------------------------------------------------
// Structural operations.

Graph disjoint_union(const Graph& a, const Graph& b) {
  validate_graph(a);
  validate_graph(b);
  if (a.feat_dim > 0 && b.feat_dim > 0 && a.feat_dim != b.feat_dim)
    throw ShapeMismatch("feature dims differ: " + std::to_string(a.feat_dim) + " vs " +
                        std::to_string(b.feat_dim));
  if ((a.feat_dim > 0) != (b.feat_dim > 0) && a.node_count > 0 && b.node_count > 0)
    throw ShapeMismatch("one side has features, the other does not");
  Graph g;
  g.node_count = a.node_count + b.node_count;
  g.edges = a.edges;
  for (const Edge& e : b.edges) g.edges.push_back({e.first + a.node_count, e.second + a.node_count});
  if (!a.node_tags.empty() || !b.node_tags.empty()) {
    g.node_tags.resize(g.node_count, 0);
    for (int v = 0; v < a.node_count; ++v) g.node_tags[v] = a.tag(v);
    for (int v = 0; v < b.node_count; ++v) g.node_tags[a.node_count + v] = b.tag(v);
    bool all_zero = std::all_of(g.node_tags.begin(), g.node_tags.end(), [](int t) { return t == 0; });
    if (all_zero) g.node_tags.clear();
  }
  if (a.feat_dim > 0 || b.feat_dim > 0) {
    g.feat_dim = std::max(a.feat_dim, b.feat_dim);
    g.features = a.features;
    g.features.insert(g.features.end(), b.features.begin(), b.features.end());
  }
  validate_graph(g);
  return g;
}

std::size_t edge_symmetric_difference(const Graph& a, const Graph& b) {
  if (a.node_count != b.node_count)
    throw NodeCountMismatch("node counts differ: " + std::to_string(a.node_count) + " vs " +
                            std::to_string(b.node_count));
  std::size_t common = 0;
  auto it = b.edges.begin();
  for (const Edge& e : a.edges) {
    while (it != b.edges.end() && *it < e) ++it;
    if (it != b.edges.end() && *it == e) ++common;
  }
  return a.edges.size() + b.edges.size() - 2 * common;
}

Graph gen_motif(MotifKind kind, int size) {
  std::vector<Edge> edges;
  switch (kind) {
    case MotifKind::cycle:
      if (size < 3) throw InvalidSize("cycle needs >= 3 nodes");
      for (int i = 0; i < size; ++i) edges.push_back({i, (i + 1) % size});
      return make_graph(size, std::move(edges));
    case MotifKind::star:
      if (size < 4) throw InvalidSize("star needs >= 4 nodes");
      for (int i = 1; i < size; ++i) edges.push_back({0, i});
      return make_graph(size, std::move(edges));
    case MotifKind::path:
      if (size < 1) throw InvalidSize("path needs >= 1 node");
      for (int i = 0; i + 1 < size; ++i) edges.push_back({i, i + 1});
      return make_graph(size, std::move(edges));
    case MotifKind::matching:
      if (size < 1) throw InvalidSize("matching needs >= 1 edge");
      for (int i = 0; i < size; ++i) edges.push_back({2 * i, 2 * i + 1});
      return make_graph(2 * size, std::move(edges));
    case MotifKind::house:
      if (size != 5) throw InvalidSize("house has exactly 5 nodes");
      edges = {{0, 1}, {1, 2}, {2, 3}, {0, 3}, {2, 4}, {3, 4}};
      return make_graph(5, std::move(edges));
  }
  throw InvalidSize("unknown motif kind");
}

Graph gen_ba(int num_nodes, int attach, std::uint64_t seed) {
  if (attach < 1) throw InvalidSize("attach must be >= 1");
  if (num_nodes < attach) throw InvalidSize("num_nodes must be >= attach");
  RngStream rng(seed);
  std::vector<Edge> edges;
  std::vector<int> deg(num_nodes, 0);
  for (int v = attach; v < num_nodes; ++v) {
    // attach distinct targets among [0, v), degree-plus-one weighted.
    std::vector<int> targets;
    while (static_cast<int>(targets.size()) < attach) {
      long long total = 0;
      for (int u = 0; u < v; ++u) {
        if (std::find(targets.begin(), targets.end(), u) != targets.end()) continue;
        total += deg[u] + 1;
      }
      long long pick = static_cast<long long>(rng.below(static_cast<std::uint64_t>(total)));
      int chosen = -1;
      for (int u = 0; u < v; ++u) {
        if (std::find(targets.begin(), targets.end(), u) != targets.end()) continue;
        pick -= deg[u] + 1;
        if (pick < 0) {
          chosen = u;
          break;
        }
      }
      targets.push_back(chosen);
    }
    for (int t : targets) {
      edges.push_back({t, v});
      ++deg[t];
      ++deg[v];
    }
  }
  return make_graph(num_nodes, std::move(edges));
}

// ---------------------------------------------------------------------------
// Serialization.

namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace

std::string graph_to_text(const Graph& g) {
  validate_graph(g);
  std::string out = "n " + std::to_string(g.node_count) + " " + std::to_string(g.feat_dim) + "\n";
  for (int v = 0; v < g.node_count; ++v) {
    out += "v " + std::to_string(v) + " " + std::to_string(g.tag(v));
    for (int k = 0; k < g.feat_dim; ++k) out += " " + format_double(g.features[v][k]);
    out += "\n";
  }
  for (const Edge& e : g.edges)
    out += "e " + std::to_string(e.first) + " " + std::to_string(e.second) + "\n";
  return out;
}

Graph graph_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int n = -1, feat_dim = 0;
  std::vector<int> tags;
  std::vector<std::vector<double>> feats;
  std::vector<bool> seen;
  std::vector<Edge> edges;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    auto fail = [&](const std::string& why) {
      throw ParseError("graph text line " + std::to_string(line_no) + ": " + why);
    };
    if (tok == "n") {
      if (n != -1) fail("duplicate header");
      if (!(ls >> n >> feat_dim) || n < 0 || feat_dim < 0) fail("bad header");
      tags.assign(n, 0);
      seen.assign(n, false);
      if (feat_dim > 0) feats.assign(n, std::vector<double>(feat_dim, 0.0));
    } else if (tok == "v") {
      if (n == -1) fail("v before header");
      int idx, tag;
      if (!(ls >> idx >> tag) || idx < 0 || idx >= n) fail("bad vertex line");
      if (seen[idx]) fail("duplicate vertex " + std::to_string(idx));
      seen[idx] = true;
      tags[idx] = tag;
      for (int k = 0; k < feat_dim; ++k) {
        double x;
        if (!(ls >> x)) fail("missing feature value");
        feats[idx][k] = x;
      }
      std::string extra;
      if (ls >> extra) fail("trailing tokens");
    } else if (tok == "e") {
      if (n == -1) fail("e before header");
      int u, v;
      if (!(ls >> u >> v)) fail("bad edge line");
      edges.push_back({u, v});
    } else {
      fail("unknown record '" + tok + "'");
    }
  }
  if (n == -1) throw ParseError("graph text: missing header");
  for (int v = 0; v < n; ++v)
    if (!seen[v]) throw ParseError("graph text: vertex " + std::to_string(v) + " missing");
  try {
    return make_graph(n, std::move(edges), std::move(tags), std::move(feats));
  } catch (const BadGraph& e) {
    throw ParseError(std::string("graph text: ") + e.what());
  }
}

nlohmann::json graph_to_json(const Graph& g) {
  validate_graph(g);
  nlohmann::json j;
  j["n"] = g.node_count;
  j["feat_dim"] = g.feat_dim;
  j["edges"] = nlohmann::json::array();
  for (const Edge& e : g.edges) j["edges"].push_back({e.first, e.second});
  if (!g.node_tags.empty()) j["tags"] = g.node_tags;
  if (g.feat_dim > 0) j["features"] = g.features;
  return j;
}

Graph graph_from_json(const nlohmann::json& j) {
  try {
    int n = j.at("n").get<int>();
    std::vector<Edge> edges;
    for (const auto& e : j.at("edges")) {
      if (!e.is_array() || e.size() != 2) throw ParseError("graph json: bad edge entry");
      edges.push_back({e[0].get<int>(), e[1].get<int>()});
    }
    std::vector<int> tags;
    if (j.contains("tags")) tags = j["tags"].get<std::vector<int>>();
    std::vector<std::vector<double>> feats;
    if (j.contains("features")) feats = j["features"].get<std::vector<std::vector<double>>>();
    Graph g = make_graph(n, std::move(edges), std::move(tags), std::move(feats));
    if (j.contains("feat_dim") && j["feat_dim"].get<int>() != g.feat_dim)
      throw ParseError("graph json: feat_dim disagrees with features");
    return g;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("graph json: ") + e.what());
  } catch (const BadGraph& e) {
    throw ParseError(std::string("graph json: ") + e.what());
  }
}

}  // namespace eagl
