#include "eagl/problems.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eagl/errors.hpp"

namespace eagl {

int ExactProblem::find_graph(const CanonicalKey& key) const {
  for (std::size_t i = 0; i < graph_keys.size(); ++i)
    if (graph_keys[i] == key) return static_cast<int>(i);
  return -1;
}

double ExactProblem::graph_mass(int graph_id) const {
  double m = 0.0;
  for (const ExactEntry& e : entries)
    if (e.graph_id == graph_id) m += e.prob;
  return m;
}

void validate_problem(const ExactProblem& p) {
  const int n = static_cast<int>(p.graphs.size());
  if (p.num_classes < 2) throw BadProblem("num_classes must be >= 2");
  if (static_cast<int>(p.explanations.size()) != n ||
      static_cast<int>(p.graph_keys.size()) != n || static_cast<int>(p.expl_keys.size()) != n)
    throw BadProblem("parallel arrays have inconsistent sizes");
  for (int i = 0; i < n; ++i) {
    validate_graph(p.graphs[i]);
    if (!explanation_in_graph(p.graphs[i], p.explanations[i]))
      throw BadProblem("explanation " + std::to_string(i) + " not valid in its graph");
    if (p.graph_keys[i] != canonical_key(p.graphs[i], p.canonical_cap))
      throw BadProblem("stale graph key at " + std::to_string(i));
  }
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (p.graph_keys[i] == p.graph_keys[j])
        throw BadProblem("support graphs " + std::to_string(i) + " and " + std::to_string(j) +
                         " are isomorphic");
  if (p.entries.empty()) throw BadProblem("no entries");
  double total = 0.0;
  std::set<std::pair<int, int>> seen;
  std::vector<bool> referenced(n, false);
  for (const ExactEntry& e : p.entries) {
    if (e.graph_id < 0 || e.graph_id >= n) throw BadProblem("entry references unknown graph");
    if (e.label < 0 || e.label >= p.num_classes) throw BadProblem("entry label out of range");
    if (!(e.prob > 0.0)) throw BadProblem("entry probability must be positive");
    if (!seen.insert({e.graph_id, e.label}).second)
      throw BadProblem("duplicate (graph, label) entry");
    referenced[e.graph_id] = true;
    total += e.prob;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw BadProblem("probabilities sum to " + std::to_string(total));
  for (int i = 0; i < n; ++i)
    if (!referenced[i]) throw BadProblem("graph " + std::to_string(i) + " has no mass");
}

ExactProblem make_exact_problem(std::vector<Graph> graphs, std::vector<Explanation> explanations,
                                std::vector<ExactEntry> entries, int num_classes,
                                int canonical_cap) {
  ExactProblem p;
  p.graphs = std::move(graphs);
  p.explanations = std::move(explanations);
  p.entries = std::move(entries);
  p.num_classes = num_classes;
  p.canonical_cap = canonical_cap;
  if (p.graphs.size() != p.explanations.size())
    throw BadProblem("graphs and explanations differ in length");
  p.graph_keys.reserve(p.graphs.size());
  p.expl_keys.reserve(p.graphs.size());
  for (std::size_t i = 0; i < p.graphs.size(); ++i) {
    p.graph_keys.push_back(canonical_key(p.graphs[i], canonical_cap));
    p.expl_keys.push_back(
        canonical_key(explanation_graph(p.graphs[i], p.explanations[i]), canonical_cap));
  }
  validate_problem(p);
  return p;
}

const Explanation& explain_query(const ExactProblem& p, const Graph& query) {
  int id = p.find_graph(canonical_key(query, p.canonical_cap));
  if (id < 0) throw ExplainerUndefined("query graph is off-support");
  return p.explanations[static_cast<std::size_t>(id)];
}

ExactProblem cycle_pair_problem(int K) {
  if (K < 1 || K > 55)
    throw InvalidRange("K must lie in [1, 55]; larger K exceeds the per-component canonical-form cap");
  std::vector<Graph> graphs;
  std::vector<Explanation> expls;
  std::vector<ExactEntry> entries;
  const double mass = 1.0 / (2.0 * K);
  for (int label = 0; label <= 1; ++label) {
    const int marker = (label == 0) ? 3 : 4;
    for (int i = 6; i <= 5 + K; ++i) {
      Graph g = disjoint_union(gen_motif(MotifKind::cycle, i), gen_motif(MotifKind::cycle, marker));
      std::vector<int> motif(marker);
      for (int v = 0; v < marker; ++v) motif[v] = i + v;
      int id = static_cast<int>(graphs.size());
      expls.push_back(make_explanation(g, motif));
      graphs.push_back(std::move(g));
      entries.push_back({id, label, mass});
    }
  }
  // largest graph is C_{5+K} ⊎ C_4 with K+9 nodes
  return make_exact_problem(std::move(graphs), std::move(expls), std::move(entries), 2,
                            std::max(kDefaultCanonicalCap, K + 9));
}

ExactProblem cycle_vs_star_problem(int n) {
  if (n < 10 || n > 16)
    throw InvalidRange("n must lie in [10, 16]; larger n exceeds the canonical-form node cap");
  std::vector<Graph> graphs;
  std::vector<Explanation> expls;
  std::vector<ExactEntry> entries;
  const double mass0 = 0.5 / (n - 2);      // a in [3, n]
  const double mass1 = 0.5 / (n - 1);      // k in [3, n+1]
  for (int a = 3; a <= n; ++a) {
    Graph cyc = gen_motif(MotifKind::cycle, a);
    Graph g = (n - a > 0) ? disjoint_union(cyc, gen_motif(MotifKind::matching, n - a)) : cyc;
    std::vector<int> motif(a);
    for (int v = 0; v < a; ++v) motif[v] = v;
    int id = static_cast<int>(graphs.size());
    expls.push_back(make_explanation(g, motif));
    graphs.push_back(std::move(g));
    entries.push_back({id, 0, mass0});
  }
  for (int k = 3; k <= n + 1; ++k) {
    Graph star = gen_motif(MotifKind::star, k + 1);
    Graph g = (n + 1 - k > 0) ? disjoint_union(star, gen_motif(MotifKind::matching, n + 1 - k))
                              : star;
    std::vector<int> motif(k + 1);
    for (int v = 0; v <= k; ++v) motif[v] = v;
    int id = static_cast<int>(graphs.size());
    expls.push_back(make_explanation(g, motif));
    graphs.push_back(std::move(g));
    entries.push_back({id, 1, mass1});
  }
  return make_exact_problem(std::move(graphs), std::move(expls), std::move(entries));
}

SamplerProblem ba2motifs_sampler(int num_nodes) {
  if (num_nodes < 10) throw InvalidRange("ba2motifs needs at least 10 nodes");
  SamplerProblem p;
  p.num_classes = 2;
  p.num_nodes = num_nodes;
  const int base_n = num_nodes - 5;
  p.draw = [num_nodes, base_n](RngStream& rng) -> Sample {
    int label = static_cast<int>(rng.below(2));
    Graph base = gen_ba(base_n, 1, rng.next_u64());
    Graph motif = (label == 0) ? gen_motif(MotifKind::house, 5) : gen_motif(MotifKind::cycle, 5);
    Graph joined = disjoint_union(base, motif);
    int u = static_cast<int>(rng.below(static_cast<std::uint64_t>(base_n)));
    int v = base_n + static_cast<int>(rng.below(5));
    std::vector<Edge> edges = joined.edges;
    edges.push_back({u, v});
    std::vector<std::vector<double>> feats(num_nodes, std::vector<double>{1.0});
    Graph g = make_graph(num_nodes, std::move(edges), {}, std::move(feats));
    std::vector<int> motif_nodes(5);
    for (int i = 0; i < 5; ++i) motif_nodes[i] = base_n + i;
    Sample s;
    s.explanation = make_explanation(g, motif_nodes);
    s.graph = std::move(g);
    s.label = label;
    return s;
  };
  return p;
}

Explanation find_motif_explanation(const Graph& g, int* label_out) {
  auto w = find_subgraph(gen_motif(MotifKind::house, 5), g);
  int label = 0;
  if (!w) {
    w = find_subgraph(gen_motif(MotifKind::cycle, 5), g);
    label = 1;
  }
  if (!w) throw ExplainerUndefined("no house or five-cycle in graph");
  if (label_out) *label_out = label;
  return make_explanation(g, *w);
}

TrainSet sample_training_set(const ExactProblem& p, int m, RngStream& rng) {
  if (m < 0) throw InvalidRange("m must be >= 0");
  TrainSet out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) {
    double x = rng.real();
    double acc = 0.0;
    const ExactEntry* chosen = &p.entries.back();
    for (const ExactEntry& e : p.entries) {
      acc += e.prob;
      if (x < acc) {
        chosen = &e;
        break;
      }
    }
    TrainItem item;
    item.graph = p.graphs[chosen->graph_id];
    item.label = chosen->label;
    item.explanation = p.explanations[chosen->graph_id];
    out.push_back(std::move(item));
  }
  return out;
}

TrainSet sample_training_set(const SamplerProblem& p, int m, RngStream& rng) {
  if (m < 0) throw InvalidRange("m must be >= 0");
  TrainSet out;
  out.reserve(m);
  for (int i = 0; i < m; ++i) {
    Sample s = p.draw(rng);
    out.push_back({std::move(s.graph), s.label, std::move(s.explanation)});
  }
  return out;
}

nlohmann::json problem_to_json(const ExactProblem& p) {
  validate_problem(p);
  nlohmann::json j;
  j["num_classes"] = p.num_classes;
  j["canonical_cap"] = p.canonical_cap;
  j["entries"] = nlohmann::json::array();
  for (const ExactEntry& e : p.entries) {
    nlohmann::json je;
    je["graph"] = graph_to_json(p.graphs[e.graph_id]);
    je["label"] = e.label;
    je["prob"] = e.prob;
    je["explanation"] = p.explanations[e.graph_id].vertex_subset;
    j["entries"].push_back(std::move(je));
  }
  return j;
}

ExactProblem problem_from_json(const nlohmann::json& j) {
  try {
    int num_classes = j.at("num_classes").get<int>();
    int cap = j.value("canonical_cap", kDefaultCanonicalCap);
    std::vector<Graph> graphs;
    std::vector<Explanation> expls;
    std::vector<ExactEntry> entries;
    std::map<CanonicalKey, int> by_key;
    for (const auto& je : j.at("entries")) {
      Graph g = graph_from_json(je.at("graph"));
      std::vector<int> vs = je.at("explanation").get<std::vector<int>>();
      CanonicalKey key = canonical_key(g, cap);
      auto it = by_key.find(key);
      int id;
      if (it == by_key.end()) {
        id = static_cast<int>(graphs.size());
        by_key.emplace(key, id);
        expls.push_back(make_explanation(g, vs));
        graphs.push_back(std::move(g));
      } else {
        // Label noise repeats a support graph; it must repeat verbatim so
        // explanation indices stay aligned.
        id = it->second;
        if (graphs[id].edges != g.edges || graphs[id].node_tags != g.node_tags)
          throw BadProblem("isomorphic support graphs must appear in one labeling");
        Explanation fresh = make_explanation(graphs[id], vs);
        if (fresh.vertex_subset != expls[id].vertex_subset)
          throw BadProblem("entries sharing a graph disagree on its explanation");
      }
      entries.push_back({id, je.at("label").get<int>(), je.at("prob").get<double>()});
    }
    return make_exact_problem(std::move(graphs), std::move(expls), std::move(entries),
                              num_classes, cap);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("problem json: ") + e.what());
  }
}

void save_problem(const ExactProblem& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << problem_to_json(p).dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path);
}

ExactProblem load_problem(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("problem file: ") + e.what());
  }
  return problem_from_json(j);
}

}  // namespace eagl
