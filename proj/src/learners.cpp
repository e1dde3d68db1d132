#include <eagl/learners.hpp>

#include <eagl/errors.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace eagl {

namespace {

constexpr double kCandidateCap = 1e6;

// Majority vote, ties to the lower label.
int majority(const std::vector<int>& votes) {
  int best = 0;
  for (int y = 1; y < static_cast<int>(votes.size()); ++y)
    if (votes[static_cast<std::size_t>(y)] > votes[static_cast<std::size_t>(best)]) best = y;
  return best;
}

std::uint64_t query_fingerprint(const Graph& q, int cap) {
  // Oversized queries cannot be canonicalized; the weaker refinement hash
  // still separates repeated queries almost surely.
  if (q.node_count > cap) return wl_fingerprint(q);
  return canonical_key(q, cap).fingerprint();
}

void bump(std::vector<int>& votes, int label) {
  if (static_cast<int>(votes.size()) <= label) votes.resize(static_cast<std::size_t>(label) + 1, 0);
  ++votes[static_cast<std::size_t>(label)];
}

std::vector<Classifier::WrapperItem> wrapper_from(const TrainSet& train) {
  std::vector<Classifier::WrapperItem> wrapper;
  wrapper.reserve(train.size());
  for (const TrainItem& item : train) {
    if (!item.explanation)
      throw MissingExplanation("training item lacks an explanation");
    wrapper.push_back({explanation_graph(item.graph, *item.explanation), item.label});
  }
  return wrapper;
}

std::string hex_to_bytes(const std::string& hex) {
  if (hex.size() % 2 != 0) throw ParseError("odd-length hex key");
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    throw ParseError("bad hex digit");
  };
  std::string out;
  out.reserve(hex.size() / 2);
  for (std::size_t i = 0; i < hex.size(); i += 2)
    out.push_back(static_cast<char>(nibble(hex[i]) * 16 + nibble(hex[i + 1])));
  return out;
}

}  // namespace

HypothesisClass key_table_class(int num_classes, int canonical_cap) {
  HypothesisClass h;
  h.kind = HypothesisKind::key_table;
  h.num_classes = num_classes;
  h.canonical_cap = canonical_cap;
  return h;
}

HypothesisClass edge_count_class(int min_edges, int max_edges, int num_classes) {
  if (min_edges < 0 || max_edges < min_edges)
    throw InvalidRange("edge count range must satisfy 0 <= min <= max");
  HypothesisClass h;
  h.kind = HypothesisKind::edge_count;
  h.num_classes = num_classes;
  h.min_edges = min_edges;
  h.max_edges = max_edges;
  return h;
}

int Classifier::base_predict(const Graph& query) const {
  if (cls.kind == HypothesisKind::edge_count) {
    auto it = count_table.find(static_cast<int>(query.edges.size()));
    return it == count_table.end() ? default_label : it->second;
  }
  // An oversized query cannot equal any canonicalized training key.
  if (query.node_count > cls.canonical_cap) return default_label;
  auto it = table.find(canonical_key(query, cls.canonical_cap));
  return it == table.end() ? default_label : it->second;
}

int Classifier::predict(const Graph& query) const {
  std::vector<int> matched;
  for (const WrapperItem& w : wrapper)
    if (contains_subgraph(w.pattern, query)) matched.push_back(w.label);
  if (matched.empty()) return base_predict(query);
  RngStream draw(mix_seed(seed, query_fingerprint(query, cls.canonical_cap)));
  return matched[static_cast<std::size_t>(draw.below(matched.size()))];
}

namespace {

std::vector<double> distribution_impl(const Classifier& c, const Graph& query,
                                      const CanonicalKey* known_key) {
  std::vector<double> dist(static_cast<std::size_t>(c.cls.num_classes), 0.0);
  std::vector<int> matched;
  for (const Classifier::WrapperItem& w : c.wrapper)
    if (contains_subgraph(w.pattern, query)) matched.push_back(w.label);
  if (matched.empty()) {
    int label = c.default_label;
    if (c.cls.kind == HypothesisKind::key_table && known_key != nullptr &&
        query.node_count <= c.cls.canonical_cap) {
      auto it = c.table.find(*known_key);
      label = it == c.table.end() ? c.default_label : it->second;
    } else {
      label = c.base_predict(query);
    }
    dist[static_cast<std::size_t>(label)] = 1.0;
    return dist;
  }
  // One division per label keeps a unanimous match at exactly 1.0.
  std::vector<int> counts(static_cast<std::size_t>(c.cls.num_classes), 0);
  for (int y : matched) ++counts[static_cast<std::size_t>(y)];
  for (std::size_t y = 0; y < counts.size(); ++y)
    if (counts[y] > 0)
      dist[y] = static_cast<double>(counts[y]) / static_cast<double>(matched.size());
  return dist;
}

}  // namespace

std::vector<double> Classifier::class_distribution(const Graph& query) const {
  return distribution_impl(*this, query, nullptr);
}

std::vector<double> Classifier::class_distribution(const Graph& query,
                                                   const CanonicalKey& key) const {
  return distribution_impl(*this, query, &key);
}

Classifier erm_fit(const HypothesisClass& h, const TrainSet& train) {
  Classifier c;
  c.cls = h;
  if (h.kind == HypothesisKind::key_table) {
    std::map<CanonicalKey, std::vector<int>> votes;
    for (const TrainItem& item : train)
      bump(votes[canonical_key(item.graph, h.canonical_cap)], item.label);
    for (const auto& [key, v] : votes) c.table.emplace(key, majority(v));
  } else {
    std::map<int, std::vector<int>> votes;
    for (const TrainItem& item : train)
      bump(votes[static_cast<int>(item.graph.edges.size())], item.label);
    for (const auto& [count, v] : votes) c.count_table.emplace(count, majority(v));
  }
  return c;
}

Classifier explained_erm_fit(const HypothesisClass& h, const TrainSet& train,
                             std::uint64_t seed) {
  Classifier c = erm_fit(h, train);
  c.wrapper = wrapper_from(train);
  c.seed = seed;
  return c;
}

std::vector<Graph> enumerate_edit_neighborhood(const Graph& g, const Explanation& expl,
                                               double gamma, const ExactProblem& support_universe) {
  if (gamma < 0.0) throw InvalidRange("gamma must be nonnegative");
  Graph pattern = explanation_graph(g, expl);
  // The tiny slack absorbs roundoff in gamma * |E| products like (1/n) * n.
  double budget = gamma * static_cast<double>(g.edges.size()) + 1e-9;
  std::set<Edge> own(g.edges.begin(), g.edges.end());
  std::vector<Graph> out;
  for (const Graph& cand : support_universe.graphs) {
    std::size_t shared = 0;
    for (const Edge& e : cand.edges) shared += own.count(e);
    double diff = static_cast<double>(g.edges.size() + cand.edges.size() - 2 * shared);
    if (diff > budget) continue;
    if (!contains_subgraph(pattern, cand)) continue;
    out.push_back(cand);
  }
  return out;
}

std::vector<Graph> enumerate_edit_neighborhood(const Graph& g, const Explanation& expl,
                                               double gamma) {
  if (gamma < 0.0) throw InvalidRange("gamma must be nonnegative");
  Graph pattern = explanation_graph(g, expl);
  int budget = static_cast<int>(std::floor(gamma * static_cast<double>(g.edges.size()) + 1e-9));
  std::vector<Edge> pairs;
  for (int u = 0; u < g.node_count; ++u)
    for (int v = u + 1; v < g.node_count; ++v) pairs.push_back({u, v});
  budget = std::min(budget, static_cast<int>(pairs.size()));
  double candidates = 1.0, binom = 1.0;
  for (int j = 1; j <= budget; ++j) {
    binom *= static_cast<double>(pairs.size() - j + 1) / static_cast<double>(j);
    candidates += binom;
    if (candidates > kCandidateCap)
      throw BudgetTooLarge("edit neighborhood would enumerate over 10^6 graphs");
  }

  std::set<Edge> base(g.edges.begin(), g.edges.end());
  std::vector<Graph> out;
  std::vector<int> pick;
  auto emit = [&] {
    std::set<Edge> edges = base;
    for (int idx : pick) {
      const Edge& e = pairs[static_cast<std::size_t>(idx)];
      if (!edges.erase(e)) edges.insert(e);
    }
    Graph cand = make_graph(g.node_count, {edges.begin(), edges.end()}, g.node_tags, g.features);
    if (contains_subgraph(pattern, cand)) out.push_back(std::move(cand));
  };
  // Flip subsets in lexicographic order, smallest first, so the output
  // order is reproducible. The empty subset re-emits g itself.
  auto rec = [&](auto&& self, int next, int remaining) -> void {
    if (remaining == 0) {
      emit();
      return;
    }
    for (int idx = next; idx <= static_cast<int>(pairs.size()) - remaining; ++idx) {
      pick.push_back(idx);
      self(self, idx + 1, remaining - 1);
      pick.pop_back();
    }
  };
  for (int size = 0; size <= budget; ++size) rec(rec, 0, size);
  return out;
}

namespace {

Classifier augmented_fit_common(const HypothesisClass& h, const TrainSet& train,
                                std::uint64_t seed,
                                const std::function<std::vector<Graph>(const TrainItem&)>& expand) {
  std::vector<Classifier::WrapperItem> wrapper = wrapper_from(train);
  TrainSet enlarged = train;
  for (const TrainItem& item : train)
    for (Graph& neighbor : expand(item))
      enlarged.push_back({std::move(neighbor), item.label, std::nullopt});
  Classifier c = erm_fit(h, enlarged);
  c.wrapper = std::move(wrapper);
  c.seed = seed;
  return c;
}

}  // namespace

Classifier augmented_erm_fit(const HypothesisClass& h, const TrainSet& train, double gamma,
                             const ExactProblem& support_universe, std::uint64_t seed) {
  return augmented_fit_common(h, train, seed, [&](const TrainItem& item) {
    return enumerate_edit_neighborhood(item.graph, *item.explanation, gamma, support_universe);
  });
}

Classifier augmented_erm_fit(const HypothesisClass& h, const TrainSet& train, double gamma,
                             std::uint64_t seed) {
  return augmented_fit_common(h, train, seed, [&](const TrainItem& item) {
    return enumerate_edit_neighborhood(item.graph, *item.explanation, gamma);
  });
}

double eval_error_exact(const Classifier& c, const ExactProblem& p) {
  double err = 0.0;
  for (const ExactEntry& e : p.entries) {
    const std::size_t gi = static_cast<std::size_t>(e.graph_id);
    std::vector<double> dist = c.class_distribution(p.graphs[gi], p.graph_keys[gi]);
    double hit = e.label < static_cast<int>(dist.size()) ? dist[static_cast<std::size_t>(e.label)] : 0.0;
    err += e.prob * (1.0 - hit);
  }
  return err;
}

ErrorEstimate eval_error_mc(const Classifier& c, const SamplerProblem& p, int draws,
                            RngStream& rng) {
  if (draws < 2) throw InvalidSize("need at least 2 draws");
  std::vector<double> losses;
  losses.reserve(static_cast<std::size_t>(draws));
  for (int i = 0; i < draws; ++i) {
    Sample s = p.draw(rng);
    std::vector<double> dist = c.class_distribution(s.graph);
    double hit =
        s.label < static_cast<int>(dist.size()) ? dist[static_cast<std::size_t>(s.label)] : 0.0;
    losses.push_back(1.0 - hit);
  }
  ErrorEstimate est;
  est.draws = draws;
  for (double x : losses) est.mean += x;
  est.mean /= static_cast<double>(draws);
  double ss = 0.0;
  for (double x : losses) ss += (x - est.mean) * (x - est.mean);
  est.std_error = std::sqrt(ss / static_cast<double>(draws - 1)) /
                  std::sqrt(static_cast<double>(draws));
  return est;
}

nlohmann::json classifier_to_json(const Classifier& c) {
  nlohmann::json j;
  j["kind"] = c.cls.kind == HypothesisKind::key_table ? "key_table" : "edge_count";
  j["num_classes"] = c.cls.num_classes;
  j["canonical_cap"] = c.cls.canonical_cap;
  j["min_edges"] = c.cls.min_edges;
  j["max_edges"] = c.cls.max_edges;
  j["default_label"] = c.default_label;
  j["seed"] = c.seed;
  nlohmann::json table = nlohmann::json::object();
  for (const auto& [key, label] : c.table) table[key.hex()] = label;
  j["table"] = std::move(table);
  nlohmann::json counts = nlohmann::json::object();
  for (const auto& [count, label] : c.count_table) counts[std::to_string(count)] = label;
  j["count_table"] = std::move(counts);
  j["wrapper"] = nlohmann::json::array();
  for (const Classifier::WrapperItem& w : c.wrapper)
    j["wrapper"].push_back({{"pattern", graph_to_json(w.pattern)}, {"label", w.label}});
  return j;
}

Classifier classifier_from_json(const nlohmann::json& j) {
  try {
    Classifier c;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "key_table")
      c.cls.kind = HypothesisKind::key_table;
    else if (kind == "edge_count")
      c.cls.kind = HypothesisKind::edge_count;
    else
      throw ParseError("unknown classifier kind: " + kind);
    c.cls.num_classes = j.at("num_classes").get<int>();
    c.cls.canonical_cap = j.at("canonical_cap").get<int>();
    c.cls.min_edges = j.at("min_edges").get<int>();
    c.cls.max_edges = j.at("max_edges").get<int>();
    c.default_label = j.at("default_label").get<int>();
    c.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [hex, label] : j.at("table").items()) {
      CanonicalKey key;
      key.bytes = hex_to_bytes(hex);
      c.table.emplace(std::move(key), label.get<int>());
    }
    for (const auto& [count, label] : j.at("count_table").items())
      c.count_table.emplace(std::stoi(count), label.get<int>());
    for (const auto& jw : j.at("wrapper"))
      c.wrapper.push_back({graph_from_json(jw.at("pattern")), jw.at("label").get<int>()});
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("classifier json: ") + e.what());
  }
}

}  // namespace eagl
