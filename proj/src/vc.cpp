#include <eagl/vc.hpp>

#include <eagl/errors.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace eagl {

namespace {

// Dense ids for the hypothesis cell of each instance: graphs in one cell
// are indistinguishable to every member of the class.
std::vector<int> cell_ids(const HypothesisClass& h, const std::vector<Graph>& instances) {
  std::vector<int> ids;
  ids.reserve(instances.size());
  if (h.kind == HypothesisKind::edge_count) {
    std::map<int, int> seen;
    for (const Graph& g : instances)
      ids.push_back(seen.emplace(static_cast<int>(g.edges.size()), static_cast<int>(seen.size()))
                        .first->second);
  } else {
    std::map<CanonicalKey, int> seen;
    for (const Graph& g : instances)
      ids.push_back(
          seen.emplace(canonical_key(g, h.canonical_cap), static_cast<int>(seen.size()))
              .first->second);
  }
  return ids;
}

std::vector<int> dense_key_ids(const std::vector<CanonicalKey>& keys) {
  std::vector<int> ids;
  ids.reserve(keys.size());
  std::map<CanonicalKey, int> seen;
  for (const CanonicalKey& k : keys)
    ids.push_back(seen.emplace(k, static_cast<int>(seen.size())).first->second);
  return ids;
}

struct WitnessSearch {
  const std::vector<int>& keys;
  const std::vector<int>& cells;
  int cap;
  std::vector<bool> key_used, cell_used;
  std::vector<int> chosen, best;

  void run(int start) {
    if (static_cast<int>(chosen.size()) > static_cast<int>(best.size())) best = chosen;
    int n = static_cast<int>(keys.size());
    if (static_cast<int>(chosen.size()) == cap) return;
    for (int i = start; i < n; ++i) {
      // No extension from i onward can beat the best found.
      if (static_cast<int>(chosen.size()) + n - i <= static_cast<int>(best.size())) break;
      if (key_used[static_cast<std::size_t>(keys[static_cast<std::size_t>(i)])]) continue;
      if (cell_used[static_cast<std::size_t>(cells[static_cast<std::size_t>(i)])]) continue;
      key_used[static_cast<std::size_t>(keys[static_cast<std::size_t>(i)])] = true;
      cell_used[static_cast<std::size_t>(cells[static_cast<std::size_t>(i)])] = true;
      chosen.push_back(i);
      run(i + 1);
      chosen.pop_back();
      key_used[static_cast<std::size_t>(keys[static_cast<std::size_t>(i)])] = false;
      cell_used[static_cast<std::size_t>(cells[static_cast<std::size_t>(i)])] = false;
    }
  }
};

}  // namespace

ShatterCertificate explained_vc_dim(const HypothesisClass& h, const std::vector<Graph>& instances,
                                    const std::vector<CanonicalKey>& expl_keys, int cap) {
  if (instances.size() != expl_keys.size())
    throw ShapeMismatch("instances and explanation keys differ in length");
  if (cap < 0) throw InvalidRange("cap must be nonnegative");
  if (instances.size() > 30 && cap >= static_cast<int>(instances.size()))
    throw SearchSpaceTooLarge("subset search over " + std::to_string(instances.size()) +
                              " instances; pass a cap below the instance count");
  std::vector<int> keys = dense_key_ids(expl_keys);
  std::vector<int> cells = cell_ids(h, instances);
  WitnessSearch search{keys, cells, cap, std::vector<bool>(keys.size(), false),
                       std::vector<bool>(cells.size(), false)};
  search.run(0);
  ShatterCertificate cert;
  cert.witness = search.best;
  cert.dimension = static_cast<int>(cert.witness.size());
  return cert;
}

ShatterCertificate explained_vc_dim(const HypothesisClass& h, const ExactProblem& p, int cap) {
  return explained_vc_dim(h, p.graphs, p.expl_keys, cap);
}

ShatterCertificate standard_vc_dim(const HypothesisClass& h, const std::vector<Graph>& instances,
                                   int cap) {
  std::vector<CanonicalKey> keys;
  keys.reserve(instances.size());
  for (const Graph& g : instances) keys.push_back(canonical_key(g, std::max(h.canonical_cap, 64)));
  return explained_vc_dim(h, instances, keys, cap);
}

double sample_complexity_bound(int d, double eps, double delta) {
  if (d < 1) throw InvalidRange("dimension must be positive");
  if (eps <= 0.0 || eps >= 1.0) throw InvalidRange("eps must lie in (0, 1)");
  if (delta <= 0.0 || delta >= 1.0) throw InvalidRange("delta must lie in (0, 1)");
  double lg = std::log(static_cast<double>(std::max(d, 2)));
  return static_cast<double>(d) * lg * lg / (eps * eps) + std::log(1.0 / delta) / (eps * eps);
}

}  // namespace eagl
