#include "dipgnn/mask.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

namespace dipgnn {

MaskedView mask_edges(const Graph& graph, double ratio, Rng& rng) {
  if (!(ratio >= 0.0 && ratio < 1.0)) throw DataError("mask_edges: ratio must be in [0, 1)");
  const int n_edges = graph.num_edges();
  const int n_masked = static_cast<int>(std::llround(ratio * n_edges));

  MaskedView view;
  view.mask_ratio = ratio;
  std::vector<char> is_masked(static_cast<std::size_t>(n_edges), 0);
  for (int i : rng.sample_without_replacement(n_edges, n_masked)) is_masked[i] = 1;
  view.unmasked.reserve(static_cast<std::size_t>(n_edges - n_masked));
  view.masked.reserve(static_cast<std::size_t>(n_masked));
  for (int i = 0; i < n_edges; ++i) {
    const Edge& e = graph.edges()[i];
    if (!is_masked[i]) {
      view.unmasked.push_back(e);
      continue;
    }
    if (rng.uniform() < 0.5) {
      view.masked.push_back({e.dst, e.src});
    } else {
      view.masked.push_back({e.src, e.dst});
    }
  }
  return view;
}

CandidateSet sample_negatives(const Graph& graph, const OrientedEdge& masked_edge, int n_neg,
                              Rng& rng) {
  if (n_neg < 0) throw DataError("sample_negatives: negative count must be >= 0");
  const int n = graph.num_nodes();
  const int fixed = masked_edge.fixed_node;
  const int truth = masked_edge.free_node;
  if (fixed < 0 || fixed >= n || truth < 0 || truth >= n) {
    throw DataError("sample_negatives: masked edge endpoint out of range");
  }
  CandidateSet out;
  out.fixed_node = fixed;
  out.true_node = truth;
  if (n_neg == 0) return out;

  std::unordered_set<int> taken;
  taken.reserve(static_cast<std::size_t>(n_neg) * 2);
  const long long cap = 50LL * n_neg;
  long long attempts = 0;
  while (static_cast<int>(out.negatives.size()) < n_neg) {
    if (attempts++ >= cap) {
      throw DataError("sample_negatives: not enough non-neighbors of node " +
                      std::to_string(fixed) + " after " + std::to_string(cap) + " draws");
    }
    const int cand = rng.uniform_int(n);
    if (cand == fixed || cand == truth) continue;
    if (taken.count(cand) != 0) continue;
    if (graph.has_edge(cand, fixed)) continue;
    taken.insert(cand);
    out.negatives.push_back(cand);
  }
  return out;
}

std::vector<Edge> sample_positive_edges(const std::vector<Edge>& unmasked, int n_generated,
                                        double alpha, Rng& rng) {
  if (alpha <= 0.0) throw DataError("sample_positive_edges: alpha must be positive");
  if (n_generated < 0) throw DataError("sample_positive_edges: negative edge count");
  const int want = static_cast<int>(std::llround(alpha * n_generated));
  const int take = std::min<int>(want, static_cast<int>(unmasked.size()));
  std::vector<Edge> out;
  out.reserve(static_cast<std::size_t>(take));
  for (int i : rng.sample_without_replacement(static_cast<int>(unmasked.size()), take)) {
    out.push_back(unmasked[static_cast<std::size_t>(i)]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> select_feature_nodes(const Graph& graph, double ratio, Rng& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw DataError("select_feature_nodes: ratio must be in [0, 1]");
  }
  const int k = static_cast<int>(std::llround(ratio * graph.num_nodes()));
  std::vector<int> nodes = rng.sample_without_replacement(graph.num_nodes(), k);
  std::sort(nodes.begin(), nodes.end());
  return nodes;
}

Graph corrupt_edges_random(const Graph& graph, double drop_frac, double add_frac, Rng& rng) {
  if (!(drop_frac >= 0.0 && drop_frac < 1.0)) {
    throw DataError("corrupt_edges_random: drop_frac must be in [0, 1)");
  }
  if (add_frac < 0.0) throw DataError("corrupt_edges_random: negative add_frac");
  const int n = graph.num_nodes();
  const int n_edges = graph.num_edges();
  const int n_drop = static_cast<int>(std::llround(drop_frac * n_edges));
  const int n_add = static_cast<int>(std::llround(add_frac * n_edges));

  const long long all_pairs = static_cast<long long>(n) * (n - 1) / 2;
  if (n_add > all_pairs - n_edges) {
    throw DataError("corrupt_edges_random: requested " + std::to_string(n_add) +
                    " additions but only " + std::to_string(all_pairs - n_edges) +
                    " absent pairs exist");
  }

  std::vector<char> dropped(static_cast<std::size_t>(n_edges), 0);
  for (int i : rng.sample_without_replacement(n_edges, n_drop)) dropped[i] = 1;
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n_edges - n_drop + n_add));
  for (int i = 0; i < n_edges; ++i) {
    if (!dropped[i]) edges.push_back(graph.edges()[i]);
  }

  // Wrong edges are pairs absent from the original graph, so a dropped edge
  // can never come back as an addition.
  std::unordered_set<long long> added;
  auto pair_key = [n](const Edge& e) {
    return static_cast<long long>(e.src) * n + e.dst;
  };
  int made = 0;
  while (made < n_add) {
    const int u = rng.uniform_int(n);
    const int v = rng.uniform_int(n);
    if (u == v) continue;
    const Edge e = canonical_edge(u, v);
    if (graph.has_edge(e.src, e.dst)) continue;
    if (!added.insert(pair_key(e)).second) continue;
    edges.push_back(e);
    ++made;
  }

  Graph out(n, std::move(edges), graph.options());
  if (graph.has_features()) out.set_features(graph.features(), graph.feature_dim());
  if (graph.has_labels()) out.set_labels(graph.labels());
  if (graph.has_node_types()) out.set_node_types(graph.node_types());
  return out;
}

}  // namespace dipgnn
