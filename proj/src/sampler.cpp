#include "dipgnn/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "dipgnn/mask.hpp"

namespace dipgnn {

int Subgraph::local(int original) const {
  auto it = local_of.find(original);
  if (it == local_of.end()) throw DataError("subgraph: node not in sample");
  return it->second;
}

Subgraph sample_subgraph(const Graph& graph, const std::vector<int>& seed_nodes, int depth,
                         int width, Rng& rng) {
  if (seed_nodes.empty()) throw DataError("sample_subgraph: empty seed set");
  if (depth < 0) throw DataError("sample_subgraph: negative depth");
  if (width < 1) throw DataError("sample_subgraph: width must be >= 1");
  for (int s : seed_nodes) {
    if (s < 0 || s >= graph.num_nodes()) {
      throw DataError("sample_subgraph: seed node " + std::to_string(s) + " out of range");
    }
  }

  std::vector<int> selected;
  std::vector<char> in_sample(static_cast<std::size_t>(graph.num_nodes()), 0);
  std::vector<int> frontier;
  {
    std::set<int> uniq(seed_nodes.begin(), seed_nodes.end());
    for (int s : uniq) {
      selected.push_back(s);
      in_sample[s] = 1;
      frontier.push_back(s);
    }
  }

  std::vector<double> weight(static_cast<std::size_t>(graph.num_nodes()), 0.0);
  for (int round = 0; round < depth && !frontier.empty(); ++round) {
    // weight(u) = sum over frontier neighbors v of (deg(u) * deg(v))^-1,
    // the squared norm of row u of D^-1/2 A D^-1/2 restricted to the frontier.
    std::vector<int> candidates;
    for (int v : frontier) {
      const double dv = static_cast<double>(graph.degree(v));
      for (int u : graph.neighbors(v)) {
        if (in_sample[u]) continue;
        if (weight[u] == 0.0) candidates.push_back(u);
        weight[u] += 1.0 / (static_cast<double>(graph.degree(u)) * dv);
      }
    }
    if (candidates.empty()) break;
    std::sort(candidates.begin(), candidates.end());

    const int take = std::min<int>(width, static_cast<int>(candidates.size()));
    std::vector<int> chosen;
    if (take == static_cast<int>(candidates.size())) {
      chosen = candidates;
    } else {
      // Weighted sampling without replacement via exponential keys:
      // key = log(u) / w, keep the `take` largest.
      std::vector<std::pair<double, int>> keyed;
      keyed.reserve(candidates.size());
      for (int u : candidates) {
        const double r = (static_cast<double>(rng.next_u64() >> 11) + 1.0) * 0x1.0p-53;
        keyed.emplace_back(std::log(r) / weight[u], u);
      }
      std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
        return a.first != b.first ? a.first > b.first : a.second < b.second;
      });
      chosen.reserve(take);
      for (int i = 0; i < take; ++i) chosen.push_back(keyed[i].second);
      std::sort(chosen.begin(), chosen.end());
    }

    for (int u : candidates) weight[u] = 0.0;
    for (int u : chosen) {
      selected.push_back(u);
      in_sample[u] = 1;
    }
    frontier = std::move(chosen);
  }

  Subgraph sub;
  sub.node_ids = std::move(selected);
  sub.local_of.reserve(sub.node_ids.size());
  for (int i = 0; i < sub.num_nodes(); ++i) sub.local_of.emplace(sub.node_ids[i], i);
  for (int i = 0; i < sub.num_nodes(); ++i) {
    const int orig = sub.node_ids[i];
    for (int nbr : graph.neighbors(orig)) {
      if (nbr < orig || !in_sample[nbr]) continue;
      sub.induced_edges.push_back(canonical_edge(i, sub.local_of.at(nbr)));
    }
  }
  std::sort(sub.induced_edges.begin(), sub.induced_edges.end());
  return sub;
}

LocalEdgePartition induced_edge_partition(const Subgraph& subgraph,
                                          const MaskedView& masked_view) {
  std::set<Edge> masked_global;
  for (const auto& e : masked_view.masked) {
    masked_global.insert(canonical_edge(e.free_node, e.fixed_node));
  }
  LocalEdgePartition out;
  for (const auto& e : subgraph.induced_edges) {
    const Edge global = canonical_edge(subgraph.original_of(e.src), subgraph.original_of(e.dst));
    if (masked_global.count(global) != 0) {
      out.masked.push_back(e);
    } else {
      out.unmasked.push_back(e);
    }
  }
  return out;
}

}  // namespace dipgnn
