#pragma once

#include <unordered_map>
#include <vector>

#include "dipgnn/graph.hpp"
#include "dipgnn/rng.hpp"

namespace dipgnn {

struct MaskedView;

/// A sampled dense subgraph. node_ids lists original ids in layer order
/// (seeds first); induced_edges are in local ids.
struct Subgraph {
  std::vector<int> node_ids;
  std::vector<Edge> induced_edges;
  std::unordered_map<int, int> local_of;

  int num_nodes() const { return static_cast<int>(node_ids.size()); }
  int original_of(int local) const { return node_ids[static_cast<std::size_t>(local)]; }
  bool contains(int original) const { return local_of.count(original) != 0; }
  int local(int original) const;
};

/// Layer-dependent importance sampling. Each of the `depth` rounds scores the
/// frontier's unselected neighbors by the squared row norms of the
/// symmetrically degree-normalized adjacency restricted to the frontier,
/// keeps at most `width` of them without replacement, and recurses. Returns
/// the union of all layers with its induced edges.
Subgraph sample_subgraph(const Graph& graph, const std::vector<int>& seed_nodes, int depth,
                         int width, Rng& rng);

/// Restricts a global masked view to the subgraph: each induced edge is
/// tagged by the global mask status of its original endpoints.
struct LocalEdgePartition {
  std::vector<Edge> unmasked;  // local ids
  std::vector<Edge> masked;    // local ids
};

LocalEdgePartition induced_edge_partition(const Subgraph& subgraph,
                                          const MaskedView& masked_view);

}  // namespace dipgnn
