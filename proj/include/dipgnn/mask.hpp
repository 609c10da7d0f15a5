#pragma once

#include <vector>

#include "dipgnn/graph.hpp"
#include "dipgnn/rng.hpp"

namespace dipgnn {

/// A masked edge keeps one endpoint fixed; the free one is what the generator
/// has to recover. Generated edges use the same orientation.
struct OrientedEdge {
  int free_node = 0;
  int fixed_node = 0;

  friend bool operator==(const OrientedEdge& a, const OrientedEdge& b) {
    return a.free_node == b.free_node && a.fixed_node == b.fixed_node;
  }
};

/// Partition of a graph's edges into the unmasked set E_u and the masked set
/// E_m, plus the generated set E_g once a generator has run. generated[i]
/// corresponds to masked[i] and shares its fixed endpoint.
struct MaskedView {
  std::vector<Edge> unmasked;
  std::vector<OrientedEdge> masked;
  std::vector<OrientedEdge> generated;
  double mask_ratio = 0.0;
};

/// Candidate set for recovering one masked edge: the true free node plus
/// negatives, none of which are adjacent to the fixed node.
struct CandidateSet {
  int fixed_node = 0;
  int true_node = 0;
  std::vector<int> negatives;

  int total() const { return 1 + static_cast<int>(negatives.size()); }
};

/// Masks round(ratio * |E|) edges, uniform without replacement. The fixed
/// endpoint of each masked edge is chosen by a fair coin.
MaskedView mask_edges(const Graph& graph, double ratio, Rng& rng);

/// Rejection-samples n_neg distinct nodes not adjacent to the fixed endpoint
/// (the true node and the fixed node itself are also excluded). Gives up
/// after 50 * n_neg failed draws.
CandidateSet sample_negatives(const Graph& graph, const OrientedEdge& masked_edge, int n_neg,
                              Rng& rng);

/// Uniform subsample of unmasked edges for the discriminator's positive side;
/// size min(round(alpha * n_generated), |E_u|).
std::vector<Edge> sample_positive_edges(const std::vector<Edge>& unmasked, int n_generated,
                                        double alpha, Rng& rng);

/// Uniform node subset of size round(ratio * num_nodes), sorted.
std::vector<int> select_feature_nodes(const Graph& graph, double ratio, Rng& rng);

/// Ablation corruption: drops round(drop_frac * |E|) edges uniformly and adds
/// round(add_frac * |E|) uniformly random pairs absent from the original graph.
Graph corrupt_edges_random(const Graph& graph, double drop_frac, double add_frac, Rng& rng);

}  // namespace dipgnn
