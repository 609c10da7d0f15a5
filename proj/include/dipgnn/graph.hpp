#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dipgnn/errors.hpp"
#include "dipgnn/rng.hpp"

namespace dipgnn {

struct Edge {
  int src = 0;
  int dst = 0;

  friend bool operator==(const Edge& a, const Edge& b) {
    return a.src == b.src && a.dst == b.dst;
  }
  friend bool operator<(const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  }
};

struct GraphOptions {
  bool directed = false;
  bool allow_self_loops = false;
};

/// Immutable node/edge store. Undirected edges are canonicalized to
/// (min, max) and kept sorted; duplicates are rejected rather than merged.
/// Safe for concurrent reads once constructed.
class Graph {
 public:
  Graph(int num_nodes, std::vector<Edge> edges, GraphOptions options = {});

  int num_nodes() const { return num_nodes_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  bool directed() const { return options_.directed; }
  const GraphOptions& options() const { return options_; }

  bool has_edge(int u, int v) const;
  std::span<const int> neighbors(int v) const;
  int degree(int v) const;

  bool has_features() const { return feature_dim_ > 0; }
  int feature_dim() const { return feature_dim_; }
  const std::vector<double>& features() const { return features_; }
  std::span<const double> feature_row(int v) const;
  void set_features(std::vector<double> flat, int dim);

  bool has_labels() const { return !labels_.empty(); }
  const std::vector<int>& labels() const { return labels_; }
  void set_labels(std::vector<int> labels);

  bool has_node_types() const { return !node_types_.empty(); }
  const std::vector<int>& node_types() const { return node_types_; }
  void set_node_types(std::vector<int> types);

 private:
  int num_nodes_ = 0;
  std::vector<Edge> edges_;
  GraphOptions options_;
  std::vector<int> adj_offsets_;  // CSR over both directions
  std::vector<int> adj_;
  std::vector<double> features_;
  int feature_dim_ = 0;
  std::vector<int> labels_;
  std::vector<int> node_types_;
};

/// Canonicalizes an edge for an undirected graph.
inline Edge canonical_edge(int u, int v) {
  return u <= v ? Edge{u, v} : Edge{v, u};
}

Graph load_graph(const std::string& edge_list_path,
                 const std::string& feature_path = "",
                 const std::string& label_path = "",
                 GraphOptions options = {});

void save_graph(const Graph& graph, const std::string& edge_list_path,
                const std::string& feature_path = "",
                const std::string& label_path = "");

/// Planted-partition graph: contiguous blocks of near-equal size, within-block
/// pairs joined with p_in and cross-block pairs with p_out. Features are the
/// block one-hot plus Gaussian noise; labels are the block ids.
Graph generate_sbm(int n_nodes, int n_blocks, double p_in, double p_out,
                   int feature_dim, double noise_scale, std::uint64_t seed);

struct NodeSplit {
  std::vector<int> pretrain_nodes;
  std::vector<int> train_nodes;
  std::vector<int> valid_nodes;
  std::vector<int> test_nodes;
};

struct SplitResult {
  Graph pretrain;
  Graph finetune;
  NodeSplit split;
  int dropped_cross_edges = 0;
};

/// Node-transfer split: a pretrain_frac share of nodes goes to pre-training,
/// the rest is divided equally into train/valid/test. Each output graph keeps
/// the full node universe but only the edges internal to its node set; edges
/// crossing the split are dropped.
SplitResult split_nodes(const Graph& graph, double pretrain_frac, std::uint64_t seed);

}  // namespace dipgnn
