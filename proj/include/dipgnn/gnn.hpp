#pragma once

#include <string>
#include <vector>

#include "dipgnn/graph.hpp"
#include "dipgnn/optim.hpp"
#include "dipgnn/tensor.hpp"

namespace dipgnn {

struct GnnLayer {
  Tensor w_self;
  Tensor w_neigh;
  Tensor bias;
};

/// Message-passing encoder parameters: a linear input projection from the
/// feature dimension, then K rounds of
///   h_v <- relu(W_self h_v + W_neigh mean_{u in N(v)} h_u + b).
struct GnnParams {
  Tensor w_in;
  Tensor b_in;
  std::vector<GnnLayer> layers;

  int hidden_dim() const { return w_in.dim(1); }
  int feature_dim() const { return w_in.dim(0); }
  int num_layers() const { return static_cast<int>(layers.size()); }
};

/// Creates Xavier-initialized parameters registered under
/// `<prefix>.gnn.in.{W,b}` and `<prefix>.gnn.layer<k>.{W_self,W_neigh,b}`.
GnnParams init_gnn_params(ParamStore& store, const std::string& prefix, int feature_dim,
                          int hidden_dim, int num_layers, Rng& rng);

/// Rebinds GnnParams to tensors already present in a store (e.g. a loaded
/// checkpoint).
GnnParams gnn_params_from_store(const ParamStore& store, const std::string& prefix,
                                int num_layers);

/// Forward pass over an explicit edge set given in local ids. Each undirected
/// edge carries messages both ways; degree-0 nodes aggregate a zero vector.
/// Dropout is applied to hidden embeddings between layers when dropout_p > 0
/// (rng required in that case).
Tensor gnn_forward(int num_nodes, const std::vector<Edge>& edges, const Tensor& features,
                   const GnnParams& params, double dropout_p = 0.0, Rng* rng = nullptr);

/// Trainable cosine head: d(u, v) = (W u)^T v / (||W u|| ||v||), initialized
/// to identity plus small noise so initial scores are near plain cosine.
Tensor init_cosine_head(ParamStore& store, const std::string& name, int dim, Rng& rng);

/// Scores one pair of embedding vectors; differentiable in u, v and the head.
Tensor cosine_score(const Tensor& u, const Tensor& v, const Tensor& w_cos);

/// Row-wise scores d(u_i, v_i) for two m x d stacks of embeddings.
Tensor cosine_scores_rows(const Tensor& u_rows, const Tensor& v_rows, const Tensor& w_cos);

}  // namespace dipgnn
