#include "dipgnn/gnn.hpp"

#include <cmath>

namespace dipgnn {

namespace {

Tensor xavier_uniform(int fan_in, int fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> data(static_cast<std::size_t>(fan_in) * fan_out);
  for (auto& v : data) v = (2.0 * rng.uniform() - 1.0) * a;
  return Tensor::param({fan_in, fan_out}, std::move(data));
}

}  // namespace

GnnParams init_gnn_params(ParamStore& store, const std::string& prefix, int feature_dim,
                          int hidden_dim, int num_layers, Rng& rng) {
  if (num_layers < 1) throw DataError("gnn: need at least one layer");
  if (feature_dim < 1 || hidden_dim < 1) throw DataError("gnn: dimensions must be positive");
  GnnParams p;
  p.w_in = store.add(prefix + ".gnn.in.W", xavier_uniform(feature_dim, hidden_dim, rng));
  p.b_in = store.add(prefix + ".gnn.in.b",
                     Tensor::param({hidden_dim}, std::vector<double>(hidden_dim, 0.0)));
  for (int k = 0; k < num_layers; ++k) {
    const std::string base = prefix + ".gnn.layer" + std::to_string(k) + ".";
    GnnLayer layer;
    layer.w_self = store.add(base + "W_self", xavier_uniform(hidden_dim, hidden_dim, rng));
    layer.w_neigh = store.add(base + "W_neigh", xavier_uniform(hidden_dim, hidden_dim, rng));
    layer.bias = store.add(base + "b",
                           Tensor::param({hidden_dim}, std::vector<double>(hidden_dim, 0.0)));
    p.layers.push_back(std::move(layer));
  }
  return p;
}

GnnParams gnn_params_from_store(const ParamStore& store, const std::string& prefix,
                                int num_layers) {
  GnnParams p;
  p.w_in = store.get(prefix + ".gnn.in.W");
  p.b_in = store.get(prefix + ".gnn.in.b");
  for (int k = 0; k < num_layers; ++k) {
    const std::string base = prefix + ".gnn.layer" + std::to_string(k) + ".";
    p.layers.push_back(GnnLayer{store.get(base + "W_self"), store.get(base + "W_neigh"),
                                store.get(base + "b")});
  }
  return p;
}

Tensor gnn_forward(int num_nodes, const std::vector<Edge>& edges, const Tensor& features,
                   const GnnParams& params, double dropout_p, Rng* rng) {
  if (features.rank() != 2 || features.dim(0) != num_nodes) {
    throw DataError("gnn_forward: features must be num_nodes x feature_dim");
  }
  if (features.dim(1) != params.feature_dim()) {
    throw DataError("gnn_forward: feature dimension does not match parameters");
  }
  if (dropout_p > 0.0 && rng == nullptr) {
    throw DataError("gnn_forward: dropout requires an rng");
  }

  // Each undirected edge becomes two directed messages.
  std::vector<int> msg_src, msg_dst;
  msg_src.reserve(edges.size() * 2);
  msg_dst.reserve(edges.size() * 2);
  for (const auto& e : edges) {
    if (e.src < 0 || e.src >= num_nodes || e.dst < 0 || e.dst >= num_nodes) {
      throw DataError("gnn_forward: edge endpoint outside the node range");
    }
    msg_src.push_back(e.src);
    msg_dst.push_back(e.dst);
    if (e.src != e.dst) {
      msg_src.push_back(e.dst);
      msg_dst.push_back(e.src);
    }
  }

  Tensor h = add(matmul(features, params.w_in), params.b_in);
  const int k_layers = params.num_layers();
  for (int k = 0; k < k_layers; ++k) {
    const auto& layer = params.layers[static_cast<std::size_t>(k)];
    Tensor agg;
    if (msg_src.empty()) {
      agg = Tensor::zeros({num_nodes, params.hidden_dim()});
    } else {
      agg = segment_mean(row_gather(h, msg_src), msg_dst, num_nodes);
    }
    h = relu(add(add(matmul(h, layer.w_self), matmul(agg, layer.w_neigh)), layer.bias));
    if (dropout_p > 0.0 && k + 1 < k_layers) {
      h = dropout(h, dropout_p, *rng);
    }
  }
  return h;
}

Tensor init_cosine_head(ParamStore& store, const std::string& name, int dim, Rng& rng) {
  std::vector<double> data(static_cast<std::size_t>(dim) * dim, 0.0);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      data[static_cast<std::size_t>(i) * dim + j] =
          (i == j ? 1.0 : 0.0) + 0.01 * rng.normal();
    }
  }
  return store.add(name, Tensor::param({dim, dim}, std::move(data)));
}

Tensor cosine_score(const Tensor& u, const Tensor& v, const Tensor& w_cos) {
  const int d = w_cos.dim(0);
  if (w_cos.rank() != 2 || w_cos.dim(1) != d) throw DataError("cosine_score: head must be square");
  if (u.size() != d || v.size() != d) {
    throw DataError("cosine_score: vector dimension does not match the head");
  }
  Tensor u_row = u.rank() == 2 ? u : reshape(u, {1, d});
  Tensor v_row = v.rank() == 2 ? v : reshape(v, {1, d});
  return reshape(cosine_scores_rows(u_row, v_row, w_cos), {1});
}

Tensor cosine_scores_rows(const Tensor& u_rows, const Tensor& v_rows, const Tensor& w_cos) {
  if (u_rows.rank() != 2 || v_rows.rank() != 2) {
    throw DataError("cosine_scores_rows: expected rank-2 embedding stacks");
  }
  return rowwise_cosine(matmul(u_rows, transpose(w_cos)), v_rows);
}

}  // namespace dipgnn
