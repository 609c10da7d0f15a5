#include "dipgnn/finetune.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "dipgnn/gnn.hpp"
#include "dipgnn/pretrain.hpp"

namespace dipgnn {

double eval_micro_f1(const std::vector<int>& predictions, const std::vector<int>& labels) {
  if (predictions.empty()) throw DataError("eval_micro_f1: empty inputs");
  if (predictions.size() != labels.size()) throw DataError("eval_micro_f1: length mismatch");
  int hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    hits += predictions[i] == labels[i] ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double eval_link_mrr(const std::function<double(int candidate, int fixed)>& score,
                     const Graph& graph, const std::vector<OrientedEdge>& eval_edges, int n_neg,
                     Rng& rng) {
  if (eval_edges.empty()) throw DataError("eval_link_mrr: no evaluation edges");
  double total = 0.0;
  for (const auto& edge : eval_edges) {
    const CandidateSet cand = sample_negatives(graph, edge, n_neg, rng);
    const double s_true = score(cand.true_node, cand.fixed_node);
    int rank = 1;
    for (int neg : cand.negatives) {
      // Pessimistic ties: the truth is ranked below every equal-scoring rival.
      if (score(neg, cand.fixed_node) >= s_true) ++rank;
    }
    total += 1.0 / static_cast<double>(rank);
  }
  return total / static_cast<double>(eval_edges.size());
}

std::string resolve_backbone(const std::string& setting, bool has_checkpoint, double lambda) {
  if (setting == "disc" || setting == "gen") return setting;
  if (setting != "auto") throw DataError("finetune: unknown backbone setting '" + setting + "'");
  if (has_checkpoint && lambda == 0.0) return "gen";
  return "disc";
}

namespace {

struct LocalTask {
  std::vector<int> node_ids;        // original ids, sorted
  std::vector<Edge> edges;          // local ids
  Tensor features;
  std::vector<int> labels;          // local order; -1 when absent
  std::vector<int> train_local, valid_local, test_local;
  int n_classes = 0;
};

LocalTask build_local_task(const Graph& graph, const NodeSplit& split, bool need_labels) {
  LocalTask task;
  task.node_ids = split.train_nodes;
  task.node_ids.insert(task.node_ids.end(), split.valid_nodes.begin(), split.valid_nodes.end());
  task.node_ids.insert(task.node_ids.end(), split.test_nodes.begin(), split.test_nodes.end());
  std::sort(task.node_ids.begin(), task.node_ids.end());
  std::vector<int> local_of(static_cast<std::size_t>(graph.num_nodes()), -1);
  for (std::size_t i = 0; i < task.node_ids.size(); ++i) {
    local_of[task.node_ids[i]] = static_cast<int>(i);
  }
  for (const auto& e : graph.edges()) {
    if (local_of[e.src] >= 0 && local_of[e.dst] >= 0) {
      task.edges.push_back(canonical_edge(local_of[e.src], local_of[e.dst]));
    }
  }
  std::sort(task.edges.begin(), task.edges.end());

  if (!graph.has_features()) throw DataError("finetune: graph has no features");
  const int d = graph.feature_dim();
  std::vector<double> rows(task.node_ids.size() * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < task.node_ids.size(); ++i) {
    const auto row = graph.feature_row(task.node_ids[i]);
    std::copy(row.begin(), row.end(), rows.begin() + i * d);
  }
  task.features =
      Tensor::constant({static_cast<int>(task.node_ids.size()), d}, std::move(rows));

  if (need_labels) {
    if (!graph.has_labels()) throw DataError("finetune: graph has no labels");
    task.labels.reserve(task.node_ids.size());
    for (int orig : task.node_ids) {
      const int y = graph.labels()[orig];
      if (y < 0) throw DataError("finetune: node " + std::to_string(orig) + " has no label");
      task.labels.push_back(y);
      task.n_classes = std::max(task.n_classes, y + 1);
    }
  }

  for (int v : split.train_nodes) task.train_local.push_back(local_of[v]);
  for (int v : split.valid_nodes) task.valid_local.push_back(local_of[v]);
  for (int v : split.test_nodes) task.test_local.push_back(local_of[v]);
  return task;
}

/// Copies backbone tensors (or makes fresh ones) into a new store with clean
/// optimizer state.
GnnParams make_backbone(ParamStore& dst, const ParamStore* pretrained,
                        const std::string& prefix, const TrainConfig& cfg, int feature_dim,
                        Rng& rng) {
  if (pretrained == nullptr) {
    return init_gnn_params(dst, prefix, feature_dim, cfg.model_hidden_dim, cfg.model_layers,
                           rng);
  }
  GnnParams src = gnn_params_from_store(*pretrained, prefix, cfg.model_layers);
  if (src.feature_dim() != feature_dim) {
    throw DataError("finetune: checkpoint feature dim " + std::to_string(src.feature_dim()) +
                    " does not match graph feature dim " + std::to_string(feature_dim));
  }
  GnnParams out;
  out.w_in = dst.add(prefix + ".gnn.in.W", Tensor::param(src.w_in.shape(), src.w_in.value()));
  out.b_in = dst.add(prefix + ".gnn.in.b", Tensor::param(src.b_in.shape(), src.b_in.value()));
  for (int k = 0; k < cfg.model_layers; ++k) {
    const std::string base = prefix + ".gnn.layer" + std::to_string(k) + ".";
    const auto& l = src.layers[static_cast<std::size_t>(k)];
    GnnLayer copy;
    copy.w_self = dst.add(base + "W_self", Tensor::param(l.w_self.shape(), l.w_self.value()));
    copy.w_neigh = dst.add(base + "W_neigh", Tensor::param(l.w_neigh.shape(), l.w_neigh.value()));
    copy.bias = dst.add(base + "b", Tensor::param(l.bias.shape(), l.bias.value()));
    out.layers.push_back(std::move(copy));
  }
  return out;
}

AdamwConfig finetune_opt(const TrainConfig& cfg) {
  AdamwConfig opt;
  opt.lr = cfg.finetune_lr;
  opt.beta1 = cfg.beta1;
  opt.beta2 = cfg.beta2;
  opt.eps = cfg.finetune_eps;
  opt.weight_decay = cfg.finetune_weight_decay;
  opt.clip_norm = cfg.finetune_clip;
  return opt;
}

std::vector<int> predict_classes(const Tensor& h, const std::vector<int>& nodes,
                                 const Tensor& w, const Tensor& b) {
  Tensor logits = add(matmul(row_gather(h, nodes), w), b);
  const int c = logits.dim(1);
  std::vector<int> preds;
  preds.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double* row = logits.value().data() + i * static_cast<std::size_t>(c);
    int best = 0;
    for (int j = 1; j < c; ++j) {
      if (row[j] > row[best]) best = j;
    }
    preds.push_back(best);
  }
  return preds;
}

}  // namespace

FinetuneResult finetune(const TrainConfig& config, const Graph& finetune_graph,
                        const NodeSplit& split, const ParamStore* pretrained,
                        double pretrained_lambda) {
  validate_config(config);
  LocalTask task = build_local_task(finetune_graph, split, /*need_labels=*/true);
  if (task.train_local.empty() || task.valid_local.empty() || task.test_local.empty()) {
    throw DataError("finetune: every split part needs at least one node");
  }

  FinetuneResult result;
  result.metric_name = "micro_f1";
  result.backbone = resolve_backbone(config.finetune_backbone, pretrained != nullptr,
                                     pretrained_lambda);

  Rng rng(config.seed);
  ParamStore store;
  GnnParams backbone = make_backbone(store, pretrained, result.backbone, config,
                                     finetune_graph.feature_dim(), rng);
  const double a = std::sqrt(6.0 / static_cast<double>(config.model_hidden_dim + task.n_classes));
  std::vector<double> w0(static_cast<std::size_t>(config.model_hidden_dim) * task.n_classes);
  for (auto& v : w0) v = (2.0 * rng.uniform() - 1.0) * a;
  Tensor clf_w = store.add("clf.W", Tensor::param({config.model_hidden_dim, task.n_classes},
                                                  std::move(w0)));
  Tensor clf_b = store.add(
      "clf.b", Tensor::param({task.n_classes}, std::vector<double>(task.n_classes, 0.0)));

  std::vector<int> train_labels, valid_labels, test_labels;
  for (int v : task.train_local) train_labels.push_back(task.labels[v]);
  for (int v : task.valid_local) valid_labels.push_back(task.labels[v]);
  for (int v : task.test_local) test_labels.push_back(task.labels[v]);

  const AdamwConfig opt = finetune_opt(config);
  auto evaluate = [&](const std::vector<int>& nodes, const std::vector<int>& labels) {
    Tensor h = gnn_forward(static_cast<int>(task.node_ids.size()), task.edges, task.features,
                           backbone);
    return eval_micro_f1(predict_classes(h, nodes, clf_w, clf_b), labels);
  };

  double best_valid = evaluate(task.valid_local, valid_labels);
  auto best_values = store.snapshot_values();
  result.best_step = 0;

  for (int t = 1; t <= config.finetune_steps; ++t) {
    Tensor h = gnn_forward(static_cast<int>(task.node_ids.size()), task.edges, task.features,
                           backbone, config.finetune_dropout, &rng);
    Tensor logits = add(matmul(row_gather(h, task.train_local), clf_w), clf_b);
    Tensor loss = scale(softmax_cross_entropy(logits, train_labels),
                        1.0 / static_cast<double>(train_labels.size()));
    store.zero_grad();
    backward(loss);
    adamw_step(store, opt);

    if (t % config.eval_every == 0 || t == config.finetune_steps) {
      const double valid = evaluate(task.valid_local, valid_labels);
      if (valid > best_valid) {
        best_valid = valid;
        best_values = store.snapshot_values();
        result.best_step = t;
      }
    }
  }

  store.restore_values(best_values);
  result.valid_metric = best_valid;
  result.test_metric = evaluate(task.test_local, test_labels);
  return result;
}

FinetuneResult finetune_link(const TrainConfig& config, const Graph& finetune_graph,
                             const NodeSplit& split, const ParamStore* pretrained,
                             double pretrained_lambda) {
  validate_config(config);
  LocalTask task = build_local_task(finetune_graph, split, /*need_labels=*/false);

  FinetuneResult result;
  result.metric_name = "mrr";
  result.backbone = resolve_backbone(config.finetune_backbone, pretrained != nullptr,
                                     pretrained_lambda);

  Rng rng(config.seed);
  ParamStore store;
  GnnParams backbone = make_backbone(store, pretrained, result.backbone, config,
                                     finetune_graph.feature_dim(), rng);
  Tensor cos_head;
  if (pretrained != nullptr && pretrained->has(result.backbone + ".cos.W")) {
    Tensor src = pretrained->get(result.backbone + ".cos.W");
    cos_head = store.add(result.backbone + ".cos.W", Tensor::param(src.shape(), src.value()));
  } else {
    cos_head = init_cosine_head(store, result.backbone + ".cos.W", config.model_hidden_dim, rng);
  }

  // Hold out link_holdout of the edges touching valid nodes for validation
  // ranking, then the same fraction of the remaining test-node edges. What is
  // left is both the message-passing structure and the supervision pool.
  const int n_local = static_cast<int>(task.node_ids.size());
  std::vector<char> is_valid(static_cast<std::size_t>(n_local), 0);
  std::vector<char> is_test(static_cast<std::size_t>(n_local), 0);
  std::vector<char> is_train(static_cast<std::size_t>(n_local), 0);
  for (int v : task.valid_local) is_valid[v] = 1;
  for (int v : task.test_local) is_test[v] = 1;
  for (int v : task.train_local) is_train[v] = 1;

  std::vector<int> valid_edge_ids, test_edge_ids;
  for (std::size_t i = 0; i < task.edges.size(); ++i) {
    const auto& e = task.edges[i];
    if (is_valid[e.src] || is_valid[e.dst]) {
      valid_edge_ids.push_back(static_cast<int>(i));
    } else if (is_test[e.src] || is_test[e.dst]) {
      test_edge_ids.push_back(static_cast<int>(i));
    }
  }
  auto hold_out = [&](std::vector<int>& pool) {
    const int k = static_cast<int>(std::llround(config.link_holdout * pool.size()));
    std::vector<int> picked = rng.sample_without_replacement(static_cast<int>(pool.size()), k);
    std::vector<int> held;
    for (int i : picked) held.push_back(pool[static_cast<std::size_t>(i)]);
    std::sort(held.begin(), held.end());
    return held;
  };
  const std::vector<int> held_valid = hold_out(valid_edge_ids);
  const std::vector<int> held_test = hold_out(test_edge_ids);

  std::vector<char> held(task.edges.size(), 0);
  for (int i : held_valid) held[i] = 1;
  for (int i : held_test) held[i] = 1;
  std::vector<Edge> structure_edges;
  std::vector<Edge> train_edges;
  for (std::size_t i = 0; i < task.edges.size(); ++i) {
    if (held[i]) continue;
    structure_edges.push_back(task.edges[i]);
    if (is_train[task.edges[i].src] && is_train[task.edges[i].dst]) {
      train_edges.push_back(task.edges[i]);
    }
  }
  if (train_edges.empty()) throw DataError("finetune_link: no training edges");
  if (held_valid.empty() || held_test.empty()) {
    throw DataError("finetune_link: no held-out edges to rank");
  }

  // The local adjacency (with held-out edges included) used for sampling
  // negatives; a held-out true edge must never be drawn as a negative.
  Graph local_full(n_local, task.edges, finetune_graph.options());

  auto oriented = [&](const std::vector<int>& ids) {
    std::vector<OrientedEdge> out;
    for (int i : ids) out.push_back({task.edges[i].src, task.edges[i].dst});
    return out;
  };
  const std::vector<OrientedEdge> valid_eval = oriented(held_valid);
  const std::vector<OrientedEdge> test_eval = oriented(held_test);

  // Fixed candidate sets keep the validation metric comparable across steps.
  const auto freeze_candidates = [&](const std::vector<OrientedEdge>& edges, std::uint64_t salt) {
    Rng neg_rng(config.seed ^ salt);
    std::vector<CandidateSet> out;
    for (const auto& e : edges) {
      out.push_back(sample_negatives(local_full, e, config.link_n_neg, neg_rng));
    }
    return out;
  };
  const auto valid_cands = freeze_candidates(valid_eval, 0x9e3779b97f4a7c15ull);
  const auto test_cands = freeze_candidates(test_eval, 0xbf58476d1ce4e5b9ull);

  auto mrr_over = [&](const Tensor& h, const std::vector<CandidateSet>& cands) {
    double total = 0.0;
    for (const auto& c : cands) {
      std::vector<int> rows{c.true_node};
      rows.insert(rows.end(), c.negatives.begin(), c.negatives.end());
      std::vector<int> fixed(rows.size(), c.fixed_node);
      Tensor scores = cosine_scores_rows(row_gather(h, rows), row_gather(h, fixed), cos_head);
      const double s_true = scores.value()[0];
      int rank = 1;
      for (std::size_t j = 1; j < scores.value().size(); ++j) {
        if (scores.value()[j] >= s_true) ++rank;
      }
      total += 1.0 / rank;
    }
    return total / static_cast<double>(cands.size());
  };
  auto evaluate = [&](const std::vector<CandidateSet>& cands) {
    Tensor h = gnn_forward(n_local, structure_edges, task.features, backbone);
    return mrr_over(h, cands);
  };

  const AdamwConfig opt = finetune_opt(config);
  double best_valid = evaluate(valid_cands);
  auto best_values = store.snapshot_values();
  result.best_step = 0;

  for (int t = 1; t <= config.finetune_steps; ++t) {
    const int batch = std::min<int>(config.link_batch, static_cast<int>(train_edges.size()));
    std::vector<OrientedEdge> batch_edges;
    for (int i : rng.sample_without_replacement(static_cast<int>(train_edges.size()), batch)) {
      const Edge& e = train_edges[static_cast<std::size_t>(i)];
      if (rng.uniform() < 0.5) {
        batch_edges.push_back({e.dst, e.src});
      } else {
        batch_edges.push_back({e.src, e.dst});
      }
    }
    std::vector<CandidateSet> cands;
    for (const auto& e : batch_edges) {
      cands.push_back(sample_negatives(local_full, e, config.link_n_neg, rng));
    }
    Tensor h = gnn_forward(n_local, structure_edges, task.features, backbone,
                           config.finetune_dropout, &rng);
    GenerationOutcome out = generate_edges(h, batch_edges, cands, cos_head);
    Tensor loss = scale(out.loss, 1.0 / static_cast<double>(batch_edges.size()));
    store.zero_grad();
    backward(loss);
    adamw_step(store, opt);

    if (t % config.eval_every == 0 || t == config.finetune_steps) {
      const double valid = evaluate(valid_cands);
      if (valid > best_valid) {
        best_valid = valid;
        best_values = store.snapshot_values();
        result.best_step = t;
      }
    }
  }

  store.restore_values(best_values);
  result.valid_metric = best_valid;
  result.test_metric = evaluate(test_cands);
  return result;
}

}  // namespace dipgnn
