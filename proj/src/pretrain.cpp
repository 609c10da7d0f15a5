#include "dipgnn/pretrain.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

namespace dipgnn {

GenerationOutcome generation_from_scores(const Tensor& scores,
                                         const std::vector<OrientedEdge>& masked,
                                         const std::vector<CandidateSet>& candidates) {
  if (masked.size() != candidates.size()) {
    throw DataError("generate_edges: one candidate set per masked edge required");
  }
  std::vector<int> offsets{0};
  std::vector<int> truth_pos;
  for (const auto& c : candidates) {
    if (c.total() < 1) throw DataError("generate_edges: empty candidate set");
    offsets.push_back(offsets.back() + c.total());
    truth_pos.push_back(0);  // candidates store the truth first
  }
  if (scores.size() != offsets.back()) {
    throw DataError("generate_edges: score count does not match candidate sets");
  }

  GenerationOutcome out;
  out.loss = segment_softmax_cross_entropy(scores, offsets, truth_pos);
  out.generated.reserve(masked.size());
  out.correct.reserve(masked.size());
  int n_correct = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const double* s = scores.value().data() + offsets[i];
    int best_pos = 0;
    int best_id = c.true_node;
    for (int j = 1; j < c.total(); ++j) {
      const int id = c.negatives[static_cast<std::size_t>(j - 1)];
      if (s[j] > s[best_pos] || (s[j] == s[best_pos] && id < best_id)) {
        best_pos = j;
        best_id = id;
      }
    }
    out.generated.push_back({best_id, c.fixed_node});
    const bool hit = best_id == c.true_node;
    out.correct.push_back(hit ? 1 : 0);
    n_correct += hit ? 1 : 0;
  }
  out.accuracy = masked.empty() ? 0.0 : static_cast<double>(n_correct) / masked.size();
  return out;
}

GenerationOutcome generate_edges(const Tensor& h_g, const std::vector<OrientedEdge>& masked,
                                 const std::vector<CandidateSet>& candidates,
                                 const Tensor& w_cos) {
  if (masked.size() != candidates.size()) {
    throw DataError("generate_edges: one candidate set per masked edge required");
  }
  std::vector<int> cand_rows, fixed_rows;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    if (c.fixed_node != masked[i].fixed_node || c.true_node != masked[i].free_node) {
      throw DataError("generate_edges: candidate set does not match its masked edge");
    }
    cand_rows.push_back(c.true_node);
    for (int neg : c.negatives) cand_rows.push_back(neg);
    for (int j = 0; j < c.total(); ++j) fixed_rows.push_back(c.fixed_node);
  }
  if (cand_rows.empty()) {
    GenerationOutcome out;
    out.loss = Tensor::constant({1}, {0.0});
    return out;
  }
  Tensor scores = cosine_scores_rows(row_gather(h_g, cand_rows), row_gather(h_g, fixed_rows),
                                     w_cos);
  return generation_from_scores(scores, masked, candidates);
}

DiscriminationOutcome discrimination_from_scores(const Tensor& scores,
                                                 const std::vector<double>& labels) {
  if (scores.size() == 0) throw DataError("discriminate_edges: no edges to score");
  DiscriminationOutcome out;
  out.loss = binary_cross_entropy_with_logits(scores, labels);
  out.probabilities.reserve(labels.size());
  int hits = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = sigmoid_value(scores.value()[i]);
    out.probabilities.push_back(p);
    const bool predict_generated = p > 0.5;
    if (predict_generated == (labels[i] > 0.5)) ++hits;
  }
  out.accuracy = static_cast<double>(hits) / static_cast<double>(labels.size());
  return out;
}

DiscriminationOutcome discriminate_edges(const Tensor& h_d,
                                         const std::vector<OrientedEdge>& generated,
                                         const std::vector<Edge>& positive_edges,
                                         const Tensor& w_cos, bool generated_label_high) {
  if (generated.empty() && positive_edges.empty()) {
    throw DataError("discriminate_edges: both edge sets are empty");
  }
  std::vector<int> src_rows, dst_rows;
  std::vector<double> labels;
  const double gen_label = generated_label_high ? 1.0 : 0.0;
  for (const auto& e : generated) {
    src_rows.push_back(e.free_node);
    dst_rows.push_back(e.fixed_node);
    labels.push_back(gen_label);
  }
  for (const auto& e : positive_edges) {
    src_rows.push_back(e.src);
    dst_rows.push_back(e.dst);
    labels.push_back(1.0 - gen_label);
  }
  Tensor scores =
      cosine_scores_rows(row_gather(h_d, src_rows), row_gather(h_d, dst_rows), w_cos);
  DiscriminationOutcome out = discrimination_from_scores(scores, labels);
  if (!generated_label_high) {
    // Flip reporting so probabilities still mean p(generated).
    for (auto& p : out.probabilities) p = 1.0 - p;
  }
  return out;
}

FeatureGenOutcome generate_features(const Tensor& h_g, const std::vector<int>& gen_nodes,
                                    const Tensor& w_feat_gen, const Tensor& features) {
  FeatureGenOutcome out;
  if (gen_nodes.empty()) {
    out.loss = Tensor::constant({1}, {0.0});
    out.corrupted = detach(features);
    return out;
  }
  Tensor predicted = matmul(row_gather(h_g, gen_nodes), w_feat_gen);
  Tensor truth = row_gather(features, gen_nodes);
  out.loss = l2_loss(sub(predicted, truth));

  const int d = features.dim(1);
  std::vector<double> corrupted = features.value();
  for (std::size_t i = 0; i < gen_nodes.size(); ++i) {
    const double* row = predicted.value().data() + i * d;
    std::copy_n(row, d, corrupted.begin() + static_cast<std::size_t>(gen_nodes[i]) * d);
  }
  out.corrupted = Tensor::constant(features.shape(), std::move(corrupted));
  return out;
}

Tensor discriminate_features(const Tensor& h_d, int num_nodes, const std::vector<int>& gen_nodes,
                             const Tensor& w_feat_disc, bool balance, double beta, Rng& rng) {
  std::vector<int> nodes;
  std::vector<double> labels;
  std::vector<char> is_gen(static_cast<std::size_t>(num_nodes), 0);
  for (int n : gen_nodes) is_gen[n] = 1;
  if (balance) {
    std::vector<int> originals;
    for (int n = 0; n < num_nodes; ++n) {
      if (!is_gen[n]) originals.push_back(n);
    }
    const int want = static_cast<int>(std::llround(beta * static_cast<double>(gen_nodes.size())));
    const int take = std::min<int>(want, static_cast<int>(originals.size()));
    std::vector<int> picked =
        rng.sample_without_replacement(static_cast<int>(originals.size()), take);
    std::sort(picked.begin(), picked.end());
    nodes = gen_nodes;
    labels.assign(gen_nodes.size(), 1.0);
    for (int i : picked) {
      nodes.push_back(originals[static_cast<std::size_t>(i)]);
      labels.push_back(0.0);
    }
  } else {
    for (int n = 0; n < num_nodes; ++n) {
      nodes.push_back(n);
      labels.push_back(is_gen[n] ? 1.0 : 0.0);
    }
  }
  if (nodes.empty()) return Tensor::constant({1}, {0.0});
  Tensor logits = matmul(row_gather(h_d, nodes), w_feat_disc);
  return binary_cross_entropy_with_logits(logits, labels);
}

Tensor total_loss(const Tensor& gen_edge, const Tensor& gen_feat, const Tensor& disc_edge,
                  const Tensor& disc_feat, double lambda) {
  if (lambda < 0.0) throw DataError("total_loss: lambda must be >= 0");
  return add(add(gen_edge, gen_feat), scale(add(disc_edge, disc_feat), lambda));
}

CoverageStats coverage_stats(double mask_ratio, double generator_accuracy) {
  if (!(mask_ratio >= 0.0 && mask_ratio <= 1.0)) {
    throw DataError("coverage_stats: mask ratio not in [0,1]");
  }
  if (!(generator_accuracy >= 0.0 && generator_accuracy <= 1.0)) {
    throw DataError("coverage_stats: accuracy not in [0,1]");
  }
  CoverageStats s;
  s.mask_ratio = mask_ratio;
  s.accuracy = generator_accuracy;
  s.cov_gen = 1.0 - mask_ratio;
  s.cov_dis = (1.0 - mask_ratio) + mask_ratio * generator_accuracy;
  s.ratio = s.cov_dis / s.cov_gen;  // inf when everything is masked
  return s;
}

DipModels init_dip_models(ParamStore& store, const TrainConfig& config, int feature_dim,
                          Rng& rng) {
  DipModels m;
  m.gen_gnn = init_gnn_params(store, "gen", feature_dim, config.model_hidden_dim,
                              config.model_layers, rng);
  m.gen_cos = init_cosine_head(store, "gen.cos.W", config.model_hidden_dim, rng);
  m.disc_gnn = init_gnn_params(store, "disc", feature_dim, config.model_hidden_dim,
                               config.model_layers, rng);
  m.disc_cos = init_cosine_head(store, "disc.cos.W", config.model_hidden_dim, rng);
  Rng* r = &rng;
  auto xavier = [r](int fi, int fo) {
    const double a = std::sqrt(6.0 / static_cast<double>(fi + fo));
    std::vector<double> data(static_cast<std::size_t>(fi) * fo);
    for (auto& v : data) v = (2.0 * r->uniform() - 1.0) * a;
    return Tensor::param({fi, fo}, std::move(data));
  };
  m.feat_gen_w = store.add("gen.feat.W", xavier(config.model_hidden_dim, feature_dim));
  m.feat_disc_w = store.add("disc.feat.w", xavier(config.model_hidden_dim, 1));
  return m;
}

DipModels dip_models_from_store(const ParamStore& store, int num_layers) {
  DipModels m;
  m.gen_gnn = gnn_params_from_store(store, "gen", num_layers);
  m.disc_gnn = gnn_params_from_store(store, "disc", num_layers);
  m.gen_cos = store.get("gen.cos.W");
  m.disc_cos = store.get("disc.cos.W");
  m.feat_gen_w = store.get("gen.feat.W");
  m.feat_disc_w = store.get("disc.feat.w");
  return m;
}

namespace {

Tensor gather_local_features(const Graph& graph, const Subgraph& sub) {
  const int d = graph.feature_dim();
  std::vector<double> rows(static_cast<std::size_t>(sub.num_nodes()) * d);
  for (int i = 0; i < sub.num_nodes(); ++i) {
    const auto row = graph.feature_row(sub.original_of(i));
    std::copy(row.begin(), row.end(), rows.begin() + static_cast<std::size_t>(i) * d);
  }
  return Tensor::constant({sub.num_nodes(), d}, std::move(rows));
}

std::vector<Edge> dedup_edges(const std::vector<Edge>& unmasked,
                              const std::vector<OrientedEdge>& generated) {
  std::vector<Edge> edges = unmasked;
  for (const auto& e : generated) edges.push_back(canonical_edge(e.free_node, e.fixed_node));
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return edges;
}

GenerationOutcome random_generation(const std::vector<OrientedEdge>& masked,
                                    const std::vector<CandidateSet>& candidates, Rng& rng) {
  GenerationOutcome out;
  out.loss = Tensor::constant({1}, {0.0});
  int n_correct = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const auto& c = candidates[i];
    const int pick = rng.uniform_int(c.total());
    const int id = pick == 0 ? c.true_node : c.negatives[static_cast<std::size_t>(pick - 1)];
    out.generated.push_back({id, c.fixed_node});
    const bool hit = id == c.true_node;
    out.correct.push_back(hit ? 1 : 0);
    n_correct += hit ? 1 : 0;
  }
  out.accuracy = masked.empty() ? 0.0 : static_cast<double>(n_correct) / masked.size();
  return out;
}

}  // namespace

StepMetrics run_pretrain_step(const TrainConfig& config, const Graph& graph,
                              const std::vector<int>& seed_pool, ParamStore& store,
                              const DipModels& models, Rng& rng, int step, bool update,
                              StepRecord* record) {
  const bool edges_on = config.variant != "features";
  const bool features_on = config.variant == "edges+features" || config.variant == "features" ||
                           config.variant == "random-edges";
  const bool random_edges = config.variant == "random-edges";

  StepMetrics sm;
  sm.step = step;

  const int n_seeds = std::min<int>(config.sampler_seed_nodes,
                                    static_cast<int>(seed_pool.size()));
  std::vector<int> seeds;
  for (int i : rng.sample_without_replacement(static_cast<int>(seed_pool.size()), n_seeds)) {
    seeds.push_back(seed_pool[static_cast<std::size_t>(i)]);
  }
  sm.seed_nodes = n_seeds;
  Subgraph sub = sample_subgraph(graph, seeds, config.sampler_depth, config.sampler_width, rng);
  sm.sub_nodes = sub.num_nodes();
  sm.sub_edges = static_cast<int>(sub.induced_edges.size());

  Graph local(sub.num_nodes(), sub.induced_edges, graph.options());
  Tensor features = gather_local_features(graph, sub);

  const double mask_ratio = edges_on ? config.mask_edge_ratio : 0.0;
  MaskedView view = mask_edges(local, mask_ratio, rng);
  sm.masked_edges = static_cast<int>(view.masked.size());

  std::vector<CandidateSet> candidates;
  candidates.reserve(view.masked.size());
  for (const auto& me : view.masked) {
    // Clamp the negative count to the non-neighbors actually available in
    // this subgraph; desk-scale samples can be smaller than gen.n_neg.
    const int avail = local.num_nodes() - 1 - local.degree(me.fixed_node);
    candidates.push_back(sample_negatives(local, me, std::min(config.gen_n_neg, avail), rng));
  }

  const double dropout_p = update ? config.pretrain_dropout : 0.0;
  Tensor h_g = gnn_forward(local.num_nodes(), view.unmasked, features, models.gen_gnn,
                           dropout_p, &rng);

  GenerationOutcome gen;
  if (!edges_on || view.masked.empty()) {
    gen.loss = Tensor::constant({1}, {0.0});
    gen.accuracy = 0.0;
  } else if (random_edges) {
    gen = random_generation(view.masked, candidates, rng);
  } else {
    gen = generate_edges(h_g, view.masked, candidates, models.gen_cos);
  }
  view.generated = gen.generated;

  std::vector<int> feature_nodes;
  FeatureGenOutcome feat_gen;
  if (features_on) {
    feature_nodes = select_feature_nodes(local, config.mask_feature_ratio, rng);
    feat_gen = generate_features(h_g, feature_nodes, models.feat_gen_w, features);
  } else {
    feat_gen.loss = Tensor::constant({1}, {0.0});
    feat_gen.corrupted = detach(features);
  }

  const std::vector<Edge> disc_edges = dedup_edges(view.unmasked, view.generated);
  Tensor h_d = gnn_forward(local.num_nodes(), disc_edges, feat_gen.corrupted, models.disc_gnn,
                           dropout_p, &rng);

  std::vector<Edge> positives = sample_positive_edges(
      view.unmasked, static_cast<int>(view.generated.size()), config.disc_alpha, rng);

  DiscriminationOutcome disc;
  if (edges_on && !(view.generated.empty() && positives.empty())) {
    disc = discriminate_edges(h_d, view.generated, positives, models.disc_cos,
                              !config.disc_flip_labels);
  } else {
    disc.loss = Tensor::constant({1}, {0.0});
    disc.accuracy = 0.0;
  }

  Tensor feat_disc_loss;
  std::vector<int> feat_disc_nodes;
  std::vector<double> feat_disc_labels;
  if (features_on) {
    // Selection is drawn here so it can be recorded; the op itself re-derives
    // labels from the node list.
    std::vector<char> is_gen(static_cast<std::size_t>(local.num_nodes()), 0);
    for (int n : feature_nodes) is_gen[n] = 1;
    if (config.disc_feature_balance) {
      std::vector<int> originals;
      for (int n = 0; n < local.num_nodes(); ++n) {
        if (!is_gen[n]) originals.push_back(n);
      }
      const int want = static_cast<int>(
          std::llround(config.disc_feature_beta * static_cast<double>(feature_nodes.size())));
      const int take = std::min<int>(want, static_cast<int>(originals.size()));
      std::vector<int> picked =
          rng.sample_without_replacement(static_cast<int>(originals.size()), take);
      std::sort(picked.begin(), picked.end());
      feat_disc_nodes = feature_nodes;
      feat_disc_labels.assign(feature_nodes.size(), 1.0);
      for (int i : picked) {
        feat_disc_nodes.push_back(originals[static_cast<std::size_t>(i)]);
        feat_disc_labels.push_back(0.0);
      }
    } else {
      for (int n = 0; n < local.num_nodes(); ++n) {
        feat_disc_nodes.push_back(n);
        feat_disc_labels.push_back(is_gen[n] ? 1.0 : 0.0);
      }
    }
    if (feat_disc_nodes.empty()) {
      feat_disc_loss = Tensor::constant({1}, {0.0});
    } else {
      Tensor logits = matmul(row_gather(h_d, feat_disc_nodes), models.feat_disc_w);
      feat_disc_loss = binary_cross_entropy_with_logits(logits, feat_disc_labels);
    }
  } else {
    feat_disc_loss = Tensor::constant({1}, {0.0});
  }

  Tensor total = total_loss(gen.loss, feat_gen.loss, disc.loss, feat_disc_loss, config.lambda);

  sm.gen_edge_loss = gen.loss.scalar();
  sm.gen_feat_loss = feat_gen.loss.scalar();
  sm.disc_edge_loss = disc.loss.scalar();
  sm.disc_feat_loss = feat_disc_loss.scalar();
  sm.total_loss = total.scalar();
  sm.gen_acc = gen.accuracy;
  sm.disc_acc = disc.accuracy;
  for (char c : gen.correct) sm.masked_correct += c;

  // Coverage identities plus an independent recount of true edges present in
  // the discriminator's input graph.
  const int n_local_edges = local.num_edges();
  if (n_local_edges > 0) {
    const double m = static_cast<double>(sm.masked_edges) / n_local_edges;
    const CoverageStats cov = coverage_stats(m, sm.gen_acc);
    sm.cov_gen = cov.cov_gen;
    sm.cov_dis = cov.cov_dis;
    std::set<Edge> disc_set(disc_edges.begin(), disc_edges.end());
    int present = 0;
    for (const auto& e : local.edges()) present += disc_set.count(e) != 0 ? 1 : 0;
    sm.cov_dis_recount = static_cast<double>(present) / n_local_edges;
  } else {
    sm.cov_gen = sm.cov_dis = sm.cov_dis_recount = 1.0;
  }

  if (record != nullptr) {
    record->num_nodes = local.num_nodes();
    record->features = features;
    record->unmasked = view.unmasked;
    record->masked = view.masked;
    record->candidates = candidates;
    record->generated = view.generated;
    record->disc_input_edges = disc_edges;
    record->positive_edges = positives;
    record->feature_nodes = feature_nodes;
    record->corrupted_features = feat_gen.corrupted;
    record->feat_disc_nodes = feat_disc_nodes;
    record->feat_disc_labels = feat_disc_labels;
    record->lambda = config.lambda;
    record->total = total.scalar();
    return sm;
  }

  if (update && total.requires_grad()) {
    store.zero_grad();
    backward(total);
    AdamwConfig opt;
    opt.lr = config.pretrain_lr;
    opt.beta1 = config.beta1;
    opt.beta2 = config.beta2;
    opt.eps = config.pretrain_eps;
    opt.weight_decay = config.weight_decay;
    opt.clip_norm = config.pretrain_clip;
    adamw_step(store, opt);
  }
  return sm;
}

Tensor step_loss_from_record(const StepRecord& r, const DipModels& models) {
  Tensor h_g = gnn_forward(r.num_nodes, r.unmasked, r.features, models.gen_gnn);

  Tensor gen_loss;
  if (r.masked.empty()) {
    gen_loss = Tensor::constant({1}, {0.0});
  } else {
    std::vector<int> cand_rows, fixed_rows;
    std::vector<int> offsets{0};
    std::vector<int> truth_pos;
    for (const auto& c : r.candidates) {
      cand_rows.push_back(c.true_node);
      for (int neg : c.negatives) cand_rows.push_back(neg);
      for (int j = 0; j < c.total(); ++j) fixed_rows.push_back(c.fixed_node);
      offsets.push_back(offsets.back() + c.total());
      truth_pos.push_back(0);
    }
    Tensor scores = cosine_scores_rows(row_gather(h_g, cand_rows),
                                       row_gather(h_g, fixed_rows), models.gen_cos);
    gen_loss = segment_softmax_cross_entropy(scores, offsets, truth_pos);
  }

  Tensor feat_gen_loss;
  if (r.feature_nodes.empty()) {
    feat_gen_loss = Tensor::constant({1}, {0.0});
  } else {
    Tensor predicted = matmul(row_gather(h_g, r.feature_nodes), models.feat_gen_w);
    Tensor truth = row_gather(r.features, r.feature_nodes);
    feat_gen_loss = l2_loss(sub(predicted, truth));
  }

  Tensor h_d = gnn_forward(r.num_nodes, r.disc_input_edges, r.corrupted_features,
                           models.disc_gnn);

  Tensor disc_loss;
  if (r.generated.empty() && r.positive_edges.empty()) {
    disc_loss = Tensor::constant({1}, {0.0});
  } else {
    std::vector<int> src_rows, dst_rows;
    std::vector<double> labels;
    for (const auto& e : r.generated) {
      src_rows.push_back(e.free_node);
      dst_rows.push_back(e.fixed_node);
      labels.push_back(1.0);
    }
    for (const auto& e : r.positive_edges) {
      src_rows.push_back(e.src);
      dst_rows.push_back(e.dst);
      labels.push_back(0.0);
    }
    Tensor scores =
        cosine_scores_rows(row_gather(h_d, src_rows), row_gather(h_d, dst_rows), models.disc_cos);
    disc_loss = binary_cross_entropy_with_logits(scores, labels);
  }

  Tensor feat_disc_loss;
  if (r.feat_disc_nodes.empty()) {
    feat_disc_loss = Tensor::constant({1}, {0.0});
  } else {
    Tensor logits = matmul(row_gather(h_d, r.feat_disc_nodes), models.feat_disc_w);
    feat_disc_loss = binary_cross_entropy_with_logits(logits, r.feat_disc_labels);
  }

  return total_loss(gen_loss, feat_gen_loss, disc_loss, feat_disc_loss, r.lambda);
}

PretrainOutput pretrain(const TrainConfig& config, const Graph& graph) {
  validate_config(config);
  if (!graph.has_features()) throw DataError("pretrain: graph has no features");
  if (graph.num_edges() == 0) throw DataError("pretrain: graph has no edges");

  Rng rng(config.seed);
  PretrainOutput out;
  DipModels models = init_dip_models(out.store, config, graph.feature_dim(), rng);

  std::vector<int> seed_pool;
  for (int v = 0; v < graph.num_nodes(); ++v) {
    if (graph.degree(v) > 0) seed_pool.push_back(v);
  }

  out.metrics.reserve(static_cast<std::size_t>(config.pretrain_steps));
  for (int t = 0; t < config.pretrain_steps; ++t) {
    try {
      out.metrics.push_back(
          run_pretrain_step(config, graph, seed_pool, out.store, models, rng, t));
    } catch (const NumericalError& e) {
      throw NumericalError("pretrain step " + std::to_string(t) + ": " + e.what());
    }
  }

  out.meta.version = 1;
  out.meta.config_digest = config_digest(config);
  out.meta.lambda = config.lambda;
  out.meta.layers = config.model_layers;
  out.meta.hidden_dim = config.model_hidden_dim;
  out.meta.feature_dim = graph.feature_dim();
  out.meta.variant = config.variant;
  return out;
}

}  // namespace dipgnn
