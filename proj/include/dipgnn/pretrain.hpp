#pragma once

#include <optional>
#include <vector>

#include "dipgnn/config.hpp"
#include "dipgnn/gnn.hpp"
#include "dipgnn/graph.hpp"
#include "dipgnn/mask.hpp"
#include "dipgnn/metrics.hpp"
#include "dipgnn/optim.hpp"
#include "dipgnn/sampler.hpp"

namespace dipgnn {

/// Result of one edge-generation pass: E_g aligned with the masked edges,
/// exact-recovery flags, the summed generator loss and top-1 accuracy.
struct GenerationOutcome {
  std::vector<OrientedEdge> generated;
  std::vector<char> correct;
  Tensor loss;
  double accuracy = 0.0;
};

/// Softmax over trainable-cosine scores per candidate set; the free endpoint
/// is the argmax (ties go to the lowest node id). Embeddings must come from
/// the unmasked edges only.
GenerationOutcome generate_edges(const Tensor& h_g, const std::vector<OrientedEdge>& masked,
                                 const std::vector<CandidateSet>& candidates,
                                 const Tensor& w_cos);

/// Same outcome computed from externally supplied scores, one flat vector in
/// candidate-set order. generate_edges delegates here after scoring.
GenerationOutcome generation_from_scores(const Tensor& scores,
                                         const std::vector<OrientedEdge>& masked,
                                         const std::vector<CandidateSet>& candidates);

struct DiscriminationOutcome {
  Tensor loss;
  std::vector<double> probabilities;  // p(edge is generated), input order
  double accuracy = 0.0;
};

/// Binary cross entropy over generated edges (label: generated) and sampled
/// original edges. Embeddings must come from E_u plus E_g. With
/// generated_label_high the paper's sign convention is kept: a high cosine
/// score means "generated".
DiscriminationOutcome discriminate_edges(const Tensor& h_d,
                                         const std::vector<OrientedEdge>& generated,
                                         const std::vector<Edge>& positive_edges,
                                         const Tensor& w_cos, bool generated_label_high = true);

DiscriminationOutcome discrimination_from_scores(const Tensor& scores,
                                                 const std::vector<double>& labels);

/// Linear feature generator: replaces the rows of the selected nodes with
/// W_g^f h_g(n) and returns the squared-error loss over them. The corrupted
/// matrix is detached so the discriminator treats it as data.
struct FeatureGenOutcome {
  Tensor loss;
  Tensor corrupted;
};

FeatureGenOutcome generate_features(const Tensor& h_g, const std::vector<int>& gen_nodes,
                                    const Tensor& w_feat_gen, const Tensor& features);

/// Per-node "was this feature generated" head. When balance is set, original
/// nodes are subsampled to beta * |N_g|; otherwise the loss sums over all
/// nodes as written in the vector-feature formulation.
Tensor discriminate_features(const Tensor& h_d, int num_nodes, const std::vector<int>& gen_nodes,
                             const Tensor& w_feat_disc, bool balance, double beta, Rng& rng);

/// (L_g^e + L_g^f) + lambda * (L_d^e + L_d^f).
Tensor total_loss(const Tensor& gen_edge, const Tensor& gen_feat, const Tensor& disc_edge,
                  const Tensor& disc_feat, double lambda);

struct CoverageStats {
  double mask_ratio = 0.0;
  double accuracy = 0.0;
  double cov_gen = 0.0;
  double cov_dis = 0.0;
  double ratio = 0.0;
};

/// cov_gen = 1 - m, cov_dis = (1 - m) + m * acc, ratio = cov_dis / cov_gen.
CoverageStats coverage_stats(double mask_ratio, double generator_accuracy);

/// Both models plus their heads, living in one ParamStore.
struct DipModels {
  GnnParams gen_gnn;
  GnnParams disc_gnn;
  Tensor gen_cos;
  Tensor disc_cos;
  Tensor feat_gen_w;   // hidden -> feature_dim
  Tensor feat_disc_w;  // hidden -> 1
};

DipModels init_dip_models(ParamStore& store, const TrainConfig& config, int feature_dim,
                          Rng& rng);
DipModels dip_models_from_store(const ParamStore& store, int num_layers);

/// Frozen snapshot of one step's random draws and discrete outputs, enough to
/// rebuild the step loss as a pure function of the parameters. Used by the
/// finite-difference verification.
struct StepRecord {
  int num_nodes = 0;
  Tensor features;            // local rows, constant
  std::vector<Edge> unmasked;
  std::vector<OrientedEdge> masked;
  std::vector<CandidateSet> candidates;
  std::vector<OrientedEdge> generated;
  std::vector<Edge> disc_input_edges;  // dedup of E_u and E_g
  std::vector<Edge> positive_edges;
  std::vector<int> feature_nodes;
  Tensor corrupted_features;  // constant, as seen by the discriminator
  std::vector<int> feat_disc_nodes;
  std::vector<double> feat_disc_labels;
  double lambda = 0.0;
  double total = 0.0;
};

/// One full training step on a sampled subgraph. When `record` is non-null
/// the frozen artifacts are captured and no optimizer update happens.
StepMetrics run_pretrain_step(const TrainConfig& config, const Graph& graph,
                              const std::vector<int>& seed_pool, ParamStore& store,
                              const DipModels& models, Rng& rng, int step,
                              bool update = true, StepRecord* record = nullptr);

/// Rebuilds the recorded step's objective from current parameter values, with
/// every random draw and discrete choice held fixed.
Tensor step_loss_from_record(const StepRecord& record, const DipModels& models);

struct PretrainOutput {
  ParamStore store;
  std::vector<StepMetrics> metrics;
  CheckpointMeta meta;
};

/// Algorithm loop: sample subgraph, mask, generate, corrupt features,
/// discriminate, one joint AdamW step. Seed nodes are drawn uniformly from
/// the graph's non-isolated nodes.
PretrainOutput pretrain(const TrainConfig& config, const Graph& graph);

}  // namespace dipgnn
