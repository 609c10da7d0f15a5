#pragma once

#include <cstdint>
#include <string>

namespace dipgnn {

/// Every hyperparameter of a run. Defaults follow the pre-training recipe:
/// 20% edge and feature masking, 255 negatives (256 candidates including the
/// truth), alpha 1.0, lambda 20, AdamW (lr 1e-3, betas 0.9/0.999, eps 1e-8,
/// weight decay 0.01), dropout 0.2 and gradient clipping at 0.5. Sampler
/// depth/width default to desk scale; fine-tuning defaults mirror the
/// node-classification recipe (lr 0.0015, dropout 0.3, eps 1e-6, no decay).
struct TrainConfig {
  // graph
  std::string graph_source = "sbm";  // sbm | files
  std::string edge_list;
  std::string feature_file;
  std::string label_file;
  int sbm_nodes = 2000;
  int sbm_blocks = 4;
  double sbm_p_in = 0.05;
  double sbm_p_out = 0.005;
  int sbm_feature_dim = 16;
  double sbm_noise = 1.0;
  double pretrain_frac = 0.7;
  bool allow_self_loops = false;

  // mask
  double mask_edge_ratio = 0.2;
  double mask_feature_ratio = 0.2;

  // generator
  int gen_n_neg = 255;

  // discriminator
  double disc_alpha = 1.0;
  double disc_feature_beta = 1.0;
  bool disc_feature_balance = true;
  bool disc_flip_labels = false;

  // sampler
  int sampler_depth = 3;
  int sampler_width = 64;
  int sampler_seed_nodes = 32;

  // model
  int model_hidden_dim = 64;
  int model_layers = 3;

  // pretrain
  int pretrain_steps = 500;
  double lambda = 20.0;
  double pretrain_lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double pretrain_eps = 1e-8;
  double weight_decay = 0.01;
  double pretrain_dropout = 0.2;
  double pretrain_clip = 0.5;
  std::string variant = "edges+features";  // edges+features | edges | features | random-edges

  // finetune
  int finetune_steps = 240;
  double finetune_lr = 0.0015;
  double finetune_eps = 1e-6;
  double finetune_weight_decay = 0.0;
  double finetune_dropout = 0.3;
  double finetune_clip = 0.5;
  int eval_every = 20;
  std::string finetune_backbone = "auto";  // auto | disc | gen
  std::string finetune_task = "node-classification";  // node-classification | link-prediction
  int link_n_neg = 255;
  int link_batch = 64;
  double link_holdout = 0.2;

  // run
  std::uint64_t seed = 0;

  bool operator==(const TrainConfig&) const = default;
};

/// Reads a flat key=value file with [section] headers, then applies
/// environment overrides of the form DIPGNN_<SECTION>_<KEY>.
TrainConfig load_config(const std::string& path);

void save_config(const TrainConfig& config, const std::string& path);

/// Canonical serialization (one key=value per line, fixed order).
std::string serialize_config(const TrainConfig& config);

/// FNV-1a hash of the canonical serialization, as 16 hex digits.
std::string config_digest(const TrainConfig& config);

/// Range checks for every field; throws DataError on the first violation.
void validate_config(const TrainConfig& config);

std::uint64_t fnv1a64(const std::string& text);

}  // namespace dipgnn
