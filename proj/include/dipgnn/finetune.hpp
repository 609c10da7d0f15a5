#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dipgnn/config.hpp"
#include "dipgnn/graph.hpp"
#include "dipgnn/mask.hpp"
#include "dipgnn/optim.hpp"

namespace dipgnn {

struct FinetuneResult {
  double valid_metric = 0.0;
  double test_metric = 0.0;
  int best_step = 0;
  std::string metric_name;
  std::string backbone;
};

/// Fine-tunes the chosen backbone from a pre-training checkpoint (nullptr for
/// a from-scratch baseline) with a fresh classifier head. Selection is by
/// validation micro-F1; the test metric is computed once on the best weights.
FinetuneResult finetune(const TrainConfig& config, const Graph& finetune_graph,
                        const NodeSplit& split, const ParamStore* pretrained,
                        double pretrained_lambda);

/// Link-prediction variant: trains the backbone plus its cosine head to rank
/// the true endpoint of held-out edges among sampled negatives; reports MRR.
FinetuneResult finetune_link(const TrainConfig& config, const Graph& finetune_graph,
                             const NodeSplit& split, const ParamStore* pretrained,
                             double pretrained_lambda);

/// Fraction of matching predictions. Micro-averaged F1 equals accuracy for
/// single-label multi-class prediction.
double eval_micro_f1(const std::vector<int>& predictions, const std::vector<int>& labels);

/// Mean reciprocal rank of the true free endpoint among n_neg sampled
/// non-neighbors of the fixed endpoint. Ties rank the truth last.
double eval_link_mrr(const std::function<double(int candidate, int fixed)>& score,
                     const Graph& graph, const std::vector<OrientedEdge>& eval_edges, int n_neg,
                     Rng& rng);

/// Picks the backbone prefix: explicit setting wins; "auto" fine-tunes the
/// discriminator unless the checkpoint was generator-only (lambda == 0).
std::string resolve_backbone(const std::string& setting, bool has_checkpoint, double lambda);

}  // namespace dipgnn
