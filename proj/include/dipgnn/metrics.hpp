#pragma once

#include <string>
#include <vector>

namespace dipgnn {

/// One pre-training step. Losses are the summed objectives; coverage values
/// are exact per-step identities plus an independent recount of true edges
/// in the discriminator's input graph.
struct StepMetrics {
  int step = 0;
  double gen_edge_loss = 0.0;
  double gen_feat_loss = 0.0;
  double disc_edge_loss = 0.0;
  double disc_feat_loss = 0.0;
  double total_loss = 0.0;
  double gen_acc = 0.0;
  double disc_acc = 0.0;
  double cov_gen = 0.0;
  double cov_dis = 0.0;
  double cov_dis_recount = 0.0;
  int sub_nodes = 0;
  int sub_edges = 0;
  int masked_edges = 0;
  int masked_correct = 0;
  int seed_nodes = 0;
};

void write_metrics_csv(const std::string& path, const std::vector<StepMetrics>& rows,
                       const std::string& config_digest);

std::vector<StepMetrics> read_metrics_csv(const std::string& path);

}  // namespace dipgnn
