#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dipgnn/config.hpp"
#include "dipgnn/finetune.hpp"
#include "dipgnn/graph.hpp"
#include "dipgnn/pretrain.hpp"

namespace dipgnn {

/// The full graph described by the config plus its node-transfer split.
struct GraphBundle {
  Graph full;
  SplitResult split;
};

GraphBundle build_graph_bundle(const TrainConfig& config);

struct PretrainArtifacts {
  std::string checkpoint_path;
  std::string metrics_path;
  PretrainOutput output;
};

/// Pre-trains on the bundle's pre-training graph and writes
/// <out_dir>/checkpoint.bin and <out_dir>/metrics.csv.
PretrainArtifacts run_pretrain_cmd(const TrainConfig& config, const std::string& out_dir);

/// Fine-tunes from a checkpoint file ("" for the from-scratch baseline) and
/// writes a single-line JSON result record.
FinetuneResult run_finetune_cmd(const TrainConfig& config, const std::string& checkpoint_path,
                                const std::string& out_dir,
                                const std::string& result_name = "finetune_result.json");

struct SweepRow {
  double ratio = 0.0;
  double test_metric = 0.0;
  double cov_gen = 0.0;
  double cov_dis = 0.0;
};

/// Pretrain+finetune per mask ratio with a shared seed; writes
/// <out_dir>/mask_sweep.csv. Coverage columns aggregate masked/recovered edge
/// counts over the whole run, so the coverage identity holds exactly.
std::vector<SweepRow> run_mask_sweep(const TrainConfig& config,
                                     const std::vector<double>& ratios,
                                     const std::string& out_dir);

struct CorruptionRow {
  double frac = 0.0;
  double drop_metric = 0.0;
  double add_metric = 0.0;
};

/// Pre-trains once on the clean graph, then fine-tunes on copies of the
/// fine-tuning graph with edges dropped vs wrong edges added; writes
/// <out_dir>/corruption.csv.
std::vector<CorruptionRow> run_corruption(const TrainConfig& config,
                                          const std::vector<double>& fracs,
                                          const std::string& out_dir);

struct VariantResult {
  FinetuneResult finetune;
  double mean_disc_acc = 0.0;  // over pre-training steps with edge batches
  double mean_gen_acc = 0.0;
};

/// Runs one model variant end to end (pretrain + finetune).
VariantResult run_variant(const TrainConfig& config, const std::string& variant,
                          const std::string& out_dir);

/// Writes the SBM graph described by the config as edge/feature/label files.
void run_gen_sbm(const TrainConfig& config, const std::string& out_dir);

/// Aggregate coverage over a run: totals of masked and exactly recovered
/// edges against total induced edges.
struct AggregateCoverage {
  double cov_gen = 1.0;
  double cov_dis = 1.0;
  double gen_acc = 0.0;
};

AggregateCoverage aggregate_coverage(const std::vector<StepMetrics>& metrics);

}  // namespace dipgnn
