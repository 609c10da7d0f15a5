#include "dipgnn/harness.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace dipgnn {

namespace fs = std::filesystem;

GraphBundle build_graph_bundle(const TrainConfig& config) {
  validate_config(config);
  if (config.graph_source == "sbm") {
    Graph full = generate_sbm(config.sbm_nodes, config.sbm_blocks, config.sbm_p_in,
                              config.sbm_p_out, config.sbm_feature_dim, config.sbm_noise,
                              config.seed);
    SplitResult split = split_nodes(full, config.pretrain_frac, config.seed);
    return GraphBundle{std::move(full), std::move(split)};
  }
  GraphOptions options;
  options.allow_self_loops = config.allow_self_loops;
  Graph full = load_graph(config.edge_list, config.feature_file, config.label_file, options);
  SplitResult split = split_nodes(full, config.pretrain_frac, config.seed);
  return GraphBundle{std::move(full), std::move(split)};
}

namespace {

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create directory '" + dir + "': " + ec.message());
}

void write_result_json(const std::string& path, const TrainConfig& config,
                       const std::string& command, const FinetuneResult& result,
                       const std::string& checkpoint) {
  nlohmann::json j;
  j["schema"] = "dipgnn-result-v1";
  j["command"] = command;
  j["seed"] = config.seed;
  j["config_digest"] = config_digest(config);
  j["task"] = config.finetune_task;
  j["metric"] = result.metric_name;
  j["backbone"] = result.backbone;
  j["valid_metric"] = result.valid_metric;
  j["test_metric"] = result.test_metric;
  j["best_step"] = result.best_step;
  j["checkpoint"] = checkpoint;
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << j.dump() << '\n';
}

FinetuneResult dispatch_finetune(const TrainConfig& config, const Graph& graph,
                                 const NodeSplit& split, const ParamStore* pretrained,
                                 double lambda) {
  if (config.finetune_task == "link-prediction") {
    return finetune_link(config, graph, split, pretrained, lambda);
  }
  return finetune(config, graph, split, pretrained, lambda);
}

}  // namespace

PretrainArtifacts run_pretrain_cmd(const TrainConfig& config, const std::string& out_dir) {
  ensure_dir(out_dir);
  GraphBundle bundle = build_graph_bundle(config);
  PretrainArtifacts art;
  art.output = pretrain(config, bundle.split.pretrain);
  art.checkpoint_path = (fs::path(out_dir) / "checkpoint.bin").string();
  art.metrics_path = (fs::path(out_dir) / "metrics.csv").string();
  save_checkpoint(art.checkpoint_path, art.output.store, art.output.meta);
  write_metrics_csv(art.metrics_path, art.output.metrics, art.output.meta.config_digest);
  return art;
}

FinetuneResult run_finetune_cmd(const TrainConfig& config, const std::string& checkpoint_path,
                                const std::string& out_dir, const std::string& result_name) {
  ensure_dir(out_dir);
  GraphBundle bundle = build_graph_bundle(config);
  FinetuneResult result;
  if (checkpoint_path.empty()) {
    result = dispatch_finetune(config, bundle.split.finetune, bundle.split.split, nullptr, 0.0);
  } else {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint_path);
    if (ckpt.meta.layers != config.model_layers ||
        ckpt.meta.hidden_dim != config.model_hidden_dim) {
      throw DataError("finetune: checkpoint model shape does not match the config");
    }
    result = dispatch_finetune(config, bundle.split.finetune, bundle.split.split, &ckpt.store,
                               ckpt.meta.lambda);
  }
  write_result_json((fs::path(out_dir) / result_name).string(), config,
                    checkpoint_path.empty() ? "finetune-scratch" : "finetune", result,
                    checkpoint_path);
  return result;
}

AggregateCoverage aggregate_coverage(const std::vector<StepMetrics>& metrics) {
  long long edges = 0, masked = 0, correct = 0;
  for (const auto& m : metrics) {
    edges += m.sub_edges;
    masked += m.masked_edges;
    correct += m.masked_correct;
  }
  AggregateCoverage out;
  if (edges == 0) return out;
  const double m = static_cast<double>(masked) / static_cast<double>(edges);
  out.gen_acc = masked == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(masked);
  out.cov_gen = 1.0 - m;
  out.cov_dis = (1.0 - m) + m * out.gen_acc;
  return out;
}

std::vector<SweepRow> run_mask_sweep(const TrainConfig& config,
                                     const std::vector<double>& ratios,
                                     const std::string& out_dir) {
  if (ratios.empty()) throw DataError("mask sweep: no ratios given");
  ensure_dir(out_dir);
  std::vector<SweepRow> rows;
  for (double ratio : ratios) {
    TrainConfig point = config;
    point.mask_edge_ratio = ratio;
    char tag[32];
    std::snprintf(tag, sizeof(tag), "ratio_%g", ratio);
    const std::string point_dir = (fs::path(out_dir) / tag).string();
    PretrainArtifacts art = run_pretrain_cmd(point, point_dir);
    FinetuneResult ft = run_finetune_cmd(point, art.checkpoint_path, point_dir);
    const AggregateCoverage cov = aggregate_coverage(art.output.metrics);
    rows.push_back(SweepRow{ratio, ft.test_metric, cov.cov_gen, cov.cov_dis});
  }
  std::ofstream out(fs::path(out_dir) / "mask_sweep.csv", std::ios::trunc);
  if (!out) throw DataError("mask sweep: cannot write csv");
  out << "# schema=dipgnn-mask-sweep-v1 config=" << config_digest(config) << '\n';
  out << "ratio,test_metric,cov_gen,cov_dis\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", r.ratio, r.test_metric,
                  r.cov_gen, r.cov_dis);
    out << buf;
  }
  return rows;
}

std::vector<CorruptionRow> run_corruption(const TrainConfig& config,
                                          const std::vector<double>& fracs,
                                          const std::string& out_dir) {
  if (fracs.empty()) throw DataError("corruption: no fractions given");
  ensure_dir(out_dir);
  GraphBundle bundle = build_graph_bundle(config);
  PretrainOutput pre = pretrain(config, bundle.split.pretrain);

  std::vector<CorruptionRow> rows;
  for (double frac : fracs) {
    CorruptionRow row;
    row.frac = frac;
    {
      Rng rng(config.seed ^ fnv1a64("drop" + std::to_string(frac)));
      Graph corrupted = corrupt_edges_random(bundle.split.finetune, frac, 0.0, rng);
      row.drop_metric = dispatch_finetune(config, corrupted, bundle.split.split, &pre.store,
                                          config.lambda)
                            .test_metric;
    }
    {
      Rng rng(config.seed ^ fnv1a64("add" + std::to_string(frac)));
      Graph corrupted = corrupt_edges_random(bundle.split.finetune, 0.0, frac, rng);
      row.add_metric = dispatch_finetune(config, corrupted, bundle.split.split, &pre.store,
                                         config.lambda)
                           .test_metric;
    }
    rows.push_back(row);
  }
  std::ofstream out(fs::path(out_dir) / "corruption.csv", std::ios::trunc);
  if (!out) throw DataError("corruption: cannot write csv");
  out << "# schema=dipgnn-corruption-v1 config=" << config_digest(config) << '\n';
  out << "frac,drop_metric,add_metric\n";
  char buf[120];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g\n", r.frac, r.drop_metric, r.add_metric);
    out << buf;
  }
  return rows;
}

VariantResult run_variant(const TrainConfig& config, const std::string& variant,
                          const std::string& out_dir) {
  TrainConfig point = config;
  point.variant = variant;
  validate_config(point);
  const std::string point_dir = (fs::path(out_dir) / ("variant_" + variant)).string();
  PretrainArtifacts art = run_pretrain_cmd(point, point_dir);
  VariantResult out;
  out.finetune = run_finetune_cmd(point, art.checkpoint_path, point_dir,
                                  "variant_" + variant + ".json");
  int steps_with_edges = 0;
  for (const auto& m : art.output.metrics) {
    if (m.masked_edges > 0) {
      out.mean_disc_acc += m.disc_acc;
      out.mean_gen_acc += m.gen_acc;
      ++steps_with_edges;
    }
  }
  if (steps_with_edges > 0) {
    out.mean_disc_acc /= steps_with_edges;
    out.mean_gen_acc /= steps_with_edges;
  }
  return out;
}

void run_gen_sbm(const TrainConfig& config, const std::string& out_dir) {
  validate_config(config);
  ensure_dir(out_dir);
  Graph g = generate_sbm(config.sbm_nodes, config.sbm_blocks, config.sbm_p_in, config.sbm_p_out,
                         config.sbm_feature_dim, config.sbm_noise, config.seed);
  save_graph(g, (fs::path(out_dir) / "edges.tsv").string(),
             (fs::path(out_dir) / "features.csv").string(),
             (fs::path(out_dir) / "labels.csv").string());
}

}  // namespace dipgnn
