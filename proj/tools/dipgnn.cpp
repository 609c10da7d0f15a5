#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dipgnn/config.hpp"
#include "dipgnn/errors.hpp"
#include "dipgnn/gradcheck.hpp"
#include "dipgnn/harness.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::int64_t seed = -1;  // <0 keeps the config's seed
};

dipgnn::TrainConfig load_effective_config(const CommonArgs& args) {
  if (args.config_path.empty()) throw dipgnn::UsageError("--config is required");
  dipgnn::TrainConfig cfg = dipgnn::load_config(args.config_path);
  if (args.seed >= 0) cfg.seed = static_cast<std::uint64_t>(args.seed);
  dipgnn::validate_config(cfg);
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Run configuration file");
  cmd->add_option("--seed", args.seed, "Override the config seed");
  cmd->add_option("--out-dir", args.out_dir, "Output directory");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dipgnn: discriminative pre-training for graph neural networks"};
  app.require_subcommand(1);

  CommonArgs pretrain_args;
  auto* cmd_pretrain = app.add_subcommand("pretrain", "Pre-train on the configured graph");
  add_common(cmd_pretrain, pretrain_args);

  CommonArgs finetune_args;
  std::string checkpoint_path;
  bool scratch = false;
  auto* cmd_finetune = app.add_subcommand("finetune", "Fine-tune from a checkpoint");
  add_common(cmd_finetune, finetune_args);
  cmd_finetune->add_option("--checkpoint", checkpoint_path, "Pre-training checkpoint");
  cmd_finetune->add_flag("--scratch", scratch, "Ignore any checkpoint; train from scratch");

  CommonArgs sweep_args;
  std::vector<double> ratios;
  auto* cmd_sweep = app.add_subcommand("ablate-mask-sweep",
                                       "Pretrain+finetune across mask ratios");
  add_common(cmd_sweep, sweep_args);
  cmd_sweep->add_option("--ratios", ratios, "Mask ratios to sweep")->delimiter(',');

  CommonArgs corruption_args;
  std::vector<double> fracs;
  auto* cmd_corruption = app.add_subcommand(
      "ablate-corruption", "Fine-tune on graphs with dropped vs added wrong edges");
  add_common(cmd_corruption, corruption_args);
  cmd_corruption->add_option("--fracs", fracs, "Corruption fractions")->delimiter(',');

  CommonArgs variant_args;
  std::string variant;
  auto* cmd_variant = app.add_subcommand("variant", "Run one model variant end to end");
  add_common(cmd_variant, variant_args);
  cmd_variant->add_option("--variant", variant,
                          "edges+features | edges | features | random-edges");

  CommonArgs gen_args;
  auto* cmd_gen = app.add_subcommand("gen-sbm", "Write the configured SBM graph to files");
  add_common(cmd_gen, gen_args);

  CommonArgs grad_args;
  auto* cmd_grad = app.add_subcommand("grad-check",
                                      "Verify gradients against finite differences");
  add_common(cmd_grad, grad_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : kExitUsage;
  }

  try {
    if (cmd_pretrain->parsed()) {
      const auto cfg = load_effective_config(pretrain_args);
      const auto art = dipgnn::run_pretrain_cmd(cfg, pretrain_args.out_dir);
      std::printf("checkpoint: %s\nmetrics: %s\n", art.checkpoint_path.c_str(),
                  art.metrics_path.c_str());
    } else if (cmd_finetune->parsed()) {
      const auto cfg = load_effective_config(finetune_args);
      if (scratch) checkpoint_path.clear();
      if (!scratch && checkpoint_path.empty()) {
        throw dipgnn::UsageError("finetune needs --checkpoint or --scratch");
      }
      const auto result =
          dipgnn::run_finetune_cmd(cfg, checkpoint_path, finetune_args.out_dir);
      std::printf("backbone: %s\n%s valid: %.6f test: %.6f (best step %d)\n",
                  result.backbone.c_str(), result.metric_name.c_str(), result.valid_metric,
                  result.test_metric, result.best_step);
    } else if (cmd_sweep->parsed()) {
      const auto cfg = load_effective_config(sweep_args);
      if (ratios.empty()) throw dipgnn::UsageError("--ratios is required");
      const auto rows = dipgnn::run_mask_sweep(cfg, ratios, sweep_args.out_dir);
      for (const auto& r : rows) {
        std::printf("ratio %.3f -> metric %.6f cov_gen %.4f cov_dis %.4f\n", r.ratio,
                    r.test_metric, r.cov_gen, r.cov_dis);
      }
    } else if (cmd_corruption->parsed()) {
      const auto cfg = load_effective_config(corruption_args);
      if (fracs.empty()) throw dipgnn::UsageError("--fracs is required");
      const auto rows = dipgnn::run_corruption(cfg, fracs, corruption_args.out_dir);
      for (const auto& r : rows) {
        std::printf("frac %.3f -> drop %.6f add %.6f\n", r.frac, r.drop_metric, r.add_metric);
      }
    } else if (cmd_variant->parsed()) {
      const auto cfg = load_effective_config(variant_args);
      if (variant.empty()) throw dipgnn::UsageError("--variant is required");
      const auto result = dipgnn::run_variant(cfg, variant, variant_args.out_dir);
      std::printf("variant %s: %s test %.6f (disc acc %.4f, gen acc %.4f)\n", variant.c_str(),
                  result.finetune.metric_name.c_str(), result.finetune.test_metric,
                  result.mean_disc_acc, result.mean_gen_acc);
    } else if (cmd_gen->parsed()) {
      const auto cfg = load_effective_config(gen_args);
      dipgnn::run_gen_sbm(cfg, gen_args.out_dir);
      std::printf("wrote edges.tsv, features.csv, labels.csv under %s\n",
                  gen_args.out_dir.c_str());
    } else if (cmd_grad->parsed()) {
      auto report = dipgnn::run_op_gradchecks();
      const auto full = dipgnn::run_full_loss_gradcheck();
      report.items.insert(report.items.end(), full.items.begin(), full.items.end());
      bool ok = true;
      for (const auto& item : report.items) {
        const bool pass = item.max_rel_err < dipgnn::kGradCheckTolerance;
        ok = ok && pass;
        std::printf("%-36s max rel err %.3e  %s\n", item.name.c_str(), item.max_rel_err,
                    pass ? "ok" : "FAIL");
      }
      if (!ok) {
        throw dipgnn::NumericalError("gradient check failed");
      }
    }
  } catch (const dipgnn::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kExitUsage;
  } catch (const dipgnn::NumericalError& e) {
    std::fprintf(stderr, "numerical error: %s\n", e.what());
    return kExitNumerical;
  } catch (const dipgnn::DataError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return 0;
}
