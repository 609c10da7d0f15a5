#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "dipgnn/config.hpp"
#include "dipgnn/errors.hpp"
#include "dipgnn/harness.hpp"
#include "dipgnn/metrics.hpp"

using namespace dipgnn;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "dipgnn_config_test";
  fs::create_directories(dir);
  return dir;
}

TrainConfig tiny_run_config() {
  TrainConfig cfg;
  cfg.sbm_nodes = 260;
  cfg.sbm_blocks = 4;
  cfg.sbm_p_in = 0.1;
  cfg.sbm_p_out = 0.012;
  cfg.sbm_feature_dim = 8;
  cfg.sbm_noise = 0.5;
  cfg.model_hidden_dim = 16;
  cfg.model_layers = 2;
  cfg.sampler_depth = 2;
  cfg.sampler_width = 24;
  cfg.sampler_seed_nodes = 12;
  cfg.gen_n_neg = 15;
  cfg.pretrain_steps = 8;
  cfg.finetune_steps = 10;
  cfg.eval_every = 5;
  cfg.seed = 21;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config save and load round-trips losslessly") {
  TrainConfig cfg;
  cfg.mask_edge_ratio = 0.12345678901234567;
  cfg.lambda = 19.999999999999996;
  cfg.seed = 18446744073709551615ull;
  cfg.variant = "random-edges";
  cfg.disc_feature_balance = false;
  const std::string path = (scratch_dir() / "roundtrip.ini").string();
  save_config(cfg, path);
  TrainConfig back = load_config(path);
  CHECK(back == cfg);
  CHECK(config_digest(back) == config_digest(cfg));
}

TEST_CASE("defaults carry the published pre-training recipe") {
  TrainConfig cfg;
  CHECK(cfg.mask_edge_ratio == 0.2);
  CHECK(cfg.mask_feature_ratio == 0.2);
  CHECK(cfg.gen_n_neg == 255);  // 256 candidates with the truth included
  CHECK(cfg.disc_alpha == 1.0);
  CHECK(cfg.lambda == 20.0);
  CHECK(cfg.pretrain_lr == 0.001);
  CHECK(cfg.beta1 == 0.9);
  CHECK(cfg.beta2 == 0.999);
  CHECK(cfg.pretrain_eps == 1e-8);
  CHECK(cfg.weight_decay == 0.01);
  CHECK(cfg.pretrain_dropout == 0.2);
  CHECK(cfg.pretrain_clip == 0.5);
  CHECK(cfg.finetune_lr == 0.0015);
  CHECK(cfg.finetune_dropout == 0.3);
  CHECK(cfg.finetune_eps == 1e-6);
  CHECK(cfg.finetune_weight_decay == 0.0);
  validate_config(cfg);
}

TEST_CASE("unknown keys and malformed values are flagged with their line") {
  const std::string path = (scratch_dir() / "bad.ini").string();
  {
    std::ofstream out(path, std::ios::trunc);
    out << "[mask]\nedge_ratio = 0.2\nnonsense_key = 1\n";
  }
  try {
    load_config(path);
    FAIL("expected a config error");
  } catch (const DataError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(":3") != std::string::npos);
    CHECK(msg.find("nonsense_key") != std::string::npos);
  }
  {
    std::ofstream out(path, std::ios::trunc);
    out << "[mask]\nedge_ratio = not-a-number\n";
  }
  CHECK_THROWS_AS(load_config(path), DataError);
}

TEST_CASE("environment variables override file values") {
  TrainConfig cfg;
  cfg.mask_edge_ratio = 0.2;
  const std::string path = (scratch_dir() / "env.ini").string();
  save_config(cfg, path);
  setenv("DIPGNN_MASK_EDGE_RATIO", "0.35", 1);
  setenv("DIPGNN_SAMPLER_DEPTH", "5", 1);
  TrainConfig loaded = load_config(path);
  unsetenv("DIPGNN_MASK_EDGE_RATIO");
  unsetenv("DIPGNN_SAMPLER_DEPTH");
  CHECK(loaded.mask_edge_ratio == 0.35);
  CHECK(loaded.sampler_depth == 5);
}

TEST_CASE("digest reacts to any field change") {
  TrainConfig a;
  TrainConfig b;
  CHECK(config_digest(a) == config_digest(b));
  b.lambda = 19.0;
  CHECK(config_digest(a) != config_digest(b));
  TrainConfig c;
  c.seed = 1;
  CHECK(config_digest(a) != config_digest(c));
}

TEST_CASE("validation rejects out-of-range fields") {
  TrainConfig cfg;
  cfg.mask_edge_ratio = 1.0;
  CHECK_THROWS_AS(validate_config(cfg), DataError);
  cfg = TrainConfig{};
  cfg.sbm_p_out = 0.5;
  cfg.sbm_p_in = 0.1;
  CHECK_THROWS_AS(validate_config(cfg), DataError);
  cfg = TrainConfig{};
  cfg.variant = "everything";
  CHECK_THROWS_AS(validate_config(cfg), DataError);
  cfg = TrainConfig{};
  cfg.finetune_task = "clustering";
  CHECK_THROWS_AS(validate_config(cfg), DataError);
}

TEST_CASE("metrics csv round-trips through its reader") {
  std::vector<StepMetrics> rows(3);
  rows[0].step = 0;
  rows[0].gen_edge_loss = 12.345678901234567;
  rows[0].cov_dis = 0.9;
  rows[1].step = 1;
  rows[1].gen_acc = 0.125;
  rows[1].masked_edges = 17;
  rows[2].step = 2;
  rows[2].cov_dis_recount = 1.0 / 3.0;
  const std::string path = (scratch_dir() / "metrics.csv").string();
  write_metrics_csv(path, rows, "0123456789abcdef");
  const auto back = read_metrics_csv(path);
  REQUIRE(back.size() == 3);
  CHECK(back[0].gen_edge_loss == rows[0].gen_edge_loss);
  CHECK(back[1].gen_acc == rows[1].gen_acc);
  CHECK(back[1].masked_edges == 17);
  CHECK(back[2].cov_dis_recount == rows[2].cov_dis_recount);
}

TEST_CASE("pretrain artifacts are reproducible byte for byte") {
  TrainConfig cfg = tiny_run_config();
  const std::string d1 = (scratch_dir() / "rep1").string();
  const std::string d2 = (scratch_dir() / "rep2").string();
  run_pretrain_cmd(cfg, d1);
  run_pretrain_cmd(cfg, d2);
  CHECK(slurp(d1 + "/metrics.csv") == slurp(d2 + "/metrics.csv"));
  CHECK(slurp(d1 + "/checkpoint.bin") == slurp(d2 + "/checkpoint.bin"));
  CHECK(!slurp(d1 + "/metrics.csv").empty());
}

TEST_CASE("finetune records carry the digest and metric") {
  TrainConfig cfg = tiny_run_config();
  const std::string dir = (scratch_dir() / "ft").string();
  const auto art = run_pretrain_cmd(cfg, dir);
  const auto result = run_finetune_cmd(cfg, art.checkpoint_path, dir);
  const std::string record = slurp(dir + "/finetune_result.json");
  CHECK(record.find("dipgnn-result-v1") != std::string::npos);
  CHECK(record.find(config_digest(cfg)) != std::string::npos);
  CHECK(record.find("micro_f1") != std::string::npos);
  CHECK(result.backbone == "disc");
}

TEST_CASE("mask sweep rows satisfy the coverage identity exactly") {
  TrainConfig cfg = tiny_run_config();
  const std::string dir = (scratch_dir() / "sweep").string();
  const auto rows = run_mask_sweep(cfg, {0.2}, dir);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].cov_dis >= rows[0].cov_gen);
  // re-derive from the run's own metrics file
  const auto metrics = read_metrics_csv(dir + "/ratio_0.2/metrics.csv");
  const auto agg = aggregate_coverage(metrics);
  CHECK(rows[0].cov_gen == agg.cov_gen);
  CHECK(rows[0].cov_dis == agg.cov_dis);
  CHECK(agg.cov_dis == doctest::Approx((1.0 - (1.0 - agg.cov_gen)) +
                                       (1.0 - agg.cov_gen) * agg.gen_acc)
                           .epsilon(1e-12));
}

TEST_CASE("checkpoint and config shape mismatches are rejected at finetune") {
  TrainConfig cfg = tiny_run_config();
  const std::string dir = (scratch_dir() / "mismatch").string();
  const auto art = run_pretrain_cmd(cfg, dir);
  TrainConfig other = cfg;
  other.model_hidden_dim = 32;
  CHECK_THROWS_AS(run_finetune_cmd(other, art.checkpoint_path, dir), DataError);
}

TEST_CASE("gen-sbm writes a reloadable graph") {
  TrainConfig cfg = tiny_run_config();
  const std::string dir = (scratch_dir() / "gen").string();
  run_gen_sbm(cfg, dir);
  Graph g = load_graph(dir + "/edges.tsv", dir + "/features.csv", dir + "/labels.csv");
  CHECK(g.num_nodes() == cfg.sbm_nodes);
  CHECK(g.feature_dim() == cfg.sbm_feature_dim);
  CHECK(g.has_labels());
}
