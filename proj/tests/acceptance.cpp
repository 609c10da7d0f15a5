// Acceptance suite: one self-contained check per criterion, each printing a
// single PASS/FAIL line. Heavy criteria run real pretrain+finetune pipelines
// on the bundled configs.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dipgnn/finetune.hpp"
#include "dipgnn/gradcheck.hpp"
#include "dipgnn/harness.hpp"
#include "dipgnn/pretrain.hpp"

#ifndef DIPGNN_CONFIG_DIR
#define DIPGNN_CONFIG_DIR "configs"
#endif

namespace fs = std::filesystem;
using namespace dipgnn;

namespace {

struct Outcome {
  int criterion = 0;
  bool pass = false;
  std::string detail;
};

std::string config_path(const std::string& name) {
  return (fs::path(DIPGNN_CONFIG_DIR) / name).string();
}

fs::path work_dir(const std::string& tag) {
  const auto dir = fs::temp_directory_path() / "dipgnn_acceptance" / tag;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string fmt(const char* format, ...) {
  char buf[1024];
  va_list args;
  va_start(args, format);
  std::vsnprintf(buf, sizeof(buf), format, args);
  va_end(args);
  return buf;
}

long long round2_cents(double v) { return std::llround(v * 100.0); }

// --- criterion 1: coverage identities ---------------------------------------

Outcome criterion_coverage() {
  Outcome out{1, true, ""};
  struct Row {
    double mask, acc;
    long long gen_c, dis_c, ratio_c;
  };
  // expected (cov_gen, cov_dis, ratio) at 2-decimal rounding; the published
  // ratio column divides the already-rounded coverages
  const std::vector<Row> rows{{0.20, 0.50, 80, 90, 113},
                              {0.80, 0.33, 20, 46, 230},
                              {0.95, 0.20, 5, 24, 480}};
  for (const auto& row : rows) {
    const CoverageStats s = coverage_stats(row.mask, row.acc);
    const long long gen_c = round2_cents(s.cov_gen);
    const long long dis_c = round2_cents(s.cov_dis);
    const long long ratio_c = round2_cents((static_cast<double>(dis_c) / 100.0) /
                                           (static_cast<double>(gen_c) / 100.0));
    if (gen_c != row.gen_c || dis_c != row.dis_c || ratio_c != row.ratio_c) {
      out.pass = false;
      out.detail += fmt("row m=%.2f mismatch (%lld,%lld,%lld); ", row.mask, gen_c, dis_c,
                        ratio_c);
    }
  }

  TrainConfig cfg = load_config(config_path("sbm_desk.ini"));
  cfg.pretrain_steps = 500;
  const auto dir = work_dir("c1");
  const PretrainArtifacts art = run_pretrain_cmd(cfg, dir.string());
  double worst = 0.0;
  for (const auto& m : art.output.metrics) {
    worst = std::max(worst, std::abs(m.cov_dis - m.cov_dis_recount));
  }
  if (worst > 1e-9) {
    out.pass = false;
    out.detail += fmt("recount deviation %.3e > 1e-9; ", worst);
  } else {
    out.detail += fmt("3 analytic rows ok; 500-step recount deviation %.3e", worst);
  }
  return out;
}

// --- criterion 2: gradient verification --------------------------------------

Outcome criterion_gradients() {
  Outcome out{2, true, ""};
  GradCheckReport report = run_op_gradchecks();
  const GradCheckReport full = run_full_loss_gradcheck();
  report.items.insert(report.items.end(), full.items.begin(), full.items.end());
  double worst = 0.0;
  std::string worst_name;
  for (const auto& item : report.items) {
    if (item.max_rel_err > worst) {
      worst = item.max_rel_err;
      worst_name = item.name;
    }
    if (item.max_rel_err >= kGradCheckTolerance) out.pass = false;
  }
  out.detail = fmt("%zu checks, worst %.3e (%s), tolerance 1e-4", report.items.size(), worst,
                   worst_name.c_str());
  return out;
}

// --- criterion 3: invariant suite --------------------------------------------

struct TinyTrial {
  Graph graph;
  ParamStore store;
  DipModels models;
  StepRecord record;
  StepMetrics metrics;
};

TinyTrial make_tiny_trial(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.sbm_nodes = 28;
  cfg.sbm_blocks = 3;
  cfg.sbm_p_in = 0.45;
  cfg.sbm_p_out = 0.1;
  cfg.sbm_feature_dim = 6;
  cfg.sbm_noise = 0.4;
  cfg.model_hidden_dim = 8;
  cfg.model_layers = 2;
  cfg.sampler_depth = 0;
  cfg.sampler_seed_nodes = cfg.sbm_nodes;
  cfg.gen_n_neg = 6;
  cfg.mask_edge_ratio = 0.3;
  cfg.mask_feature_ratio = 0.3;
  cfg.pretrain_dropout = 0.0;
  cfg.lambda = 20.0;
  cfg.seed = seed;
  TinyTrial t{generate_sbm(cfg.sbm_nodes, cfg.sbm_blocks, cfg.sbm_p_in, cfg.sbm_p_out,
                           cfg.sbm_feature_dim, cfg.sbm_noise, seed),
              {}, {}, {}, {}};
  Rng rng(seed);
  t.models = init_dip_models(t.store, cfg, t.graph.feature_dim(), rng);
  std::vector<int> pool(static_cast<std::size_t>(t.graph.num_nodes()));
  std::iota(pool.begin(), pool.end(), 0);
  t.metrics =
      run_pretrain_step(cfg, t.graph, pool, t.store, t.models, rng, 0, false, &t.record);
  return t;
}

Outcome criterion_invariants() {
  Outcome out{3, true, ""};
  const int trials = 1000;
  int failures = 0;
  std::string first_failure;
  auto expect = [&](bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      if (first_failure.empty()) first_failure = what;
    }
  };

  // masked-view partition exactness
  {
    Rng rng(101);
    for (int t = 0; t < trials; ++t) {
      Graph g = generate_sbm(20 + rng.uniform_int(40), 3, 0.3, 0.08, 4, 0.2, 5000 + t);
      MaskedView v = mask_edges(g, 0.75 * rng.uniform(), rng);
      std::set<Edge> uni(v.unmasked.begin(), v.unmasked.end());
      bool ok = uni.size() == v.unmasked.size();
      for (const auto& e : v.masked) {
        ok = ok && uni.insert(canonical_edge(e.free_node, e.fixed_node)).second;
      }
      ok = ok && uni == std::set<Edge>(g.edges().begin(), g.edges().end());
      expect(ok, "mask partition");
    }
  }

  // generation: |E_g| = |E_m| with fixed endpoints preserved
  for (int t = 0; t < trials; ++t) {
    TinyTrial trial = make_tiny_trial(20000 + t);
    bool ok = trial.record.generated.size() == trial.record.masked.size();
    for (std::size_t i = 0; ok && i < trial.record.masked.size(); ++i) {
      ok = trial.record.generated[i].fixed_node == trial.record.masked[i].fixed_node;
    }
    expect(ok, "generated set alignment");
    // candidate validity against the adjacency oracle of the local graph
    Graph local(trial.record.num_nodes, trial.record.unmasked.empty()
                                            ? std::vector<Edge>{}
                                            : [&] {
                                                std::vector<Edge> all = trial.record.unmasked;
                                                for (const auto& me : trial.record.masked) {
                                                  all.push_back(canonical_edge(me.free_node,
                                                                               me.fixed_node));
                                                }
                                                std::sort(all.begin(), all.end());
                                                return all;
                                              }());
    bool cand_ok = true;
    for (const auto& c : trial.record.candidates) {
      for (int neg : c.negatives) {
        cand_ok = cand_ok && !local.has_edge(neg, c.fixed_node) && neg != c.true_node &&
                  neg != c.fixed_node;
      }
    }
    expect(cand_ok, "candidate non-adjacency");
  }

  // candidate count equals n_neg + 1 when enough non-neighbors exist
  {
    Rng rng(303);
    for (int t = 0; t < trials; ++t) {
      Graph g = generate_sbm(30 + rng.uniform_int(30), 3, 0.25, 0.05, 4, 0.2, 7000 + t);
      MaskedView v = mask_edges(g, 0.4, rng);
      if (v.masked.empty()) continue;
      const auto& me = v.masked[rng.uniform_int(static_cast<int>(v.masked.size()))];
      const int avail = g.num_nodes() - 1 - g.degree(me.fixed_node);
      const int n_neg = std::min(8, avail);
      CandidateSet c = sample_negatives(g, me, n_neg, rng);
      expect(c.total() == n_neg + 1, "candidate count");
    }
  }

  // cosine bound
  {
    Rng rng(404);
    for (int t = 0; t < trials; ++t) {
      const int d = 2 + rng.uniform_int(6);
      std::vector<double> u(d), v(d), w(static_cast<std::size_t>(d) * d);
      for (auto& x : u) x = rng.normal(0.0, 2.0);
      for (auto& x : v) x = rng.normal(0.0, 2.0);
      for (auto& x : w) x = rng.normal(0.0, 2.0);
      const double s = cosine_score(Tensor::constant({d}, u), Tensor::constant({d}, v),
                                    Tensor::constant({d, d}, w))
                           .scalar();
      expect(std::abs(s) <= 1.0 + 1e-6, "cosine bound");
    }
  }

  // softmax normalization
  {
    Rng rng(505);
    for (int t = 0; t < trials; ++t) {
      const int c = 2 + rng.uniform_int(8);
      std::vector<double> z(static_cast<std::size_t>(c));
      for (auto& x : z) x = rng.normal(0.0, 4.0);
      const auto p = row_softmax(Tensor::constant({1, c}, z));
      double total = 0.0;
      for (double x : p) total += x;
      expect(std::abs(total - 1.0) <= 1e-6, "softmax normalization");
    }
  }

  // permutation equivariance, exact
  {
    Rng rng(606);
    for (int t = 0; t < trials; ++t) {
      const int n = 10 + rng.uniform_int(20);
      Graph g = generate_sbm(n, 2, 0.4, 0.15, 4, 0.5, 9000 + t);
      ParamStore store;
      GnnParams params = init_gnn_params(store, "t", 4, 6, 2, rng);
      std::vector<double> x(static_cast<std::size_t>(n) * 4);
      for (auto& v : x) v = rng.normal();
      Tensor h = gnn_forward(n, g.edges(), Tensor::constant({n, 4}, x), params);

      std::vector<int> perm(static_cast<std::size_t>(n));
      std::iota(perm.begin(), perm.end(), 0);
      rng.shuffle(perm);
      std::vector<Edge> pe;
      for (const auto& e : g.edges()) pe.push_back(canonical_edge(perm[e.src], perm[e.dst]));
      std::sort(pe.begin(), pe.end());
      std::vector<double> px(x.size());
      for (int v = 0; v < n; ++v) {
        for (int j = 0; j < 4; ++j) {
          px[static_cast<std::size_t>(perm[v]) * 4 + j] =
              x[static_cast<std::size_t>(v) * 4 + j];
        }
      }
      Tensor h2 = gnn_forward(n, pe, Tensor::constant({n, 4}, px), params);
      bool ok = true;
      for (int v = 0; v < n && ok; ++v) {
        for (int j = 0; j < 6 && ok; ++j) ok = h.at(v, j) == h2.at(perm[v], j);
      }
      expect(ok, "permutation equivariance");
    }
  }

  // gradient isolation: the discriminator loss reaches no generator parameter
  for (int t = 0; t < trials; ++t) {
    TinyTrial trial = make_tiny_trial(40000 + t);
    if (trial.record.generated.empty() && trial.record.positive_edges.empty()) continue;
    trial.store.zero_grad();
    Tensor h_d = gnn_forward(trial.record.num_nodes, trial.record.disc_input_edges,
                             trial.record.corrupted_features, trial.models.disc_gnn);
    std::vector<int> src, dst;
    std::vector<double> labels;
    for (const auto& e : trial.record.generated) {
      src.push_back(e.free_node);
      dst.push_back(e.fixed_node);
      labels.push_back(1.0);
    }
    for (const auto& e : trial.record.positive_edges) {
      src.push_back(e.src);
      dst.push_back(e.dst);
      labels.push_back(0.0);
    }
    Tensor scores = cosine_scores_rows(row_gather(h_d, src), row_gather(h_d, dst),
                                       trial.models.disc_cos);
    Tensor disc_loss = binary_cross_entropy_with_logits(scores, labels);
    Tensor full = trial.record.feat_disc_nodes.empty()
                      ? disc_loss
                      : add(disc_loss, binary_cross_entropy_with_logits(
                                           matmul(row_gather(h_d, trial.record.feat_disc_nodes),
                                                  trial.models.feat_disc_w),
                                           trial.record.feat_disc_labels));
    backward(scale(full, 20.0));
    bool ok = true;
    for (const auto& [name, p] : trial.store.params()) {
      if (name.rfind("gen.", 0) == 0) {
        for (double g : p.grad()) ok = ok && g == 0.0;
      }
    }
    expect(ok, "gradient isolation");
  }

  out.pass = failures == 0;
  out.detail = failures == 0
                   ? fmt("7 invariant families x %d trials, zero failures", trials)
                   : fmt("%d failures, first: %s", failures, first_failure.c_str());
  return out;
}

// --- criteria 4-6: downstream runs -------------------------------------------

struct ArmResult {
  double dip = 0.0;
  double gen_only = 0.0;
  double scratch = 0.0;
};

ArmResult run_arms(const TrainConfig& base, const fs::path& dir, std::uint64_t seed) {
  TrainConfig cfg = base;
  cfg.seed = seed;
  ArmResult arm;
  {
    const auto d = dir / fmt("dip_s%llu", static_cast<unsigned long long>(seed));
    const PretrainArtifacts art = run_pretrain_cmd(cfg, d.string());
    arm.dip = run_finetune_cmd(cfg, art.checkpoint_path, d.string()).test_metric;
  }
  {
    TrainConfig gen_cfg = cfg;
    gen_cfg.lambda = 0.0;
    const auto d = dir / fmt("gen_s%llu", static_cast<unsigned long long>(seed));
    const PretrainArtifacts art = run_pretrain_cmd(gen_cfg, d.string());
    arm.gen_only = run_finetune_cmd(gen_cfg, art.checkpoint_path, d.string()).test_metric;
  }
  {
    const auto d = dir / fmt("no_s%llu", static_cast<unsigned long long>(seed));
    arm.scratch = run_finetune_cmd(cfg, "", d.string()).test_metric;
  }
  return arm;
}

Outcome criterion_downstream() {
  Outcome out{4, true, ""};
  const TrainConfig base = load_config(config_path("sbm_desk.ini"));
  const auto dir = work_dir("c4");
  double dip = 0.0, gen = 0.0, no = 0.0;
  int dip_wins = 0;
  std::string rows;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const ArmResult arm = run_arms(base, dir, seed);
    dip += arm.dip;
    gen += arm.gen_only;
    no += arm.scratch;
    dip_wins += arm.dip > arm.scratch ? 1 : 0;
    rows += fmt("[s%llu %.3f/%.3f/%.3f] ", static_cast<unsigned long long>(seed), arm.dip,
                arm.gen_only, arm.scratch);
  }
  dip /= 5.0;
  gen /= 5.0;
  no /= 5.0;
  // one-sided sign test at alpha 0.05 with n = 5 needs every pair in favor
  const bool sign_test = dip_wins == 5;
  const bool ordering = dip > gen && gen > no;
  const bool gap = dip - no >= 0.02;
  out.pass = ordering && gap && sign_test;
  out.detail = fmt("means dip=%.4f gen-only=%.4f scratch=%.4f, dip-scratch=%.4f, "
                   "dip>scratch in %d/5 seeds; %s",
                   dip, gen, no, dip - no, dip_wins, rows.c_str());
  return out;
}

Outcome criterion_corruption() {
  Outcome out{5, true, ""};
  const TrainConfig base = load_config(config_path("sbm_desk.ini"));
  const auto dir = work_dir("c5");
  int favorable = 0;
  std::string rows;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    TrainConfig cfg = base;
    cfg.seed = seed;
    const auto seed_dir = dir / fmt("s%llu", static_cast<unsigned long long>(seed));
    fs::create_directories(seed_dir);
    const auto corr = run_corruption(cfg, {0.5}, seed_dir.string());
    favorable += corr[0].drop_metric < corr[0].add_metric ? 1 : 0;
    rows += fmt("[s%llu drop=%.3f add=%.3f] ", static_cast<unsigned long long>(seed),
                corr[0].drop_metric, corr[0].add_metric);
  }
  out.pass = favorable >= 4;
  out.detail = fmt("drop<add in %d/5 seeds at 50%% corruption; %s", favorable, rows.c_str());
  return out;
}

Outcome criterion_mask_sweep() {
  Outcome out{6, true, ""};
  const TrainConfig base = load_config(config_path("sbm_desk.ini"));
  const auto dir = work_dir("c6");
  int favorable = 0;
  std::string rows;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    double drop_dip = 0.0, drop_gen = 0.0;
    for (const bool generator_only : {false, true}) {
      TrainConfig cfg = base;
      cfg.seed = seed;
      if (generator_only) cfg.lambda = 0.0;
      double low = 0.0, high = 0.0;
      for (const double ratio : {0.2, 0.8}) {
        TrainConfig point = cfg;
        point.mask_edge_ratio = ratio;
        const auto d = dir / fmt("%s_s%llu_m%.0f", generator_only ? "gen" : "dip",
                                 static_cast<unsigned long long>(seed), ratio * 100);
        const PretrainArtifacts art = run_pretrain_cmd(point, d.string());
        const double metric = run_finetune_cmd(point, art.checkpoint_path, d.string())
                                  .test_metric;
        (ratio == 0.2 ? low : high) = metric;
      }
      (generator_only ? drop_gen : drop_dip) = low - high;
    }
    favorable += drop_gen > drop_dip ? 1 : 0;
    rows += fmt("[s%llu dip_drop=%.3f gen_drop=%.3f] ",
                static_cast<unsigned long long>(seed), drop_dip, drop_gen);
  }
  out.pass = favorable >= 4;
  out.detail =
      fmt("generator-only degrades more in %d/5 seeds (m 0.2 to 0.8); %s", favorable,
          rows.c_str());
  return out;
}

// --- criterion 7: generator learnability --------------------------------------

Outcome criterion_generator() {
  Outcome out{7, true, ""};
  TrainConfig cfg = load_config(config_path("sbm_fineblocks.ini"));
  const auto dir = work_dir("c7");
  const PretrainArtifacts art = run_pretrain_cmd(cfg, dir.string());
  const auto& metrics = art.output.metrics;
  const int tail = std::min<int>(100, static_cast<int>(metrics.size()));
  double acc = 0.0;
  long long masked = 0, correct = 0;
  for (int i = 0; i < tail; ++i) {
    const auto& m = metrics[metrics.size() - 1 - i];
    masked += m.masked_edges;
    correct += m.masked_correct;
  }
  acc = masked > 0 ? static_cast<double>(correct) / static_cast<double>(masked) : 0.0;
  out.pass = acc >= 0.10;
  out.detail = fmt("top-1 accuracy %.4f over the final %d steps (threshold 0.10, floor "
                   "1/256 = 0.0039)",
                   acc, tail);
  return out;
}

// --- criterion 8: MRR oracle ---------------------------------------------------

Outcome criterion_mrr() {
  Outcome out{8, true, ""};
  const int n_cand = 256;
  double harmonic = 0.0, second = 0.0;
  for (int r = 1; r <= n_cand; ++r) {
    harmonic += 1.0 / r;
    second += 1.0 / (static_cast<double>(r) * r);
  }
  const double expected = harmonic / n_cand;
  const double variance = second / n_cand - expected * expected;

  std::vector<Edge> edges{{0, 1}};
  Graph g(400, std::move(edges));
  const std::vector<OrientedEdge> eval_edges{{1, 0}};

  Rng neg_rng(11);
  auto oracle = [](int cand, int) { return cand == 1 ? 1.0 : 0.0; };
  const double oracle_mrr = eval_link_mrr(oracle, g, eval_edges, n_cand - 1, neg_rng);

  const int trials = 10000;
  Rng score_rng(12);
  Rng trial_rng(13);
  double total = 0.0;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> memo(400, -1.0);
    auto random_scorer = [&](int cand, int) {
      if (memo[cand] < 0.0) memo[cand] = score_rng.uniform();
      return memo[cand];
    };
    total += eval_link_mrr(random_scorer, g, eval_edges, n_cand - 1, trial_rng);
  }
  const double mean = total / trials;
  const double se = std::sqrt(variance / trials);
  const bool random_ok = std::abs(mean - expected) <= 3.0 * se;
  out.pass = oracle_mrr == 1.0 && random_ok;
  out.detail = fmt("oracle MRR %.6f (expect 1 exactly); random MRR %.6f vs %.6f "
                   "(|diff| %.2e <= 3se %.2e)",
                   oracle_mrr, mean, expected, std::abs(mean - expected), 3.0 * se);
  return out;
}

// --- criterion 9: byte-identical reruns ----------------------------------------

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("acceptance: cannot read " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

Outcome criterion_determinism() {
  Outcome out{9, true, ""};
  const char* bin = std::getenv("DIPGNN_BIN");
  if (bin == nullptr) {
    out.pass = false;
    out.detail = "DIPGNN_BIN is not set; cannot invoke the CLI";
    return out;
  }
  const auto dir = work_dir("c9");
  const std::string cfg = config_path("tiny.ini");
  auto run = [&](const std::string& args) {
    const std::string cmd = std::string(bin) + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str());
  };

  std::string detail;
  bool pass = true;
  for (int i = 1; i <= 2; ++i) {
    const int rc = run(fmt("pretrain --config %s --out-dir %s/pre%d", cfg.c_str(),
                           dir.string().c_str(), i));
    pass = pass && rc == 0;
  }
  const bool pre_same =
      slurp(dir / "pre1" / "metrics.csv") == slurp(dir / "pre2" / "metrics.csv") &&
      slurp(dir / "pre1" / "checkpoint.bin") == slurp(dir / "pre2" / "checkpoint.bin");
  detail += fmt("pretrain rerun %s; ", pre_same ? "byte-identical" : "DIFFERS");
  pass = pass && pre_same;

  for (int i = 1; i <= 2; ++i) {
    const int rc = run(fmt("ablate-corruption --config %s --fracs 0.4 --out-dir %s/corr%d",
                           cfg.c_str(), dir.string().c_str(), i));
    pass = pass && rc == 0;
  }
  const bool corr_same =
      slurp(dir / "corr1" / "corruption.csv") == slurp(dir / "corr2" / "corruption.csv");
  detail += fmt("corruption csv rerun %s; ", corr_same ? "byte-identical" : "DIFFERS");
  pass = pass && corr_same;

  for (int i = 1; i <= 2; ++i) {
    const int rc = run(fmt("gen-sbm --config %s --out-dir %s/gen%d", cfg.c_str(),
                           dir.string().c_str(), i));
    pass = pass && rc == 0;
  }
  const bool gen_same = slurp(dir / "gen1" / "edges.tsv") == slurp(dir / "gen2" / "edges.tsv") &&
                        slurp(dir / "gen1" / "features.csv") ==
                            slurp(dir / "gen2" / "features.csv") &&
                        slurp(dir / "gen1" / "labels.csv") == slurp(dir / "gen2" / "labels.csv");
  detail += fmt("gen-sbm rerun %s", gen_same ? "byte-identical" : "DIFFERS");
  pass = pass && gen_same;

  out.pass = pass;
  out.detail = detail;
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted{1, 2, 3, 4, 5, 6, 7, 8, 9};
  for (int i = 1; i < argc; ++i) {
    if (std::string(argv[i]) == "--criteria" && i + 1 < argc) {
      wanted.clear();
      std::stringstream ss(argv[i + 1]);
      std::string tok;
      while (std::getline(ss, tok, ',')) wanted.insert(std::stoi(tok));
      ++i;
    }
  }

  int failures = 0;
  for (int n : wanted) {
    Outcome out;
    try {
      switch (n) {
        case 1: out = criterion_coverage(); break;
        case 2: out = criterion_gradients(); break;
        case 3: out = criterion_invariants(); break;
        case 4: out = criterion_downstream(); break;
        case 5: out = criterion_corruption(); break;
        case 6: out = criterion_mask_sweep(); break;
        case 7: out = criterion_generator(); break;
        case 8: out = criterion_mrr(); break;
        case 9: out = criterion_determinism(); break;
        default:
          std::printf("criterion %d: FAIL — unknown criterion\n", n);
          ++failures;
          continue;
      }
    } catch (const std::exception& e) {
      std::printf("criterion %d: FAIL — exception: %s\n", n, e.what());
      ++failures;
      continue;
    }
    std::printf("criterion %d: %s — %s\n", out.criterion, out.pass ? "PASS" : "FAIL",
                out.detail.c_str());
    if (!out.pass) ++failures;
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
