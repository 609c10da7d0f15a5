#include "dipgnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "dipgnn/graph.hpp"
#include "dipgnn/pretrain.hpp"

namespace dipgnn {

double GradCheckReport::worst() const {
  double w = 0.0;
  for (const auto& item : items) w = std::max(w, item.max_rel_err);
  return w;
}

bool GradCheckReport::passed(double tolerance) const { return worst() < tolerance; }

double fd_check(const std::vector<Tensor>& params, const std::function<Tensor()>& forward) {
  Tensor loss = forward();
  backward(loss);
  std::vector<std::vector<double>> analytic;
  analytic.reserve(params.size());
  for (const auto& p : params) analytic.push_back(p.grad());

  double max_rel = 0.0;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    Tensor p = params[pi];
    auto& value = p.mutable_value();
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double saved = value[i];
      value[i] = saved + kGradCheckEpsilon;
      const double up = forward().scalar();
      value[i] = saved - kGradCheckEpsilon;
      const double down = forward().scalar();
      value[i] = saved;
      const double fd = (up - down) / (2.0 * kGradCheckEpsilon);
      const double ad = analytic[pi][i];
      const double rel = std::abs(fd - ad) / std::max({std::abs(fd), std::abs(ad), 1e-3});
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

namespace {

Tensor random_param(std::vector<int> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<double> data(static_cast<std::size_t>(n));
  for (auto& v : data) v = lo + (hi - lo) * rng.uniform();
  return Tensor::param(std::move(shape), std::move(data));
}

// Values bounded away from zero, for relu and cosine norms.
Tensor random_param_offset(std::vector<int> shape, Rng& rng) {
  std::int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<double> data(static_cast<std::size_t>(n));
  for (auto& v : data) {
    const double mag = 0.2 + 0.8 * rng.uniform();
    v = rng.uniform() < 0.5 ? -mag : mag;
  }
  return Tensor::param(std::move(shape), std::move(data));
}

}  // namespace

GradCheckReport run_op_gradchecks(std::uint64_t seed) {
  Rng rng(seed);
  GradCheckReport report;
  auto check = [&report](const std::string& name, const std::vector<Tensor>& params,
                         const std::function<Tensor()>& forward) {
    report.items.push_back({name, fd_check(params, forward)});
  };

  {
    Tensor a = random_param({3, 4}, rng);
    Tensor b = random_param({4, 2}, rng);
    check("matmul", {a, b}, [=] { return sum(matmul(a, b)); });
  }
  {
    Tensor a = random_param({3, 4}, rng);
    Tensor b = random_param({3, 2}, rng);
    check("transpose", {a, b}, [=] { return sum(matmul(transpose(a), b)); });
  }
  {
    Tensor a = random_param({3, 3}, rng);
    Tensor b = random_param({3, 3}, rng);
    check("add", {a, b}, [=] { return l2_loss(add(a, b)); });
  }
  {
    Tensor a = random_param({4, 3}, rng);
    Tensor bias = random_param({3}, rng);
    check("add_bias", {a, bias}, [=] { return l2_loss(add(a, bias)); });
  }
  {
    Tensor a = random_param({3, 3}, rng);
    Tensor b = random_param({3, 3}, rng);
    check("sub", {a, b}, [=] { return l2_loss(sub(a, b)); });
  }
  {
    Tensor a = random_param({3, 4}, rng);
    check("scale", {a}, [=] { return l2_loss(scale(a, 1.7)); });
  }
  {
    Tensor a = random_param({3, 2}, rng);
    Tensor b = random_param({3, 3}, rng);
    Tensor w = random_param({5, 2}, rng);
    check("concat", {a, b, w}, [=] { return sum(matmul(concat(a, b), w)); });
  }
  {
    Tensor a = random_param({4, 3}, rng);
    const std::vector<int> rows{2, 0, 2, 1};
    check("row_gather", {a}, [=] { return l2_loss(row_gather(a, rows)); });
  }
  {
    Tensor a = random_param({5, 3}, rng);
    const std::vector<int> segments{0, 2, 0, 2, 1};
    check("segment_mean", {a}, [=] { return l2_loss(segment_mean(a, segments, 4)); });
  }
  {
    Tensor a = random_param_offset({4, 4}, rng);
    check("relu", {a}, [=] { return l2_loss(relu(a)); });
  }
  {
    Tensor a = random_param({4, 4}, rng);
    check("sigmoid", {a}, [=] { return sum(sigmoid(a)); });
  }
  {
    Tensor a = random_param({5, 4}, rng);
    check("dropout", {a}, [=] {
      Rng mask_rng(777);  // same mask on every evaluation
      return l2_loss(dropout(a, 0.4, mask_rng));
    });
  }
  {
    Tensor a = random_param({3, 6}, rng);
    check("reshape", {a}, [=] { return l2_loss(matmul(reshape(a, {2, 9}), transpose(reshape(a, {2, 9})))); });
  }
  {
    Tensor a = random_param_offset({4, 3}, rng);
    Tensor b = random_param_offset({4, 3}, rng);
    check("rowwise_cosine", {a, b}, [=] { return sum(rowwise_cosine(a, b)); });
  }
  {
    Tensor a = random_param({3, 5}, rng);
    Tensor w = random_param({5, 4}, rng);
    const std::vector<int> labels{1, 0, 3};
    check("softmax_cross_entropy", {a, w},
          [=] { return softmax_cross_entropy(matmul(a, w), labels); });
  }
  {
    Tensor s = random_param({7}, rng);
    const std::vector<int> offsets{0, 3, 7};
    const std::vector<int> truth{0, 2};
    check("segment_softmax_cross_entropy", {s},
          [=] { return segment_softmax_cross_entropy(s, offsets, truth); });
  }
  {
    Tensor s = random_param({6}, rng);
    const std::vector<double> labels{1, 0, 1, 1, 0, 0};
    check("binary_cross_entropy_with_logits", {s},
          [=] { return binary_cross_entropy_with_logits(s, labels); });
  }
  {
    Tensor a = random_param({4, 4}, rng);
    check("l2_loss", {a}, [=] { return l2_loss(a); });
  }
  {
    Tensor a = random_param({4, 4}, rng);
    check("sum", {a}, [=] { return sum(a); });
  }
  return report;
}

GradCheckReport run_full_loss_gradcheck(std::uint64_t seed) {
  TrainConfig cfg;
  cfg.graph_source = "sbm";
  cfg.sbm_nodes = 30;
  cfg.sbm_blocks = 3;
  cfg.sbm_p_in = 0.4;
  cfg.sbm_p_out = 0.1;
  cfg.sbm_feature_dim = 6;
  cfg.sbm_noise = 0.5;
  cfg.model_hidden_dim = 8;
  cfg.model_layers = 2;
  cfg.gen_n_neg = 8;
  cfg.mask_edge_ratio = 0.3;
  cfg.mask_feature_ratio = 0.3;
  cfg.disc_alpha = 1.0;
  cfg.lambda = 20.0;
  cfg.pretrain_dropout = 0.0;
  cfg.sampler_depth = 0;  // with every node a seed, the sample is the graph
  cfg.sampler_seed_nodes = cfg.sbm_nodes;
  cfg.seed = seed;

  Graph graph = generate_sbm(cfg.sbm_nodes, cfg.sbm_blocks, cfg.sbm_p_in, cfg.sbm_p_out,
                             cfg.sbm_feature_dim, cfg.sbm_noise, seed);
  Rng rng(seed);
  ParamStore store;
  DipModels models = init_dip_models(store, cfg, graph.feature_dim(), rng);
  std::vector<int> pool;
  for (int v = 0; v < graph.num_nodes(); ++v) pool.push_back(v);

  StepRecord record;
  run_pretrain_step(cfg, graph, pool, store, models, rng, 0, /*update=*/false, &record);

  GradCheckReport report;
  {
    // The rebuilt objective must match the step's value before differencing.
    const double rebuilt = step_loss_from_record(record, models).scalar();
    const double gap =
        std::abs(rebuilt - record.total) / std::max(1.0, std::abs(record.total));
    report.items.push_back({"full_loss_rebuild_consistency", gap < 1e-12 ? 0.0 : gap});
  }
  std::vector<Tensor> params;
  for (const auto& [name, p] : store.params()) params.push_back(p);
  const double rel =
      fd_check(params, [&] { return step_loss_from_record(record, models); });
  report.items.push_back({"full_pretrain_loss", rel});
  return report;
}

}  // namespace dipgnn
