#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dipgnn/gradcheck.hpp"
#include "dipgnn/optim.hpp"
#include "dipgnn/rng.hpp"
#include "dipgnn/tensor.hpp"

using namespace dipgnn;

TEST_CASE("softmax cross entropy: equal logits give ln k") {
  for (int k : {2, 4, 256}) {
    Tensor logits = Tensor::constant({1, k}, std::vector<double>(k, 0.37));
    Tensor loss = softmax_cross_entropy(logits, {0});
    CHECK(loss.scalar() == doctest::Approx(std::log(static_cast<double>(k))).epsilon(1e-12));
  }
}

TEST_CASE("softmax rows sum to one") {
  Rng rng(11);
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 1 + rng.uniform_int(5);
    const int c = 2 + rng.uniform_int(7);
    std::vector<double> data(static_cast<std::size_t>(m) * c);
    for (auto& v : data) v = rng.normal(0.0, 3.0);
    const auto probs = row_softmax(Tensor::constant({m, c}, data));
    for (int i = 0; i < m; ++i) {
      double total = 0.0;
      for (int j = 0; j < c; ++j) total += probs[static_cast<std::size_t>(i) * c + j];
      CHECK(std::abs(total - 1.0) < 1e-6);
    }
  }
}

TEST_CASE("binary cross entropy at logit zero is ln 2") {
  Tensor logits = Tensor::constant({1}, {0.0});
  CHECK(binary_cross_entropy_with_logits(logits, {1.0}).scalar() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(binary_cross_entropy_with_logits(logits, {0.0}).scalar() ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("cross entropy losses are non-negative") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    Tensor logits = Tensor::constant({1, 4}, {rng.normal(), rng.normal(), rng.normal(),
                                              rng.normal()});
    CHECK(softmax_cross_entropy(logits, {rng.uniform_int(4)}).scalar() >= 0.0);
    Tensor s = Tensor::constant({1}, {rng.normal(0.0, 4.0)});
    CHECK(binary_cross_entropy_with_logits(s, {static_cast<double>(rng.uniform_int(2))})
              .scalar() >= 0.0);
  }
}

TEST_CASE("bce tends to zero when labels are separated by large scores") {
  Tensor logits = Tensor::constant({4}, {30.0, 30.0, -30.0, -30.0});
  const double loss =
      binary_cross_entropy_with_logits(logits, {1.0, 1.0, 0.0, 0.0}).scalar();
  CHECK(loss < 1e-12);
}

TEST_CASE("segment_mean averages neighbor rows") {
  Tensor values = Tensor::constant({2, 2}, {1.0, 0.0, 0.0, 1.0});
  Tensor out = segment_mean(values, {0, 0}, 2);
  CHECK(out.at(0, 0) == doctest::Approx(0.5));
  CHECK(out.at(0, 1) == doctest::Approx(0.5));
  // empty segment aggregates to zero
  CHECK(out.at(1, 0) == 0.0);
  CHECK(out.at(1, 1) == 0.0);
}

TEST_CASE("backward of a linear map is the input row") {
  // loss = sum(W x): dW[i][j] = x[j]
  Tensor w = Tensor::param({3, 2}, {0.1, -0.2, 0.3, 0.4, -0.5, 0.6});
  Tensor x = Tensor::constant({2, 1}, {2.0, -3.0});
  Tensor loss = sum(matmul(w, x));
  backward(loss);
  const auto& g = w.grad();
  for (int i = 0; i < 3; ++i) {
    CHECK(g[2 * i + 0] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(g[2 * i + 1] == doctest::Approx(-3.0).epsilon(1e-15));
  }
}

TEST_CASE("softmax cross entropy gradient at the true class is p - 1") {
  Tensor logits = Tensor::param({1, 3}, {2.0, 1.0, 0.0});
  Tensor loss = softmax_cross_entropy(logits, {0});
  CHECK(loss.scalar() == doctest::Approx(0.40760596444438035).epsilon(1e-12));
  backward(loss);
  const auto probs = row_softmax(Tensor::constant({1, 3}, {2.0, 1.0, 0.0}));
  CHECK(probs[0] == doctest::Approx(0.66524095577482478).epsilon(1e-12));
  CHECK(probs[1] == doctest::Approx(0.24472847105479764).epsilon(1e-12));
  CHECK(probs[2] == doctest::Approx(0.09003057317038046).epsilon(1e-12));
  CHECK(logits.grad()[0] == doctest::Approx(probs[0] - 1.0).epsilon(1e-12));
  CHECK(logits.grad()[1] == doctest::Approx(probs[1]).epsilon(1e-12));
  CHECK(logits.grad()[2] == doctest::Approx(probs[2]).epsilon(1e-12));
}

TEST_CASE("gradients accumulate through shared subexpressions") {
  // loss = sum(a + a) -> da = 2
  Tensor a = Tensor::param({2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor loss = sum(add(a, a));
  backward(loss);
  for (double g : a.grad()) CHECK(g == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("backward rejects non-scalar and unrecorded losses") {
  Tensor a = Tensor::param({2, 2}, {1.0, 2.0, 3.0, 4.0});
  CHECK_THROWS_AS(backward(relu(a)), DataError);
  Tensor c = Tensor::constant({1}, {1.0});
  CHECK_THROWS_AS(backward(c), DataError);
}

TEST_CASE("shape mismatches are rejected") {
  Tensor a = Tensor::constant({2, 3}, std::vector<double>(6, 1.0));
  Tensor b = Tensor::constant({2, 2}, std::vector<double>(4, 1.0));
  CHECK_THROWS_AS(matmul(a, b), DataError);
  CHECK_THROWS_AS(add(a, b), DataError);
  CHECK_THROWS_AS(rowwise_cosine(a, b), DataError);
  CHECK_THROWS_AS(segment_mean(a, {0, 1, 0}, 2), DataError);
}

TEST_CASE("non-finite outputs trip a numerical error") {
  Tensor a = Tensor::constant({1, 1}, {1e308});
  CHECK_THROWS_AS(matmul(a, Tensor::constant({1, 1}, {1e308})), NumericalError);
  CHECK_THROWS_AS(scale(a, 1e308), NumericalError);
}

TEST_CASE("per-op finite difference checks stay under tolerance") {
  const auto report = run_op_gradchecks(999);
  for (const auto& item : report.items) {
    INFO(item.name);
    CHECK(item.max_rel_err < kGradCheckTolerance);
  }
}

TEST_CASE("detach blocks the gradient path") {
  Tensor a = Tensor::param({2, 2}, {1.0, 2.0, 3.0, 4.0});
  Tensor loss = sum(add(relu(a), scale(detach(relu(a)), 3.0)));
  backward(loss);
  for (double g : a.grad()) CHECK(g == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("adamw: zero gradient leaves parameters unchanged without decay") {
  ParamStore store;
  Tensor p = store.add("w", Tensor::param({2}, {1.5, -2.5}));
  store.zero_grad();
  AdamwConfig cfg;
  cfg.weight_decay = 0.0;
  cfg.clip_norm = 0.0;
  adamw_step(store, cfg);
  CHECK(p.value()[0] == 1.5);
  CHECK(p.value()[1] == -2.5);
}

TEST_CASE("adamw: decoupled decay multiplies parameters by 1 - lr*wd") {
  ParamStore store;
  Tensor p = store.add("w", Tensor::param({2}, {1.5, -2.5}));
  store.zero_grad();
  AdamwConfig cfg;
  cfg.lr = 0.001;
  cfg.weight_decay = 0.01;
  cfg.clip_norm = 0.0;
  adamw_step(store, cfg);
  CHECK(p.value()[0] == doctest::Approx(1.5 * (1.0 - 1e-5)).epsilon(1e-14));
  CHECK(p.value()[1] == doctest::Approx(-2.5 * (1.0 - 1e-5)).epsilon(1e-14));
}

TEST_CASE("adamw: first step with constant gradient follows the closed form") {
  ParamStore store;
  Tensor p = store.add("w", Tensor::param({3}, {1.0, 2.0, 3.0}));
  store.zero_grad();
  const std::vector<double> g{0.4, -0.7, 0.05};
  p.mutable_grad() = g;
  AdamwConfig cfg;
  cfg.lr = 0.001;
  cfg.weight_decay = 0.0;
  cfg.clip_norm = 0.0;
  adamw_step(store, cfg);
  const std::vector<double> before{1.0, 2.0, 3.0};
  for (int i = 0; i < 3; ++i) {
    const double expected = before[i] - cfg.lr * g[i] / (std::abs(g[i]) + cfg.eps);
    CHECK(p.value()[i] == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("adamw: global norm clipping caps the applied gradient") {
  ParamStore store;
  Tensor a = store.add("a", Tensor::param({2}, {0.0, 0.0}));
  Tensor b = store.add("b", Tensor::param({1}, {0.0}));
  store.zero_grad();
  a.mutable_grad() = {3.0, 4.0};
  b.mutable_grad() = {12.0};  // global norm 13
  AdamwConfig cfg;
  cfg.clip_norm = 0.5;
  const double pre_norm = adamw_step(store, cfg);
  CHECK(pre_norm == doctest::Approx(13.0).epsilon(1e-12));
  double post = 0.0;
  for (double g : a.grad()) post += g * g;
  for (double g : b.grad()) post += g * g;
  CHECK(std::sqrt(post) <= cfg.clip_norm + 1e-9);
  CHECK(std::sqrt(post) == doctest::Approx(cfg.clip_norm).epsilon(1e-12));
}

TEST_CASE("adamw: non-finite gradients are rejected") {
  ParamStore store;
  Tensor p = store.add("w", Tensor::param({1}, {1.0}));
  p.mutable_grad() = {std::numeric_limits<double>::quiet_NaN()};
  AdamwConfig cfg;
  CHECK_THROWS_AS(adamw_step(store, cfg), NumericalError);
}

TEST_CASE("checkpoints round-trip bitwise") {
  ParamStore store;
  Rng rng(5);
  std::vector<double> data(12);
  for (auto& v : data) v = rng.normal();
  store.add("m.w", Tensor::param({3, 4}, data));
  store.add("m.b", Tensor::param({4}, {0.1, 0.2, 0.3, 0.4}));
  store.opt_state()["m.w"].m.assign(12, 0.25);
  store.opt_state()["m.w"].v.assign(12, 0.5);
  store.set_step(17);
  CheckpointMeta meta;
  meta.config_digest = "deadbeefdeadbeef";
  meta.lambda = 20.0;
  meta.layers = 3;
  meta.hidden_dim = 4;
  meta.feature_dim = 3;
  meta.variant = "edges+features";

  const auto dir = std::filesystem::temp_directory_path() / "dipgnn_ckpt_test";
  std::filesystem::create_directories(dir);
  const std::string p1 = (dir / "a.bin").string();
  const std::string p2 = (dir / "b.bin").string();
  save_checkpoint(p1, store, meta);
  LoadedCheckpoint loaded = load_checkpoint(p1);
  CHECK(loaded.meta.lambda == 20.0);
  CHECK(loaded.meta.layers == 3);
  CHECK(loaded.meta.variant == "edges+features");
  CHECK(loaded.store.step() == 17);
  CHECK(loaded.store.get("m.w").value() == data);
  CHECK(loaded.store.opt_state()["m.w"].m == std::vector<double>(12, 0.25));
  save_checkpoint(p2, loaded.store, loaded.meta);

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string s1((std::istreambuf_iterator<char>(f1)), std::istreambuf_iterator<char>());
  std::string s2((std::istreambuf_iterator<char>(f2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
}

TEST_CASE("dropout with p=0 is the identity and scaling preserves the mean") {
  Rng rng(21);
  Tensor a = Tensor::constant({1000}, std::vector<double>(1000, 1.0));
  Tensor same = dropout(a, 0.0, rng);
  CHECK(same.value() == a.value());
  Tensor dropped = dropout(a, 0.3, rng);
  double mean = 0.0;
  for (double v : dropped.value()) mean += v;
  mean /= 1000.0;
  CHECK(mean == doctest::Approx(1.0).epsilon(0.08));
}
