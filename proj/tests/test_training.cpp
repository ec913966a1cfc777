#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sidnn/data.hpp"
#include "sidnn/errors.hpp"
#include "sidnn/loss.hpp"
#include "sidnn/metrics.hpp"
#include "sidnn/training.hpp"
#include "support/oracles.hpp"

using namespace sidnn;

namespace {

SplitDataset fir_data(std::size_t n) {
  SyntheticSpec spec;
  spec.a = {};
  spec.b = {0.5, 0.25};
  spec.input_kind = InputKind::gaussian;
  auto [data, truth] = gen_synthetic(spec, n);
  return split(data, 0.6);
}

HammersteinModel mlp_fir(std::uint64_t seed, std::size_t nb = 2, double dropout = 0.0) {
  SeededRng rng(seed);
  CellStack stack;
  stack.layers.push_back({DenseLayer::random(1, 4, Activation::tanh, rng), dropout});
  stack.layers.push_back({DenseLayer::random(4, 1, Activation::linear, rng), 0.0});
  Vector b(nb);
  for (double& v : b) v = rng.uniform(-0.5, 0.5);
  return HammersteinModel(stack, {LinearDynamicBlock({}, b)});
}

HammersteinModel static_mlp(std::uint64_t seed) {
  SeededRng rng(seed);
  CellStack stack;
  stack.layers.push_back({DenseLayer::random(1, 3, Activation::tanh, rng), 0.0});
  stack.layers.push_back({DenseLayer::random(3, 1, Activation::linear, rng), 0.0});
  return HammersteinModel(stack, {});
}

TrainConfig quick_config() {
  TrainConfig c;
  c.learning_rate = 0.01;
  c.momentum = 0.9;
  c.batch_size = 50;
  c.epochs = 3;
  c.bptt_horizon = 3;
  c.seed = 4;
  return c;
}

}  // namespace

TEST_CASE("window loss examples") {
  const std::vector<Vector> yhat{{2.0}, {0.0}}, zero{{0.0}, {0.0}};
  CHECK(mse_loss(std::vector<Vector>{{2.0}}, std::vector<Vector>{{0.0}}) == 2.0);
  CHECK(mse_loss(std::vector<Vector>{{1.0}, {3.0}}, std::vector<Vector>{{0.0}, {1.0}}) == 1.25);
  CHECK(mse_loss(yhat, zero) == 1.0);
  CHECK(squared_error(yhat, zero) == 4.0);
  CHECK(mse_loss(std::vector<Vector>{{1.0, 1.0}}, std::vector<Vector>{{0.0, 3.0}}) == 2.5);
}

TEST_CASE("momentum step displacement") {
  Vector p{1.0, -2.0};
  const Vector g{0.5, 4.0};
  const double alpha = 0.1, eta = 0.9;
  ParamViews params{std::span<double>(p)};
  const ConstParamViews grads{std::span<const double>(g)};
  Velocity v = Velocity::zeros_like(params);
  gd_step(params, grads, v, alpha, eta);
  CHECK(p[0] == doctest::Approx(1.0 - alpha * 0.5).epsilon(1e-15));
  gd_step(params, grads, v, alpha, eta);
  CHECK(p[0] == doctest::Approx(1.0 - alpha * 0.5 * (2.0 + eta)).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(-2.0 - alpha * 4.0 * (2.0 + eta)).epsilon(1e-15));
  CHECK(v.buffers[0][1] == doctest::Approx(-alpha * 4.0 * (1.0 + eta)).epsilon(1e-15));
}

TEST_CASE("zero momentum is plain gradient descent on a quadratic") {
  Vector x{3.0};
  Vector grad(1);
  ParamViews params{std::span<double>(x)};
  Velocity v = Velocity::zeros_like(params);
  for (int k = 1; k <= 20; ++k) {
    grad[0] = x[0];
    gd_step(params, ConstParamViews{std::span<const double>(grad)}, v, 0.25, 0.0);
    CHECK(x[0] == doctest::Approx(3.0 * std::pow(0.75, k)).epsilon(1e-14));
  }
}

TEST_CASE("sgd_step equals gd_step on the batch gradient") {
  Vector p1{0.3, 0.7}, p2 = p1;
  const Vector g{1.0, -1.0};
  ParamViews a{std::span<double>(p1)}, b{std::span<double>(p2)};
  Velocity va = Velocity::zeros_like(a), vb = Velocity::zeros_like(b);
  for (int k = 0; k < 4; ++k) {
    gd_step(a, ConstParamViews{std::span<const double>(g)}, va, 0.05, 0.8);
    sgd_step(b, ConstParamViews{std::span<const double>(g)}, vb, 0.05, 0.8);
  }
  CHECK(p1 == p2);
}

TEST_CASE("literal update rule") {
  Vector p{2.0, -1.0};
  const Vector g{1.0, 1.0};
  literal_eq3_step(ParamViews{std::span<double>(p)}, ConstParamViews{std::span<const double>(g)}, 0.1, 0.9);
  CHECK(p[0] == doctest::Approx(0.9 * 2.0 - 0.1).epsilon(1e-15));
  CHECK(p[1] == doctest::Approx(-0.9 - 0.1).epsilon(1e-15));
}

TEST_CASE("mean gradient and shape checks") {
  const Vector g1{1.0, 2.0}, g2{3.0, -2.0};
  const std::vector<ConstParamViews> examples{{std::span<const double>(g1)}, {std::span<const double>(g2)}};
  CHECK(mean_gradient(examples)[0] == Vector{2.0, 0.0});
  CHECK_THROWS_AS(mean_gradient(std::span<const ConstParamViews>{}), StateError);

  Vector p{1.0};
  const Vector wrong{1.0, 2.0};
  ParamViews params{std::span<double>(p)};
  Velocity v = Velocity::zeros_like(params);
  CHECK_THROWS_AS(gd_step(params, ConstParamViews{std::span<const double>(wrong)}, v, 0.1, 0.9), ShapeError);
}

TEST_CASE("config validation") {
  auto rejects = [](auto mutate) {
    TrainConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  };
  rejects([](TrainConfig& c) { c.learning_rate = 0.0; });
  rejects([](TrainConfig& c) { c.learning_rate = std::nan(""); });
  rejects([](TrainConfig& c) { c.momentum = 1.0; });
  rejects([](TrainConfig& c) { c.momentum = -0.1; });
  rejects([](TrainConfig& c) { c.batch_size = 0; });
  rejects([](TrainConfig& c) { c.inner_loops = 0; });
  rejects([](TrainConfig& c) { c.bptt_horizon = 0; });
  rejects([](TrainConfig& c) { c.dropout_p = 1.0; });
  rejects([](TrainConfig& c) { c.split_ratio = 1.0; });
  CHECK_NOTHROW(TrainConfig{}.validate());
}

TEST_CASE("zero epochs leaves the model untouched") {
  HammersteinModel m = mlp_fir(1);
  const Vector before = oracle::flatten(m);
  TrainConfig c = quick_config();
  c.epochs = 0;
  const RunHistory h = train(m, fir_data(200), c);
  CHECK(h.epochs.empty());
  CHECK(oracle::flatten(m) == before);
}

TEST_CASE("training is deterministic, dropout included") {
  const SplitDataset data = fir_data(400);
  TrainConfig c = quick_config();
  HammersteinModel a = mlp_fir(2, 2, 0.2), b = mlp_fir(2, 2, 0.2);
  const RunHistory ha = train(a, data, c), hb = train(b, data, c);
  CHECK(oracle::flatten(a) == oracle::flatten(b));
  REQUIRE(ha.epochs.size() == 3);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(ha.epochs[e].train_mse == hb.epochs[e].train_mse);
    CHECK(ha.epochs[e].val_mse == hb.epochs[e].val_mse);
  }
  c.seed = 5;
  HammersteinModel other = mlp_fir(2, 2, 0.2);
  train(other, data, c);
  CHECK(oracle::flatten(other) != oracle::flatten(a));
}

TEST_CASE("per-epoch metrics equal standalone evaluation") {
  const SplitDataset data = fir_data(400);
  HammersteinModel m = mlp_fir(3);
  std::size_t calls = 0;
  TrainOptions options;
  options.on_epoch = [&](const EpochRecord& r) { CHECK(r.epoch == ++calls); };
  const RunHistory h = train(m, data, quick_config(), options);
  CHECK(calls == 3);
  const EvalReport val = evaluate(m, data.test), est = evaluate(m, data.train);
  CHECK(h.epochs.back().val_mse == val.mse);
  CHECK(h.epochs.back().fit_pct == val.fit);
  CHECK(h.epochs.back().train_mse == est.mse);
  for (std::size_t e = 1; e < h.epochs.size(); ++e) CHECK(h.epochs[e].seconds >= h.epochs[e - 1].seconds);
}

TEST_CASE("loss over a static model decomposes into weighted window losses") {
  const SplitDataset data = fir_data(230);
  const HammersteinModel m = static_mlp(6);
  const std::span<const Vector> u(data.train.u), y(data.train.y);
  const double whole = hammerstein_grads(m, u, y, 1).loss;
  double weighted = 0.0;
  for (const Window& w : minibatches(data.train, 40, 1, 1)) {
    weighted += static_cast<double>(w.size()) *
                hammerstein_grads(m, u.subspan(w.begin, w.size()), y.subspan(w.begin, w.size()), 1).loss;
  }
  CHECK(weighted / static_cast<double>(u.size()) == doctest::Approx(whole).epsilon(1e-12));
}

TEST_CASE("inner loops and the literal rule change the trajectory") {
  const SplitDataset data = fir_data(300);
  TrainConfig c = quick_config();
  HammersteinModel base = mlp_fir(7), inner = mlp_fir(7), literal = mlp_fir(7);
  train(base, data, c);
  c.inner_loops = 2;
  train(inner, data, c);
  c.inner_loops = 1;
  c.literal_eq3 = true;
  train(literal, data, c);
  CHECK(oracle::flatten(base) != oracle::flatten(inner));
  CHECK(oracle::flatten(base) != oracle::flatten(literal));
}

TEST_CASE("training errors") {
  HammersteinModel m = mlp_fir(1);
  SplitDataset empty;
  CHECK_THROWS_AS(train(m, empty, quick_config()), StateError);

  SplitDataset wide = fir_data(100);
  for (auto& v : wide.train.u) v.push_back(0.0);
  for (auto& v : wide.test.u) v.push_back(0.0);
  CHECK_THROWS_AS(train(m, wide, quick_config()), ShapeError);

  TrainConfig c = quick_config();
  c.learning_rate = 1e8;
  c.momentum = 0.0;
  HammersteinModel blowup = mlp_fir(1);
  CHECK_THROWS_AS(train(blowup, fir_data(400), c), DivergenceError);
}

TEST_CASE("unstable blocks are reported") {
  const SplitDataset data = fir_data(200);
  SeededRng rng(1);
  CellStack stack;
  stack.layers.push_back({DenseLayer::random(1, 1, Activation::linear, rng), 0.0});
  HammersteinModel m(stack, {LinearDynamicBlock({-1.2}, {0.0})});
  std::ostringstream log;
  TrainOptions options;
  options.log = &log;
  TrainConfig c = quick_config();
  c.epochs = 1;
  c.learning_rate = 1e-9;
  train(m, data, c, options);
  CHECK(log.str().find("unstable") != std::string::npos);
}

TEST_CASE("a small FIR Hammerstein model is learned") {
  const SplitDataset data = fir_data(1000);
  HammersteinModel m = mlp_fir(11);
  TrainConfig c = quick_config();
  c.epochs = 150;
  const RunHistory h = train(m, data, c);
  CHECK(h.epochs.back().fit_pct >= 95.0);
  CHECK(h.epochs.back().val_mse < h.epochs.front().val_mse);
}
