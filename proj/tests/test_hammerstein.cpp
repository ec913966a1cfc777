#include <doctest.h>

#include <cmath>

#include "sidnn/data.hpp"
#include "sidnn/errors.hpp"
#include "sidnn/hammerstein.hpp"
#include "sidnn/loss.hpp"
#include "support/oracles.hpp"

using namespace sidnn;

namespace {

// Independent recursion: y[n] = -sum a_k y[n-k] + sum b_k w[n-k].
Vector reference_filter(const Vector& a, const Vector& b, const Vector& w) {
  Vector y(w.size(), 0.0);
  for (std::size_t n = 0; n < w.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 1; k <= a.size(); ++k)
      if (n >= k) acc -= a[k - 1] * y[n - k];
    for (std::size_t k = 1; k <= b.size(); ++k)
      if (n >= k) acc += b[k - 1] * w[n - k];
    y[n] = acc;
  }
  return y;
}

HammersteinModel tanh_model(const Vector& a, const Vector& b) {
  CellStack stack;
  DenseLayer d;
  d.W = Matrix(1, 1, 1.0);
  d.b = {0.0};
  d.activation = Activation::tanh;
  stack.layers.push_back({d, 0.0});
  return HammersteinModel(stack, {LinearDynamicBlock(a, b)});
}

HammersteinModel small_fir_model(SeededRng& rng, std::size_t nb) {
  CellStack stack;
  stack.layers.push_back({RnnCell::random(1, 3, 1, Activation::tanh, rng), 0.0});
  Vector b(nb);
  for (double& v : b) v = rng.uniform(-0.8, 0.8);
  return HammersteinModel(stack, {LinearDynamicBlock({}, b)});
}

std::vector<Vector> column(const Vector& v) {
  std::vector<Vector> out;
  for (double x : v) out.push_back({x});
  return out;
}

}  // namespace

TEST_CASE("impulse response of a first-order block") {
  Vector w(8, 0.0);
  w[0] = 1.0;
  const Vector y = linear_filter({0.5}, {1.0}, w);
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 1.0);
  CHECK(y[2] == -0.5);
  CHECK(y[3] == 0.25);
  CHECK(y[7] == doctest::Approx(std::pow(-0.5, 6)).epsilon(1e-15));
}

TEST_CASE("pure delay") {
  const Vector w{3.0, -1.0, 4.0, 1.5, 9.0};
  const Vector y = linear_filter({}, {0.0, 1.0}, w);
  CHECK(y == Vector{0.0, 0.0, 3.0, -1.0, 4.0});
}

TEST_CASE("filter matches an independent recursion and is linear") {
  SeededRng rng(8);
  const Vector a{-1.5, 0.56}, b{0.4, -0.2, 0.1};
  Vector w1(300), w2(300);
  for (double& v : w1) v = rng.uniform(-1, 1);
  for (double& v : w2) v = rng.uniform(-1, 1);
  const Vector y1 = linear_filter(a, b, w1), y2 = linear_filter(a, b, w2);
  const Vector ref = reference_filter(a, b, w1);
  Vector mix(300);
  for (std::size_t i = 0; i < 300; ++i) mix[i] = 2.5 * w1[i] - 0.75 * w2[i];
  const Vector ym = linear_filter(a, b, mix);
  for (std::size_t i = 0; i < 300; ++i) {
    CHECK(y1[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    CHECK(std::abs(ym[i] - (2.5 * y1[i] - 0.75 * y2[i])) <= 1e-10);
  }
}

TEST_CASE("stable block stays bounded for bounded input") {
  const Vector a{-1.5, 0.56}, b{1.0};
  // Sum of |impulse response| for poles 0.7, 0.8 is below 1/((1-0.7)(1-0.8)).
  const double bound = 1.0 / (0.3 * 0.2);
  LinearDynamicBlock block(a, b);
  SeededRng rng(2);
  for (int n = 0; n < 10000; ++n) CHECK(std::abs(block.step(rng.uniform(-1, 1))) <= bound);
}

TEST_CASE("block step and reset") {
  LinearDynamicBlock block({-0.5}, {2.0});
  CHECK(block.step(1.0) == 0.0);
  CHECK(block.step(0.0) == 2.0);
  CHECK(block.step(0.0) == 1.0);
  CHECK(block.past_output(1) == 1.0);
  block.reset();
  CHECK(block.past_output(1) == 0.0);
  CHECK(block.step(0.0) == 0.0);
}

TEST_CASE("stability and pole radius") {
  CHECK(is_stable(Vector{-0.7}));
  CHECK_FALSE(is_stable(Vector{-1.5}));
  CHECK_FALSE(is_stable(Vector{0.0, 1.0}));
  CHECK(is_stable(Vector{-1.5, 0.56}));
  CHECK(is_stable(Vector{}));
  CHECK(pole_radius(Vector{-1.5, 0.56}) == doctest::Approx(0.8).epsilon(1e-9));
  CHECK(pole_radius(Vector{0.0, 0.25}) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(pole_radius(Vector{-0.7}) == doctest::Approx(0.7).epsilon(1e-9));
  // A double root moves by the square root of any rounding in the coefficients.
  CHECK(std::abs(pole_radius(Vector{-1.8, 0.81}) - 0.9) <= 1e-5);
}

TEST_CASE("model simulation reproduces the generator") {
  SyntheticSpec spec;
  spec.a = {-1.5, 0.56};
  spec.b = {0.3, 0.1};
  spec.input_kind = InputKind::gaussian;
  auto [data, truth] = gen_synthetic(spec, 2000);
  HammersteinModel model = tanh_model(spec.a, spec.b);
  const auto yhat = hammerstein_forward(model, data.u);
  for (std::size_t t = 0; t < data.sample_count(); ++t) CHECK(std::abs(yhat[t][0] - truth.clean_y[t][0]) <= 1e-12);
}

TEST_CASE("FIR gradients match finite differences of the window loss") {
  SeededRng rng(77);
  const HammersteinModel model = small_fir_model(rng, 3);
  const auto u = oracle::random_sequence(12, 1, rng);
  const auto y = oracle::random_sequence(12, 1, rng);
  const auto g = hammerstein_grads(model, u, y, u.size());

  HammersteinModel probe = model;
  auto loss = [&] { return mse_loss(hammerstein_forward(probe, u), y); };
  CHECK(g.loss == doctest::Approx(loss()).epsilon(1e-14));
  Vector numeric;
  for (auto span : oracle::spans(probe)) {
    for (std::size_t i = 0; i < span.size(); ++i) {
      const double saved = span[i];
      span[i] = saved + 1e-6;
      const double up = loss();
      span[i] = saved - 1e-6;
      const double down = loss();
      span[i] = saved;
      numeric.push_back((up - down) / 2e-6);
    }
  }
  CHECK(oracle::max_rel_error(oracle::flatten(g.grads), numeric) <= 1e-5);
}

TEST_CASE("ARX a-gradient uses the model's own past outputs") {
  SeededRng rng(5);
  CellStack stack;
  stack.layers.push_back({DenseLayer::random(1, 1, Activation::tanh, rng), 0.0});
  const Vector a{-0.6, 0.2}, b{0.5, 0.25};
  const HammersteinModel model(stack, {LinearDynamicBlock(a, b)});
  const auto u = oracle::random_sequence(40, 1, rng);
  const auto y = oracle::random_sequence(40, 1, rng);
  const auto g = hammerstein_grads(model, u, y, 40);

  // Oracle: freeze the regressor yhat(n-k) and differentiate the loss in a.
  HammersteinModel sim = model;
  const auto yhat = hammerstein_forward(sim, u);
  for (std::size_t k = 1; k <= a.size(); ++k) {
    auto frozen_loss = [&](double delta) {
      double s = 0.0;
      for (std::size_t n = 0; n < u.size(); ++n) {
        const double past = n >= k ? yhat[n - k][0] : 0.0;
        const double e = yhat[n][0] - delta * past - y[n][0];
        s += e * e;
      }
      return s / (2.0 * u.size());
    };
    const double numeric = (frozen_loss(1e-6) - frozen_loss(-1e-6)) / 2e-6;
    CHECK(g.grads.linear[0].a()[k - 1] == doctest::Approx(numeric).epsilon(1e-7));
  }
}

TEST_CASE("gradient errors and update") {
  SeededRng rng(1);
  const HammersteinModel model = small_fir_model(rng, 2);
  CHECK_THROWS_AS(hammerstein_grads(model, std::vector<Vector>{}, std::vector<Vector>{}, 3), StateError);
  CHECK_THROWS_AS(hammerstein_grads(model, column({1.0, 2.0}), column({1.0}), 3), ShapeError);

  HammersteinModel m = tanh_model({}, {1.0});
  HammersteinModel grads = zeros_like(m);
  grads.linear[0].b()[0] = 0.5;
  update_hammerstein(m, grads, 1.0);
  CHECK(m.linear[0].b()[0] == 0.5);
  CHECK_THROWS_AS(update_hammerstein(m, grads, 0.0), ConfigError);
  CHECK_THROWS_AS(update_hammerstein(m, grads, -1.0), ConfigError);
}

TEST_CASE("plain gradient descent on a FIR model reduces the loss") {
  SyntheticSpec spec;
  spec.a = {};
  spec.b = {0.6, -0.3};
  auto [data, truth] = gen_synthetic(spec, 300);
  SeededRng rng(3);
  HammersteinModel model = small_fir_model(rng, 2);
  const double before = hammerstein_grads(model, data.u, data.y, 5).loss;
  for (int it = 0; it < 200; ++it) update_hammerstein(model, hammerstein_grads(model, data.u, data.y, 5).grads, 0.2);
  const double after = hammerstein_grads(model, data.u, data.y, 5).loss;
  CHECK(after < 0.5 * before);
}

TEST_CASE("parameter enumeration and validation") {
  const HammersteinModel m = tanh_model({-0.5, 0.1}, {1.0, 2.0, 3.0});
  CHECK(param_count(m) == 2 + 5);
  std::vector<std::string> names;
  for_each_param(m, [&](const std::string& n, std::span<const double>) { names.push_back(n); });
  CHECK(names == std::vector<std::string>{"layers.0.W", "layers.0.b", "linear.0.a", "linear.0.b"});
  CHECK(m.output_size() == 1);

  HammersteinModel bad = tanh_model({}, {1.0});
  bad.linear.push_back(LinearDynamicBlock({}, {1.0}));
  CHECK_THROWS_AS(bad.validate(), ShapeError);
}
