#include "sidnn/hammerstein.hpp"

#include <cmath>

#include "sidnn/errors.hpp"
#include "sidnn/loss.hpp"

namespace sidnn {

LinearDynamicBlock::LinearDynamicBlock(Vector a, Vector b)
    : a_(std::move(a)), b_(std::move(b)), y_hist_(a_.size()), w_hist_(b_.size()) {}

double LinearDynamicBlock::step(double w) {
  double y = 0.0;
  for (std::size_t k = 1; k <= a_.size(); ++k) y -= a_[k - 1] * y_hist_.back(k);
  for (std::size_t k = 1; k <= b_.size(); ++k) y += b_[k - 1] * w_hist_.back(k);
  y_hist_.push(y);
  w_hist_.push(w);
  return y;
}

void LinearDynamicBlock::reset() {
  y_hist_.clear();
  w_hist_.clear();
}

double linear_filter_step(LinearDynamicBlock& block, double w) { return block.step(w); }

Vector linear_filter(const Vector& a, const Vector& b, std::span<const double> w) {
  LinearDynamicBlock block(a, b);
  Vector y(w.size());
  for (std::size_t n = 0; n < w.size(); ++n) y[n] = block.step(w[n]);
  return y;
}

bool is_stable(std::span<const double> a) {
  // Schur-Cohn step-down: stable iff every reflection coefficient has |k| < 1.
  Vector p(a.size() + 1);
  p[0] = 1.0;
  std::copy(a.begin(), a.end(), p.begin() + 1);
  for (std::size_t m = a.size(); m > 0; --m) {
    const double k = p[m];
    if (!(std::abs(k) < 1.0)) return false;
    const double denom = 1.0 - k * k;
    Vector next(m);
    for (std::size_t i = 0; i < m; ++i) next[i] = (p[i] - k * p[m - i]) / denom;
    p = std::move(next);
  }
  return true;
}

double pole_radius(std::span<const double> a) {
  if (a.empty()) return 0.0;
  double hi = 1.0;
  for (double v : a) hi = std::max(hi, 1.0 + std::abs(v));  // Cauchy bound
  double lo = 0.0;
  Vector scaled(a.size());
  auto stable_within = [&](double r) {
    double rk = 1.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
      rk *= r;
      scaled[k] = a[k] / rk;
    }
    return is_stable(scaled);
  };
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= 0.0) break;
    if (stable_within(mid)) hi = mid;
    else lo = mid;
  }
  return hi;
}

void NoiseSpec::validate() const {
  if (!(std::isfinite(std) && std >= 0.0)) throw ConfigError("noise std must be >= 0");
}

HammersteinModel::HammersteinModel(CellStack stack, std::vector<LinearDynamicBlock> blocks)
    : nonlinear(std::move(stack)), linear(std::move(blocks)) {
  validate();
  reset();
}

void HammersteinModel::validate() const {
  nonlinear.validate();
  if (nonlinear.layers.empty()) throw ConfigError("model has no layers");
  if (has_arx() && nonlinear.output_size() != linear.size()) {
    throw ShapeError("nonlinear block produces " + std::to_string(nonlinear.output_size()) + " signals but " +
                     std::to_string(linear.size()) + " linear blocks are attached");
  }
}

void HammersteinModel::reset() {
  state_ = zero_state(nonlinear);
  for (auto& block : linear) block.reset();
}

Vector HammersteinModel::nonlinear_forward(std::span<const double> u) {
  if (state_.layers.size() != nonlinear.layers.size()) state_ = zero_state(nonlinear);
  return stack_step(nonlinear, u, state_, nullptr, nullptr);
}

Vector HammersteinModel::step(std::span<const double> u) {
  Vector w = nonlinear_forward(u);
  if (!has_arx()) return w;
  Vector y(linear.size());
  for (std::size_t c = 0; c < linear.size(); ++c) y[c] = linear[c].step(w[c]);
  return y;
}

std::vector<Vector> hammerstein_forward(HammersteinModel& model, std::span<const Vector> u_seq) {
  model.reset();
  std::vector<Vector> y;
  y.reserve(u_seq.size());
  for (const auto& u : u_seq) y.push_back(model.step(u));
  return y;
}

std::size_t param_count(const HammersteinModel& model) {
  std::size_t n = param_count(model.nonlinear);
  for (const auto& block : model.linear) n += block.na() + block.nb();
  return n;
}

HammersteinModel zeros_like(const HammersteinModel& model) {
  HammersteinModel z = model;
  for_each_param(z, [](const std::string&, std::span<double> s) { std::fill(s.begin(), s.end(), 0.0); });
  z.reset();
  return z;
}

HammersteinGrads hammerstein_grads(const HammersteinModel& model, std::span<const Vector> u,
                                   std::span<const Vector> y, std::size_t horizon, SeededRng* dropout_rng) {
  const std::size_t T = u.size();
  if (T == 0) throw StateError("hammerstein_grads: empty batch");
  if (y.size() != T) throw ShapeError("hammerstein_grads: input and output sequences differ in length");

  const CellStack& stack = model.nonlinear;
  StackState state = zero_state(stack);
  StackTape tape;
  tape.steps.resize(T);
  std::vector<LinearDynamicBlock> blocks = model.linear;
  for (auto& b : blocks) b.reset();

  std::vector<Vector> w(T), yhat(T);
  for (std::size_t t = 0; t < T; ++t) {
    w[t] = stack_step(stack, u[t], state, &tape.steps[t], dropout_rng);
    if (blocks.empty()) {
      yhat[t] = w[t];
    } else {
      yhat[t].resize(blocks.size());
      for (std::size_t c = 0; c < blocks.size(); ++c) yhat[t][c] = blocks[c].step(w[t][c]);
    }
  }

  HammersteinGrads result{zeros_like(model), mse_loss(yhat, y)};
  const double scale = 1.0 / static_cast<double>(T);
  std::vector<Vector> g_y(T);
  for (std::size_t t = 0; t < T; ++t) {
    g_y[t].resize(y[t].size());
    for (std::size_t i = 0; i < y[t].size(); ++i) g_y[t][i] = (yhat[t][i] - y[t][i]) * scale;
  }

  std::vector<Vector> g_w;
  if (blocks.empty()) {
    g_w = std::move(g_y);
  } else {
    const std::size_t channels = blocks.size();
    g_w.assign(T, Vector(channels, 0.0));
    for (std::size_t c = 0; c < channels; ++c) {
      const Vector& b = model.linear[c].b();
      Vector& ga = result.grads.linear[c].a();
      Vector& gb = result.grads.linear[c].b();
      for (std::size_t n = 0; n < T; ++n) {
        const double e = g_y[n][c];
        for (std::size_t k = 1; k <= ga.size() && k <= n; ++k) ga[k - 1] -= e * yhat[n - k][c];
        for (std::size_t k = 1; k <= gb.size() && k <= n; ++k) {
          gb[k - 1] += e * w[n - k][c];
          g_w[n - k][c] += e * b[k - 1];
        }
      }
    }
  }

  stack_backward(stack, tape, g_w, horizon, result.grads.nonlinear);
  return result;
}

void update_hammerstein(HammersteinModel& model, const HammersteinModel& grads, double lr) {
  if (!(lr > 0.0)) throw ConfigError("learning rate must be positive");
  std::vector<std::span<const double>> g;
  for_each_param(grads, [&](const std::string&, std::span<const double> s) { g.push_back(s); });
  std::size_t idx = 0;
  for_each_param(model, [&](const std::string& name, std::span<double> s) {
    if (idx >= g.size() || g[idx].size() != s.size()) throw ShapeError("update_hammerstein: gradient shape mismatch at " + name);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] -= lr * g[idx][i];
    ++idx;
  });
}

}  // namespace sidnn
