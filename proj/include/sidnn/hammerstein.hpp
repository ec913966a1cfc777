#pragma once

// Hammerstein block-structured model: a nonlinear cell stack g(.) feeding a
// linear dynamic block G(q^-1) = B(q^-1)/A(q^-1) per output channel.
// With no linear blocks the stack output is the model output (the last
// stack layer then plays the role of the linear element).

#include <algorithm>
#include <cstddef>
#include <span>
#include <string_view>
#include <tuple>
#include <vector>

#include "sidnn/stack.hpp"

namespace sidnn {

/// Fixed-capacity history, most recent first.
class History {
 public:
  explicit History(std::size_t capacity = 0) : values_(capacity, 0.0) {}
  std::size_t size() const { return values_.size(); }
  /// Value k steps back, k = 1..size().
  double back(std::size_t k) const { return values_[(head_ + values_.size() - k) % values_.size()]; }
  void push(double v) {
    if (values_.empty()) return;
    values_[head_] = v;
    head_ = (head_ + 1) % values_.size();
  }
  void clear() {
    std::fill(values_.begin(), values_.end(), 0.0);
    head_ = 0;
  }

 private:
  std::vector<double> values_;
  std::size_t head_ = 0;
};

/// y(n) = -sum_{k=1..na} a_k y(n-k) + sum_{k=1..nb} b_k w(n-k).
/// A is monic (leading 1 implicit) and B has no b_0 tap.
class LinearDynamicBlock {
 public:
  LinearDynamicBlock() = default;
  LinearDynamicBlock(Vector a, Vector b);

  std::size_t na() const { return a_.size(); }
  std::size_t nb() const { return b_.size(); }
  const Vector& a() const { return a_; }
  const Vector& b() const { return b_; }
  Vector& a() { return a_; }
  Vector& b() { return b_; }

  /// Produces y(n) from the stored histories, then records w(n) and y(n).
  double step(double w);
  void reset();

  double past_output(std::size_t k) const { return y_hist_.back(k); }
  double past_input(std::size_t k) const { return w_hist_.back(k); }

  static constexpr std::array<std::string_view, 2> tensor_names{"a", "b"};
  auto tensors() { return std::tie(a_, b_); }
  auto tensors() const { return std::tie(a_, b_); }

 private:
  Vector a_, b_;
  History y_hist_, w_hist_;
};

double linear_filter_step(LinearDynamicBlock& block, double w);

/// Simulates the block from zero histories over a whole input sequence.
Vector linear_filter(const Vector& a, const Vector& b, std::span<const double> w);

/// True iff every root of z^n + a_1 z^{n-1} + ... + a_n lies strictly inside the unit circle.
bool is_stable(std::span<const double> a);

/// Largest root magnitude of A, to about 1e-9 for simple roots. Repeated
/// roots are ill-conditioned and only resolve to a few parts in 1e6.
double pole_radius(std::span<const double> a);

struct NoiseSpec {
  enum class Kind { none, gaussian };
  Kind kind = Kind::none;
  double std = 0.0;
  void validate() const;
};

class HammersteinModel {
 public:
  CellStack nonlinear;
  /// One block per output channel; empty selects the dense realization.
  std::vector<LinearDynamicBlock> linear;

  HammersteinModel() = default;
  HammersteinModel(CellStack stack, std::vector<LinearDynamicBlock> blocks);

  bool has_arx() const { return !linear.empty(); }
  std::size_t input_size() const { return nonlinear.input_size(); }
  std::size_t output_size() const { return has_arx() ? linear.size() : nonlinear.output_size(); }
  void validate() const;

  /// Zeroes recurrent states and filter histories.
  void reset();
  /// w = g(u(n)), advancing the recurrent state of the nonlinear block.
  Vector nonlinear_forward(std::span<const double> u);
  /// One full model step (dropout disabled).
  Vector step(std::span<const double> u);

 private:
  StackState state_;
};

/// Resets the model and simulates it over u_seq.
std::vector<Vector> hammerstein_forward(HammersteinModel& model, std::span<const Vector> u_seq);

/// Calls f(name, span) over every parameter tensor: stack tensors, then a and b per channel.
template <class ModelT, class F>
void for_each_param(ModelT& model, F&& f) {
  for_each_tensor_in_stack(model.nonlinear, f);
  for (std::size_t c = 0; c < model.linear.size(); ++c) {
    const std::string prefix = "linear." + std::to_string(c) + ".";
    for_each_tensor(model.linear[c], [&](std::string_view name, auto span) { f(prefix + std::string(name), span); });
  }
}

std::size_t param_count(const HammersteinModel& model);
HammersteinModel zeros_like(const HammersteinModel& model);

struct HammersteinGrads {
  /// Shaped like the model; nonlinear holds GradW, linear[c].a()/b() hold GradA/GradB.
  HammersteinModel grads;
  /// Window loss l = 1/(2n) sum ||yhat - y||^2 evaluated during the pass.
  double loss = 0.0;
};

/// Gradients of the window loss over one contiguous batch starting from
/// zero state. ARX sensitivities use pseudo-linear regression:
///   dy(n)/db_k = w(n-k),  dy(n)/da_k = -yhat(n-k),  dy(n)/dw(n-k) = b_k,
/// which is exact when na = 0. The nonlinear block is differentiated with
/// truncated BPTT of the given horizon. A non-null dropout_rng enables dropout.
HammersteinGrads hammerstein_grads(const HammersteinModel& model, std::span<const Vector> u,
                                   std::span<const Vector> y, std::size_t horizon, SeededRng* dropout_rng = nullptr);

/// theta <- theta - lr * grad for every parameter.
void update_hammerstein(HammersteinModel& model, const HammersteinModel& grads, double lr);

}  // namespace sidnn
