#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "sidnn/data.hpp"
#include "sidnn/hammerstein.hpp"
#include "sidnn/loss.hpp"
#include "sidnn/run_history.hpp"

namespace sidnn {

struct TrainConfig {
  double learning_rate = 1e-3;  // alpha
  double momentum = 0.9;        // eta
  std::size_t batch_size = 100;
  std::size_t epochs = 50;
  /// Repeated updates on each mini-batch before moving to the next.
  std::size_t inner_loops = 1;
  std::size_t bptt_horizon = 5;
  /// Dropout for recurrent layers whose configuration does not set one.
  double dropout_p = 0.0;
  std::uint64_t seed = 1;
  double split_ratio = 0.6;
  /// Use w <- eta * w - alpha * grad instead of velocity momentum.
  bool literal_eq3 = false;

  void validate() const;
};

using ParamViews = std::vector<std::span<double>>;
using ConstParamViews = std::vector<std::span<const double>>;

ParamViews param_views(HammersteinModel& model);
ConstParamViews param_views(const HammersteinModel& model);

/// Momentum buffers, one per parameter tensor, zero-initialized.
struct Velocity {
  std::vector<Vector> buffers;
  static Velocity zeros_like(const ParamViews& params);
  static Velocity zeros_like(const ConstParamViews& params);
};

/// velocity <- eta * velocity - alpha * grad;  params <- params + velocity.
void gd_step(const ParamViews& params, const ConstParamViews& grads, Velocity& velocity, double alpha, double eta);

/// gd_step applied to the mean gradient of one mini-batch.
void sgd_step(const ParamViews& params, const ConstParamViews& batch_grads, Velocity& velocity, double alpha_k,
              double eta);

/// The update exactly as printed: params <- eta * params - alpha * grad.
void literal_eq3_step(const ParamViews& params, const ConstParamViews& grads, double alpha, double eta);

/// Element-wise mean of several gradient sets with identical shapes.
std::vector<Vector> mean_gradient(std::span<const ConstParamViews> per_example);
ConstParamViews views_of(const std::vector<Vector>& tensors);

struct TrainOptions {
  /// Receives warnings (e.g. unstable linear blocks); may be null.
  std::ostream* log = nullptr;
  std::function<void(const EpochRecord&)> on_epoch;
};

/// Runs config.epochs epochs of shuffled mini-batch SGD with truncated BPTT
/// on data.train, evaluating train and validation metrics after each epoch.
RunHistory train(HammersteinModel& model, const SplitDataset& data, const TrainConfig& config,
                 const TrainOptions& options = {});

}  // namespace sidnn
