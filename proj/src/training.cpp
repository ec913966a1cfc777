#include "sidnn/training.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "sidnn/errors.hpp"
#include "sidnn/metrics.hpp"

namespace sidnn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0 && std::isfinite(learning_rate))) throw ConfigError("learning_rate must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0)) throw ConfigError("momentum must be in [0, 1)");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (inner_loops < 1) throw ConfigError("inner_loops must be >= 1");
  if (bptt_horizon < 1) throw ConfigError("bptt_horizon must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw ConfigError("dropout_p must be in [0, 1)");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) throw ConfigError("split_ratio must be in (0, 1)");
}

ParamViews param_views(HammersteinModel& model) {
  ParamViews v;
  for_each_param(model, [&](const std::string&, std::span<double> s) { v.push_back(s); });
  return v;
}

ConstParamViews param_views(const HammersteinModel& model) {
  ConstParamViews v;
  for_each_param(model, [&](const std::string&, std::span<const double> s) { v.push_back(s); });
  return v;
}

Velocity Velocity::zeros_like(const ParamViews& params) {
  Velocity v;
  for (const auto& p : params) v.buffers.emplace_back(p.size(), 0.0);
  return v;
}

Velocity Velocity::zeros_like(const ConstParamViews& params) {
  Velocity v;
  for (const auto& p : params) v.buffers.emplace_back(p.size(), 0.0);
  return v;
}

namespace {
void check_shapes(const ParamViews& params, const ConstParamViews& grads, const Velocity* velocity) {
  if (grads.size() != params.size() || (velocity && velocity->buffers.size() != params.size())) {
    throw ShapeError("optimizer: " + std::to_string(params.size()) + " parameter tensors, " +
                     std::to_string(grads.size()) + " gradient tensors");
  }
  for (std::size_t t = 0; t < params.size(); ++t) {
    if (grads[t].size() != params[t].size() || (velocity && velocity->buffers[t].size() != params[t].size())) {
      throw ShapeError("optimizer: tensor " + std::to_string(t) + " has mismatched sizes");
    }
  }
}
}  // namespace

void gd_step(const ParamViews& params, const ConstParamViews& grads, Velocity& velocity, double alpha, double eta) {
  check_shapes(params, grads, &velocity);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    auto& v = velocity.buffers[t];
    for (std::size_t i = 0; i < p.size(); ++i) {
      v[i] = eta * v[i] - alpha * g[i];
      p[i] += v[i];
    }
  }
}

void sgd_step(const ParamViews& params, const ConstParamViews& batch_grads, Velocity& velocity, double alpha_k,
              double eta) {
  gd_step(params, batch_grads, velocity, alpha_k, eta);
}

void literal_eq3_step(const ParamViews& params, const ConstParamViews& grads, double alpha, double eta) {
  check_shapes(params, grads, nullptr);
  for (std::size_t t = 0; t < params.size(); ++t) {
    auto p = params[t];
    auto g = grads[t];
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = eta * p[i] - alpha * g[i];
  }
}

std::vector<Vector> mean_gradient(std::span<const ConstParamViews> per_example) {
  if (per_example.empty()) throw StateError("mean_gradient: no examples");
  std::vector<Vector> mean;
  for (const auto& g : per_example.front()) mean.emplace_back(g.size(), 0.0);
  for (const auto& example : per_example) {
    if (example.size() != mean.size()) throw ShapeError("mean_gradient: tensor count mismatch");
    for (std::size_t t = 0; t < mean.size(); ++t) {
      if (example[t].size() != mean[t].size()) throw ShapeError("mean_gradient: tensor size mismatch");
      for (std::size_t i = 0; i < mean[t].size(); ++i) mean[t][i] += example[t][i];
    }
  }
  const double inv = 1.0 / static_cast<double>(per_example.size());
  for (auto& t : mean)
    for (double& v : t) v *= inv;
  return mean;
}

ConstParamViews views_of(const std::vector<Vector>& tensors) {
  ConstParamViews v;
  for (const auto& t : tensors) v.emplace_back(t);
  return v;
}

RunHistory train(HammersteinModel& model, const SplitDataset& data, const TrainConfig& config,
                 const TrainOptions& options) {
  config.validate();
  model.validate();
  if (data.train.sample_count() == 0) throw StateError("train: empty training set");
  data.train.validate();
  data.test.validate();
  if (data.train.n_inputs() != model.input_size() || data.train.n_outputs() != model.output_size()) {
    throw ShapeError("train: model maps " + std::to_string(model.input_size()) + " -> " +
                     std::to_string(model.output_size()) + " channels, data has " +
                     std::to_string(data.train.n_inputs()) + " -> " + std::to_string(data.train.n_outputs()));
  }

  RunHistory history;
  if (config.epochs == 0) return history;

  using clock = std::chrono::steady_clock;
  const auto start = clock::now();
  SeededRng dropout_rng(mix_seed(config.seed, 0xD509ULL));
  const ParamViews params = param_views(model);
  Velocity velocity = Velocity::zeros_like(params);
  const std::span<const Vector> all_u(data.train.u);
  const std::span<const Vector> all_y(data.train.y);

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto windows = minibatches(data.train, config.batch_size, config.seed, epoch);
    for (std::size_t b = 0; b < windows.size(); ++b) {
      const auto u = all_u.subspan(windows[b].begin, windows[b].size());
      const auto y = all_y.subspan(windows[b].begin, windows[b].size());
      for (std::size_t inner = 0; inner < config.inner_loops; ++inner) {
        const HammersteinGrads g = hammerstein_grads(model, u, y, config.bptt_horizon, &dropout_rng);
        if (!std::isfinite(g.loss)) {
          throw DivergenceError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                std::to_string(b));
        }
        const ConstParamViews grads = param_views(g.grads);
        if (config.literal_eq3) {
          literal_eq3_step(params, grads, config.learning_rate, config.momentum);
        } else {
          sgd_step(params, grads, velocity, config.learning_rate, config.momentum);
        }
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    const EvalReport train_eval = evaluate(model, data.train);
    record.train_mse = train_eval.mse;
    if (data.test.sample_count() > 0) {
      const EvalReport val = evaluate(model, data.test);
      record.val_mse = val.mse;
      record.val_fit = val.channel_fit;
      record.fit_pct = val.fit;
    }
    record.seconds = std::chrono::duration<double>(clock::now() - start).count();
    if (!std::isfinite(record.train_mse) || !std::isfinite(record.val_mse) || !std::isfinite(record.fit_pct)) {
      throw DivergenceError("non-finite evaluation metrics after epoch " + std::to_string(epoch));
    }
    if (options.log) {
      for (std::size_t c = 0; c < model.linear.size(); ++c) {
        const double radius = pole_radius(model.linear[c].a());
        if (radius >= 1.0) {
          *options.log << "warning: epoch " << epoch << ": linear block " << c << " has pole radius " << radius
                       << " (unstable)\n";
        }
      }
    }
    history.epochs.push_back(record);
    if (options.on_epoch) options.on_epoch(record);
  }
  history.total_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return history;
}

}  // namespace sidnn
