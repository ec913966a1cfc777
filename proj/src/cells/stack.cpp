#include "sidnn/stack.hpp"

#include <algorithm>

#include "sidnn/errors.hpp"

namespace sidnn {

std::string_view cell_kind(const Cell& cell) {
  struct Kind {
    std::string_view operator()(const DenseLayer&) const { return "dense"; }
    std::string_view operator()(const RnnCell&) const { return "rnn"; }
    std::string_view operator()(const LstmCell&) const { return "lstm"; }
    std::string_view operator()(const FastLstmCell&) const { return "fastlstm"; }
    std::string_view operator()(const GruCell&) const { return "gru"; }
  };
  return std::visit(Kind{}, cell);
}

std::size_t CellStack::input_size() const {
  if (layers.empty()) return 0;
  return std::visit([](const auto& c) { return c.input_size(); }, layers.front().cell);
}

std::size_t CellStack::output_size() const {
  if (layers.empty()) return 0;
  return std::visit([](const auto& c) { return c.output_size(); }, layers.back().cell);
}

void CellStack::validate() const {
  std::size_t previous_out = 0;
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const auto& layer = layers[k];
    std::visit([](const auto& c) { c.validate(); }, layer.cell);
    if (!(layer.dropout >= 0.0 && layer.dropout < 1.0)) {
      throw ConfigError("layer " + std::to_string(k) + ": dropout must be in [0, 1)");
    }
    const std::size_t in = std::visit([](const auto& c) { return c.input_size(); }, layer.cell);
    if (k > 0 && in != previous_out) {
      throw ShapeError("layer " + std::to_string(k) + " expects input width " + std::to_string(in) +
                       " but layer " + std::to_string(k - 1) + " produces " + std::to_string(previous_out));
    }
    previous_out = std::visit([](const auto& c) { return c.output_size(); }, layer.cell);
  }
}

StackState zero_state(const CellStack& stack) {
  StackState s;
  s.layers.reserve(stack.layers.size());
  for (const auto& layer : stack.layers) {
    s.layers.push_back(std::visit([](const auto& c) { return zero_state(c); }, layer.cell));
  }
  return s;
}

Vector stack_step(const CellStack& stack, std::span<const double> x, StackState& state, TapeRow* tape,
                  SeededRng* dropout_rng) {
  if (state.layers.size() != stack.layers.size()) throw StateError("stack state does not match the stack");
  if (tape) tape->assign(stack.layers.size(), TapeStep{});
  Vector signal(x.begin(), x.end());
  for (std::size_t k = 0; k < stack.layers.size(); ++k) {
    const auto& layer = stack.layers[k];
    TapeStep* step = tape ? &(*tape)[k] : nullptr;
    signal = std::visit([&](const auto& c) { return step_forward(c, signal, state.layers[k], step); }, layer.cell);
    if (dropout_rng && layer.dropout > 0.0) {
      Vector mask = dropout_mask(signal.size(), layer.dropout, *dropout_rng);
      for (std::size_t i = 0; i < signal.size(); ++i) signal[i] *= mask[i];
      if (step) step->mask = std::move(mask);
    }
  }
  return signal;
}

namespace {

// Backpropagates one time step through all layers, top to bottom.
void backward_through_step(const CellStack& stack, const TapeRow& row, Vector d_top,
                           std::vector<BackwardCarry>& carries, CellStack& grads) {
  Vector d = std::move(d_top);
  for (std::size_t k = stack.layers.size(); k-- > 0;) {
    const TapeStep& step = row[k];
    if (!step.mask.empty()) {
      for (std::size_t i = 0; i < d.size(); ++i) d[i] *= step.mask[i];
    }
    d = std::visit(
        [&](const auto& cell) {
          using T = std::decay_t<decltype(cell)>;
          return step_backward(cell, step, d, carries[k], std::get<T>(grads.layers[k].cell));
        },
        stack.layers[k].cell);
  }
}

bool all_zero(const Vector& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; });
}

}  // namespace

void stack_backward(const CellStack& stack, const StackTape& tape, std::span<const Vector> output_grads,
                    std::size_t horizon, CellStack& grads) {
  const std::size_t T = tape.steps.size();
  if (T == 0) throw StateError("cell_backward: empty tape");
  if (horizon == 0) throw ConfigError("cell_backward: truncation horizon must be >= 1");
  if (output_grads.size() != T) {
    throw ShapeError("cell_backward: " + std::to_string(output_grads.size()) + " output gradients for " +
                     std::to_string(T) + " tape steps");
  }
  if (grads.layers.size() != stack.layers.size()) throw ShapeError("cell_backward: gradient stack shape mismatch");
  const std::size_t out = stack.output_size();
  for (const auto& g : output_grads) {
    if (g.size() != out) throw ShapeError("cell_backward: output gradient width mismatch");
  }

  std::vector<BackwardCarry> carries(stack.layers.size());
  if (horizon >= T) {
    // Nothing is truncated: one reverse sweep accumulating every injection.
    for (std::size_t t = T; t-- > 0;) backward_through_step(stack, tape.steps[t], output_grads[t], carries, grads);
    return;
  }

  const Vector zero(out, 0.0);
  for (std::size_t s = 0; s < T; ++s) {
    if (all_zero(output_grads[s])) continue;
    std::fill(carries.begin(), carries.end(), BackwardCarry{});
    const std::size_t first = s + 1 >= horizon ? s + 1 - horizon : 0;
    for (std::size_t t = s + 1; t-- > first;) {
      backward_through_step(stack, tape.steps[t], t == s ? output_grads[s] : zero, carries, grads);
    }
  }
}

Cell cell_backward(const Cell& cell, std::span<const TapeStep> tape, std::span<const Vector> output_grads,
                   std::size_t horizon) {
  CellStack stack;
  stack.layers.push_back({cell, 0.0});
  StackTape stack_tape;
  stack_tape.steps.reserve(tape.size());
  for (const auto& step : tape) stack_tape.steps.push_back(TapeRow{step});
  CellStack grads = zeros_like(stack);
  stack_backward(stack, stack_tape, output_grads, horizon, grads);
  return std::move(grads.layers.front().cell);
}

Cell zeros_like(const Cell& cell) {
  Cell copy = cell;
  std::visit([](auto& c) { fill_params(c, 0.0); }, copy);
  return copy;
}

CellStack zeros_like(const CellStack& stack) {
  CellStack copy = stack;
  for (auto& layer : copy.layers) layer.cell = zeros_like(layer.cell);
  return copy;
}

std::size_t param_count(const Cell& cell) {
  return std::visit([](const auto& c) { return param_count(c); }, cell);
}

std::size_t param_count(const CellStack& stack) {
  std::size_t n = 0;
  for (const auto& layer : stack.layers) n += param_count(layer.cell);
  return n;
}

}  // namespace sidnn
