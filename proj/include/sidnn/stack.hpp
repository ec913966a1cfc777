#pragma once

// A stack of cells evaluated bottom-up at each time step, with truncated
// backpropagation through time over a recorded tape.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sidnn/cells.hpp"

namespace sidnn {

using Cell = std::variant<DenseLayer, RnnCell, LstmCell, FastLstmCell, GruCell>;

std::string_view cell_kind(const Cell& cell);

struct StackLayer {
  Cell cell;
  /// Dropout probability applied to this layer's output while training.
  double dropout = 0.0;
};

struct CellStack {
  std::vector<StackLayer> layers;

  std::size_t input_size() const;
  std::size_t output_size() const;
  /// Checks every cell and that each layer's input matches the previous output.
  void validate() const;
};

struct StackState {
  std::vector<CellState> layers;
};

/// One TapeStep per layer for a single time step.
using TapeRow = std::vector<TapeStep>;

struct StackTape {
  std::vector<TapeRow> steps;
};

StackState zero_state(const CellStack& stack);

/// Advances the stack by one time step. When dropout_rng is non-null the
/// stack is in training mode and each layer's dropout is applied to its output.
Vector stack_step(const CellStack& stack, std::span<const double> x, StackState& state, TapeRow* tape,
                  SeededRng* dropout_rng);

/// Truncated BPTT. output_grads[t] is dL/d(stack output at t). The error
/// injected at step t flows back through steps t, t-1, ..., t-horizon+1;
/// anything earlier is treated as constant. Gradients are added into grads,
/// which must have the same shapes as stack.
void stack_backward(const CellStack& stack, const StackTape& tape, std::span<const Vector> output_grads,
                    std::size_t horizon, CellStack& grads);

/// Single-cell form of stack_backward: returns parameter gradients shaped like cell.
Cell cell_backward(const Cell& cell, std::span<const TapeStep> tape, std::span<const Vector> output_grads,
                   std::size_t horizon);

Cell zeros_like(const Cell& cell);
CellStack zeros_like(const CellStack& stack);

std::size_t param_count(const Cell& cell);
std::size_t param_count(const CellStack& stack);

/// Calls f("layers.<k>.<kind>.<tensor>", span) for every tensor in order.
template <class StackT, class F>
void for_each_tensor_in_stack(StackT& stack, F&& f) {
  for (std::size_t k = 0; k < stack.layers.size(); ++k) {
    std::visit(
        [&](auto& cell) {
          const std::string prefix = "layers." + std::to_string(k) + ".";
          for_each_tensor(cell, [&](std::string_view name, auto span) { f(prefix + std::string(name), span); });
        },
        stack.layers[k].cell);
  }
}

}  // namespace sidnn
