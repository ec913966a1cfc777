#include "cell_common.hpp"
#include "sidnn/cells.hpp"
#include "sidnn/kernels.hpp"

#include <cmath>

namespace sidnn {

DenseLayer DenseLayer::random(std::size_t in, std::size_t out, Activation act, SeededRng& rng,
                              const InitOptions& init) {
  const double scale = init.scale > 0.0 ? init.scale : 1.0 / std::sqrt(static_cast<double>(in));
  DenseLayer layer;
  layer.W = init_uniform(out, in, scale, rng);
  layer.b = Vector(out, 0.0);
  layer.activation = act;
  return layer;
}

void DenseLayer::validate() const {
  if (W.rows() != b.size()) {
    throw ShapeError("dense: W is " + W.shape() + " but b has length " + std::to_string(b.size()));
  }
}

Vector dense_forward(const DenseLayer& layer, std::span<const double> x) {
  CellState none;
  return step_forward(layer, x, none, nullptr);
}

CellState zero_state(const DenseLayer&) { return {}; }

Vector step_forward(const DenseLayer& cell, std::span<const double> x, CellState&, TapeStep* tape) {
  detail::expect_len(x, cell.W.cols(), "input", "dense");
  Vector pre(cell.W.rows());
  kernels::affine(cell.W, x, cell.b, pre);
  Vector out = activate(cell.activation, pre);
  if (tape) {
    tape->x.assign(x.begin(), x.end());
    tape->pre = pre;
    tape->h = out;
  }
  return out;
}

Vector step_backward(const DenseLayer& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry&, DenseLayer& grads) {
  Vector d_pre(d_out.size());
  for (std::size_t j = 0; j < d_pre.size(); ++j) {
    d_pre[j] = d_out[j] * activation_derivative(cell.activation, tape.pre[j], tape.h[j]);
  }
  kernels::outer_acc(d_pre, tape.x, grads.W);
  detail::add_to(grads.b, d_pre);
  Vector dx(cell.W.cols(), 0.0);
  kernels::gemv_t_acc(cell.W, d_pre, dx);
  return dx;
}

}  // namespace sidnn
