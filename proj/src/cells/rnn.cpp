#include "cell_common.hpp"
#include "sidnn/cells.hpp"
#include "sidnn/kernels.hpp"

#include <cmath>

namespace sidnn {

namespace {
double fan_in_scale(const InitOptions& init, std::size_t fan_in) {
  return init.scale > 0.0 ? init.scale : 1.0 / std::sqrt(static_cast<double>(fan_in));
}
}  // namespace

RnnCell RnnCell::random(std::size_t in, std::size_t hidden, std::size_t out, Activation hidden_fn,
                        SeededRng& rng, const InitOptions& init) {
  RnnCell cell;
  cell.W_uh = init_uniform(hidden, in, fan_in_scale(init, in), rng);
  cell.W_hh = init_uniform(hidden, hidden, fan_in_scale(init, hidden), rng);
  cell.W_hy = init_uniform(out, hidden, fan_in_scale(init, hidden), rng);
  cell.b_h = Vector(hidden, 0.0);
  cell.b_y = Vector(out, 0.0);
  cell.hidden_fn = hidden_fn;
  return cell;
}

void RnnCell::validate() const {
  const std::size_t n = W_hh.rows();
  detail::expect_shape(W_hh, n, n, "W_hh", "rnn");
  detail::expect_shape(W_uh, n, W_uh.cols(), "W_uh", "rnn");
  detail::expect_shape(W_hy, W_hy.rows(), n, "W_hy", "rnn");
  detail::expect_len(b_h, n, "b_h", "rnn");
  detail::expect_len(b_y, W_hy.rows(), "b_y", "rnn");
}

CellState zero_state(const RnnCell& cell) { return {Vector(cell.hidden_size(), 0.0), {}}; }

RnnStep rnn_step(const RnnCell& cell, std::span<const double> u, std::span<const double> h_prev) {
  CellState state{Vector(h_prev.begin(), h_prev.end()), {}};
  Vector y = step_forward(cell, u, state, nullptr);
  return {std::move(state.h), std::move(y)};
}

Vector step_forward(const RnnCell& cell, std::span<const double> x, CellState& state, TapeStep* tape) {
  const std::size_t n = cell.hidden_size();
  detail::expect_len(x, cell.input_size(), "input", "rnn");
  detail::expect_len(state.h, n, "h_prev", "rnn");

  Vector pre(n);
  kernels::affine(cell.W_uh, x, cell.b_h, pre);
  kernels::gemv_acc(cell.W_hh, state.h, pre);
  Vector h = activate(cell.hidden_fn, pre);
  Vector y(cell.output_size());
  kernels::affine(cell.W_hy, h, cell.b_y, y);

  if (tape) {
    tape->x.assign(x.begin(), x.end());
    tape->h_prev = state.h;
    tape->pre = pre;
    tape->h = h;
  }
  state.h = std::move(h);
  return y;
}

Vector step_backward(const RnnCell& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry& carry, RnnCell& grads) {
  const std::size_t n = cell.hidden_size();
  kernels::outer_acc(d_out, tape.h, grads.W_hy);
  detail::add_to(grads.b_y, d_out);

  Vector dh = detail::ensure(carry.dh, n);
  kernels::gemv_t_acc(cell.W_hy, d_out, dh);

  Vector da(n);
  for (std::size_t j = 0; j < n; ++j) {
    da[j] = dh[j] * activation_derivative(cell.hidden_fn, tape.pre[j], tape.h[j]);
  }
  kernels::outer_acc(da, tape.x, grads.W_uh);
  kernels::outer_acc(da, tape.h_prev, grads.W_hh);
  detail::add_to(grads.b_h, da);

  Vector dx(cell.input_size(), 0.0);
  kernels::gemv_t_acc(cell.W_uh, da, dx);
  carry.dh.assign(n, 0.0);
  kernels::gemv_t_acc(cell.W_hh, da, carry.dh);
  return dx;
}

}  // namespace sidnn
