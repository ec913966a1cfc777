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

FastLstmCell FastLstmCell::random(std::size_t in, std::size_t hidden, SeededRng& rng, const InitOptions& init,
                                  bool recurrent_block_input) {
  const double sx = fan_in_scale(init, in);
  const double sh = fan_in_scale(init, hidden);
  FastLstmCell c;
  c.W_xi = init_uniform(hidden, in, sx, rng);
  c.W_hi = init_uniform(hidden, hidden, sh, rng);
  c.W_xf = init_uniform(hidden, in, sx, rng);
  c.W_hf = init_uniform(hidden, hidden, sh, rng);
  c.W_xc = init_uniform(hidden, in, sx, rng);
  c.W_xo = init_uniform(hidden, in, sx, rng);
  c.W_ho = init_uniform(hidden, hidden, sh, rng);
  c.b_i = Vector(hidden, 0.0);
  c.b_f = Vector(hidden, init.forget_bias);
  c.b_c = Vector(hidden, 0.0);
  c.b_o = Vector(hidden, 0.0);
  if (recurrent_block_input) c.W_hc = init_uniform(hidden, hidden, sh, rng);
  return c;
}

void FastLstmCell::validate() const {
  const std::size_t n = W_hi.rows();
  const std::size_t in = W_xi.cols();
  for (const Matrix* m : {&W_xi, &W_xf, &W_xc, &W_xo}) detail::expect_shape(*m, n, in, "input weights", "fastlstm");
  for (const Matrix* m : {&W_hi, &W_hf, &W_ho}) detail::expect_shape(*m, n, n, "recurrent weights", "fastlstm");
  if (!W_hc.empty()) detail::expect_shape(W_hc, n, n, "W_hc", "fastlstm");
  for (const Vector* v : {&b_i, &b_f, &b_c, &b_o}) detail::expect_len(*v, n, "bias", "fastlstm");
}

CellState zero_state(const FastLstmCell& cell) {
  return {Vector(cell.hidden_size(), 0.0), Vector(cell.hidden_size(), 0.0)};
}

LstmStep fast_lstm_step(const FastLstmCell& cell, std::span<const double> x, const CellState& state) {
  CellState next = state;
  Vector h = step_forward(cell, x, next, nullptr);
  return {std::move(next), std::move(h)};
}

Vector step_forward(const FastLstmCell& cell, std::span<const double> x, CellState& state, TapeStep* tape) {
  const std::size_t n = cell.hidden_size();
  detail::expect_len(x, cell.input_size(), "input", "fastlstm");
  detail::expect_len(state.h, n, "h_prev", "fastlstm");
  detail::expect_len(state.c, n, "c_prev", "fastlstm");
  const Vector& h_prev = state.h;
  const Vector& c_prev = state.c;

  Vector ai(n), af(n), az(n), ao(n);
  kernels::affine(cell.W_xi, x, cell.b_i, ai);
  kernels::gemv_acc(cell.W_hi, h_prev, ai);
  kernels::affine(cell.W_xf, x, cell.b_f, af);
  kernels::gemv_acc(cell.W_hf, h_prev, af);
  kernels::affine(cell.W_xc, x, cell.b_c, az);
  if (cell.recurrent_block_input()) kernels::gemv_acc(cell.W_hc, h_prev, az);
  kernels::affine(cell.W_xo, x, cell.b_o, ao);
  kernels::gemv_acc(cell.W_ho, h_prev, ao);

  Vector i(n), f(n), z(n), c(n), o(n), tc(n), h(n);
  for (std::size_t j = 0; j < n; ++j) {
    i[j] = sigmoid(ai[j]);
    f[j] = sigmoid(af[j]);
    z[j] = std::tanh(az[j]);
    c[j] = f[j] * c_prev[j] + i[j] * z[j];
    o[j] = sigmoid(ao[j]);
    tc[j] = std::tanh(c[j]);
    h[j] = o[j] * tc[j];
  }

  if (tape) {
    tape->x.assign(x.begin(), x.end());
    tape->h_prev = h_prev;
    tape->c_prev = c_prev;
    tape->i = i;
    tape->f = f;
    tape->z = z;
    tape->o = o;
    tape->c = c;
    tape->tanh_c = tc;
    tape->h = h;
  }
  state.h = h;
  state.c = std::move(c);
  return h;
}

Vector step_backward(const FastLstmCell& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry& carry, FastLstmCell& grads) {
  const std::size_t n = cell.hidden_size();
  const Vector dh_next = detail::ensure(carry.dh, n);
  const Vector dc_next = detail::ensure(carry.dc, n);

  Vector dai(n), daf(n), daz(n), dao(n), dc_prev(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double dh = d_out[j] + dh_next[j];
    const double o = tape.o[j], tc = tape.tanh_c[j];
    dao[j] = dh * tc * o * (1.0 - o);
    const double dc = dc_next[j] + dh * o * (1.0 - tc * tc);
    const double i = tape.i[j], f = tape.f[j], z = tape.z[j];
    daf[j] = dc * tape.c_prev[j] * f * (1.0 - f);
    dai[j] = dc * z * i * (1.0 - i);
    daz[j] = dc * i * (1.0 - z * z);
    dc_prev[j] = dc * f;
  }

  kernels::outer_acc(dai, tape.x, grads.W_xi);
  kernels::outer_acc(dai, tape.h_prev, grads.W_hi);
  kernels::outer_acc(daf, tape.x, grads.W_xf);
  kernels::outer_acc(daf, tape.h_prev, grads.W_hf);
  kernels::outer_acc(daz, tape.x, grads.W_xc);
  kernels::outer_acc(dao, tape.x, grads.W_xo);
  kernels::outer_acc(dao, tape.h_prev, grads.W_ho);
  if (cell.recurrent_block_input()) kernels::outer_acc(daz, tape.h_prev, grads.W_hc);
  detail::add_to(grads.b_i, dai);
  detail::add_to(grads.b_f, daf);
  detail::add_to(grads.b_c, daz);
  detail::add_to(grads.b_o, dao);

  Vector dx(cell.input_size(), 0.0);
  kernels::gemv_t_acc(cell.W_xi, dai, dx);
  kernels::gemv_t_acc(cell.W_xf, daf, dx);
  kernels::gemv_t_acc(cell.W_xc, daz, dx);
  kernels::gemv_t_acc(cell.W_xo, dao, dx);

  carry.dh.assign(n, 0.0);
  kernels::gemv_t_acc(cell.W_hi, dai, carry.dh);
  kernels::gemv_t_acc(cell.W_hf, daf, carry.dh);
  kernels::gemv_t_acc(cell.W_ho, dao, carry.dh);
  if (cell.recurrent_block_input()) kernels::gemv_t_acc(cell.W_hc, daz, carry.dh);
  carry.dc = std::move(dc_prev);
  return dx;
}

}  // namespace sidnn
