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

GruCell GruCell::random(std::size_t in, std::size_t hidden, SeededRng& rng, const InitOptions& init) {
  const double su = fan_in_scale(init, in);
  const double sh = fan_in_scale(init, hidden);
  GruCell c;
  c.W_r = init_uniform(hidden, in, su, rng);
  c.U_r = init_uniform(hidden, hidden, sh, rng);
  c.W_z = init_uniform(hidden, in, su, rng);
  c.U_z = init_uniform(hidden, hidden, sh, rng);
  c.W = init_uniform(hidden, in, su, rng);
  c.U = init_uniform(hidden, hidden, sh, rng);
  return c;
}

void GruCell::validate() const {
  const std::size_t n = U_r.rows();
  const std::size_t in = W_r.cols();
  for (const Matrix* m : {&W_r, &W_z, &W}) detail::expect_shape(*m, n, in, "input weights", "gru");
  for (const Matrix* m : {&U_r, &U_z, &U}) detail::expect_shape(*m, n, n, "recurrent weights", "gru");
}

CellState zero_state(const GruCell& cell) { return {Vector(cell.hidden_size(), 0.0), {}}; }

Vector gru_step(const GruCell& cell, std::span<const double> u, std::span<const double> h_prev) {
  CellState state{Vector(h_prev.begin(), h_prev.end()), {}};
  return step_forward(cell, u, state, nullptr);
}

Vector step_forward(const GruCell& cell, std::span<const double> x, CellState& state, TapeStep* tape) {
  const std::size_t n = cell.hidden_size();
  detail::expect_len(x, cell.input_size(), "input", "gru");
  detail::expect_len(state.h, n, "h_prev", "gru");
  const Vector& h_prev = state.h;

  Vector ar(n), az(n), ah(n);
  kernels::affine(cell.W_r, x, {}, ar);
  kernels::gemv_acc(cell.U_r, h_prev, ar);
  kernels::affine(cell.W_z, x, {}, az);
  kernels::gemv_acc(cell.U_z, h_prev, az);

  Vector r(n), z(n), rh(n);
  for (std::size_t j = 0; j < n; ++j) {
    r[j] = sigmoid(ar[j]);
    z[j] = sigmoid(az[j]);
    rh[j] = r[j] * h_prev[j];
  }
  kernels::affine(cell.W, x, {}, ah);
  kernels::gemv_acc(cell.U, rh, ah);

  Vector hbar(n), h(n);
  for (std::size_t j = 0; j < n; ++j) {
    hbar[j] = std::tanh(ah[j]);
    h[j] = z[j] * h_prev[j] + (1.0 - z[j]) * hbar[j];
  }

  if (tape) {
    tape->x.assign(x.begin(), x.end());
    tape->h_prev = h_prev;
    tape->r = r;
    tape->z = z;
    tape->hbar = hbar;
    tape->h = h;
  }
  state.h = h;
  return h;
}

Vector step_backward(const GruCell& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry& carry, GruCell& grads) {
  const std::size_t n = cell.hidden_size();
  const Vector dh_next = detail::ensure(carry.dh, n);

  Vector dh(n), daz(n), dah(n), rh(n);
  for (std::size_t j = 0; j < n; ++j) {
    dh[j] = d_out[j] + dh_next[j];
    const double z = tape.z[j], hb = tape.hbar[j];
    daz[j] = dh[j] * (tape.h_prev[j] - hb) * z * (1.0 - z);
    dah[j] = dh[j] * (1.0 - z) * (1.0 - hb * hb);
    rh[j] = tape.r[j] * tape.h_prev[j];
  }

  Vector drh(n, 0.0);
  kernels::gemv_t_acc(cell.U, dah, drh);
  Vector dar(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double r = tape.r[j];
    dar[j] = drh[j] * tape.h_prev[j] * r * (1.0 - r);
  }

  kernels::outer_acc(dar, tape.x, grads.W_r);
  kernels::outer_acc(dar, tape.h_prev, grads.U_r);
  kernels::outer_acc(daz, tape.x, grads.W_z);
  kernels::outer_acc(daz, tape.h_prev, grads.U_z);
  kernels::outer_acc(dah, tape.x, grads.W);
  kernels::outer_acc(dah, rh, grads.U);

  Vector dx(cell.input_size(), 0.0);
  kernels::gemv_t_acc(cell.W_r, dar, dx);
  kernels::gemv_t_acc(cell.W_z, daz, dx);
  kernels::gemv_t_acc(cell.W, dah, dx);

  carry.dh.assign(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) carry.dh[j] = dh[j] * tape.z[j] + drh[j] * tape.r[j];
  kernels::gemv_t_acc(cell.U_r, dar, carry.dh);
  kernels::gemv_t_acc(cell.U_z, daz, carry.dh);
  return dx;
}

}  // namespace sidnn
