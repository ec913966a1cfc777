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

LstmCell LstmCell::random(std::size_t in, std::size_t hidden, SeededRng& rng, const InitOptions& init) {
  const double su = fan_in_scale(init, in);
  const double sh = fan_in_scale(init, hidden);
  LstmCell c;
  c.W_ui = init_uniform(hidden, in, su, rng);
  c.W_hi = init_uniform(hidden, hidden, sh, rng);
  c.W_uf = init_uniform(hidden, in, su, rng);
  c.W_hf = init_uniform(hidden, hidden, sh, rng);
  c.W_uc = init_uniform(hidden, in, su, rng);
  c.W_hc = init_uniform(hidden, hidden, sh, rng);
  c.W_uo = init_uniform(hidden, in, su, rng);
  c.W_ho = init_uniform(hidden, hidden, sh, rng);
  c.w_ci = init_uniform(hidden, sh, rng);
  c.w_cf = init_uniform(hidden, sh, rng);
  c.w_co = init_uniform(hidden, sh, rng);
  c.b_i = Vector(hidden, 0.0);
  c.b_f = Vector(hidden, init.forget_bias);
  c.b_c = Vector(hidden, 0.0);
  c.b_o = Vector(hidden, 0.0);
  return c;
}

void LstmCell::validate() const {
  const std::size_t n = W_hi.rows();
  const std::size_t in = W_ui.cols();
  for (const Matrix* m : {&W_ui, &W_uf, &W_uc, &W_uo}) detail::expect_shape(*m, n, in, "input weights", "lstm");
  for (const Matrix* m : {&W_hi, &W_hf, &W_hc, &W_ho}) detail::expect_shape(*m, n, n, "recurrent weights", "lstm");
  for (const Vector* v : {&w_ci, &w_cf, &w_co, &b_i, &b_f, &b_c, &b_o}) detail::expect_len(*v, n, "gate vector", "lstm");
}

CellState zero_state(const LstmCell& cell) {
  return {Vector(cell.hidden_size(), 0.0), Vector(cell.hidden_size(), 0.0)};
}

LstmStep lstm_step(const LstmCell& cell, std::span<const double> u, const CellState& state) {
  CellState next = state;
  Vector h = step_forward(cell, u, next, nullptr);
  return {std::move(next), std::move(h)};
}

Vector step_forward(const LstmCell& cell, std::span<const double> x, CellState& state, TapeStep* tape) {
  const std::size_t n = cell.hidden_size();
  detail::expect_len(x, cell.input_size(), "input", "lstm");
  detail::expect_len(state.h, n, "h_prev", "lstm");
  detail::expect_len(state.c, n, "c_prev", "lstm");
  const Vector& h_prev = state.h;
  const Vector& c_prev = state.c;

  Vector ai(n), af(n), az(n), ao(n);
  kernels::affine(cell.W_ui, x, cell.b_i, ai);
  kernels::gemv_acc(cell.W_hi, h_prev, ai);
  kernels::affine(cell.W_uf, x, cell.b_f, af);
  kernels::gemv_acc(cell.W_hf, h_prev, af);
  kernels::affine(cell.W_uc, x, cell.b_c, az);
  kernels::gemv_acc(cell.W_hc, h_prev, az);
  kernels::affine(cell.W_uo, x, cell.b_o, ao);
  kernels::gemv_acc(cell.W_ho, h_prev, ao);

  Vector i(n), f(n), z(n), c(n), o(n), tc(n), h(n);
  for (std::size_t j = 0; j < n; ++j) {
    i[j] = sigmoid(ai[j] + cell.w_ci[j] * c_prev[j]);
    f[j] = sigmoid(af[j] + cell.w_cf[j] * c_prev[j]);
    z[j] = std::tanh(az[j]);
    c[j] = f[j] * c_prev[j] + i[j] * z[j];
    const double peep = cell.output_peephole == OutputPeephole::current_cell ? c[j] : c_prev[j];
    o[j] = sigmoid(ao[j] + cell.w_co[j] * peep);
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

Vector step_backward(const LstmCell& cell, const TapeStep& tape, std::span<const double> d_out,
                     BackwardCarry& carry, LstmCell& grads) {
  const std::size_t n = cell.hidden_size();
  const bool peep_current = cell.output_peephole == OutputPeephole::current_cell;
  const Vector dh_next = detail::ensure(carry.dh, n);
  const Vector dc_next = detail::ensure(carry.dc, n);

  Vector dai(n), daf(n), daz(n), dao(n), dc_prev(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double dh = d_out[j] + dh_next[j];
    const double o = tape.o[j], tc = tape.tanh_c[j];
    dao[j] = dh * tc * o * (1.0 - o);
    double dc = dc_next[j] + dh * o * (1.0 - tc * tc);
    if (peep_current) dc += dao[j] * cell.w_co[j];
    const double i = tape.i[j], f = tape.f[j], z = tape.z[j];
    daf[j] = dc * tape.c_prev[j] * f * (1.0 - f);
    dai[j] = dc * z * i * (1.0 - i);
    daz[j] = dc * i * (1.0 - z * z);
    dc_prev[j] = dc * f + dai[j] * cell.w_ci[j] + daf[j] * cell.w_cf[j];
    if (!peep_current) dc_prev[j] += dao[j] * cell.w_co[j];

    grads.w_ci[j] += dai[j] * tape.c_prev[j];
    grads.w_cf[j] += daf[j] * tape.c_prev[j];
    grads.w_co[j] += dao[j] * (peep_current ? tape.c[j] : tape.c_prev[j]);
  }

  kernels::outer_acc(dai, tape.x, grads.W_ui);
  kernels::outer_acc(dai, tape.h_prev, grads.W_hi);
  kernels::outer_acc(daf, tape.x, grads.W_uf);
  kernels::outer_acc(daf, tape.h_prev, grads.W_hf);
  kernels::outer_acc(daz, tape.x, grads.W_uc);
  kernels::outer_acc(daz, tape.h_prev, grads.W_hc);
  kernels::outer_acc(dao, tape.x, grads.W_uo);
  kernels::outer_acc(dao, tape.h_prev, grads.W_ho);
  detail::add_to(grads.b_i, dai);
  detail::add_to(grads.b_f, daf);
  detail::add_to(grads.b_c, daz);
  detail::add_to(grads.b_o, dao);

  Vector dx(cell.input_size(), 0.0);
  kernels::gemv_t_acc(cell.W_ui, dai, dx);
  kernels::gemv_t_acc(cell.W_uf, daf, dx);
  kernels::gemv_t_acc(cell.W_uc, daz, dx);
  kernels::gemv_t_acc(cell.W_uo, dao, dx);

  carry.dh.assign(n, 0.0);
  kernels::gemv_t_acc(cell.W_hi, dai, carry.dh);
  kernels::gemv_t_acc(cell.W_hf, daf, carry.dh);
  kernels::gemv_t_acc(cell.W_hc, daz, carry.dh);
  kernels::gemv_t_acc(cell.W_ho, dao, carry.dh);
  carry.dc = std::move(dc_prev);
  return dx;
}

}  // namespace sidnn
